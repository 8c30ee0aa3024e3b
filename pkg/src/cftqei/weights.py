"""Weight functions and the sharp averaged-energy bound.

A weight is a nonnegative smearing function G for the stress-energy
density.  The central object is the square-root derivative

    phi(v) = G'(v) / (2 sqrt(G(v)))   where G(v) > 0,   phi(v) = 0 elsewhere,

whose squared integral sets the optimal lower bound

    bound(G, c) = -(c / 12 pi) * integral phi^2

on weighted averages of the energy density in a theory with central
charge c.  The zero rule at vanishing points is not a convenience: phi is
the distributional derivative of sqrt(G), and the decay-envelope constant
computed here certifies that phi^2 <= M/(1+v^2) pointwise, so the bound is
finite for every admissible weight.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import (
    DEFAULT_GRID_NODES,
    DEFAULT_TOL,
    Interval,
    RealFunction,
    Tail,
    ToleranceSet,
    differentiate,
    integrate,
)

__all__ = [
    "WeightFunction",
    "SqrtDerivative",
    "sqrt_weight_derivative",
    "qei_functional",
    "decay_envelope_constant",
    "epsilon_limit_check",
    "catalog_weight",
    "weight_from_csv",
    "CATALOG_NAMES",
    "DEFAULT_ZERO_THRESHOLD",
]

DEFAULT_ZERO_THRESHOLD = 1e-14


@dataclass(frozen=True)
class WeightFunction:
    """Nonnegative smearing weight with declared decay class.

    decay_class is "compact" (exactly zero outside `support`), "schwartz"
    (faster-than-any-power decay, represented on a window where the values
    fall below 1e-16 of the peak) or "power" (merely polynomial decay,
    outside the hypotheses of the sharp bound but still computable).
    """

    f: RealFunction
    support: Interval
    decay_class: str
    name: str = ""

    def __post_init__(self):
        if self.decay_class not in ("compact", "schwartz", "power"):
            raise ValueError(f"unknown decay class {self.decay_class!r}")
        vals = self.f.values
        if np.any(vals < 0.0):
            node = int(np.argmin(vals))
            raise ValueError(
                f"weight must be nonnegative; negative sample at node {node} "
                f"(v={self.f.nodes[node]:.6g}, G={vals[node]:.3e})")

    @property
    def within_sharp_bound_hypotheses(self) -> bool:
        return self.decay_class in ("compact", "schwartz")

    @property
    def peak(self) -> float:
        return float(np.max(self.f.values))

    @property
    def trivial(self) -> bool:
        return self.peak == 0.0

    def __call__(self, v):
        return self.f(v)

    def support_measure(self, threshold: float = 0.0) -> float:
        """Lebesgue measure of {G > threshold * peak}, from the samples."""
        if self.trivial:
            return 0.0
        cut = threshold * self.peak
        mask = self.f.values > cut
        if not mask.any():
            return 0.0
        h = np.diff(self.f.nodes)
        frac = 0.5 * (mask[:-1].astype(float) + mask[1:].astype(float))
        return float(np.sum(h * frac))

    def shifted(self, a: float) -> "WeightFunction":
        g = self.f.grid
        exact = None
        if self.f.exact is not None:
            inner = self.f.exact
            exact = lambda v: inner(np.asarray(v) - a)
        f = RealFunction(g.nodes + a, g.values, g.left_tail, g.right_tail,
                         exact=exact, name=self.f.name)
        return WeightFunction(f, Interval(self.support.lo + a, self.support.hi + a),
                              self.decay_class, name=f"{self.name}+shift")

    def rescaled(self, lam: float) -> "WeightFunction":
        """The compressed weight v -> G(lam v)."""
        if lam <= 0:
            raise ValueError("scaling must be positive")
        g = self.f.grid
        exact = None
        if self.f.exact is not None:
            inner = self.f.exact
            exact = lambda v: inner(lam * np.asarray(v))
        f = RealFunction(g.nodes / lam, g.values, g.left_tail, g.right_tail,
                         exact=exact, name=self.f.name)
        return WeightFunction(f, Interval(self.support.lo / lam, self.support.hi / lam),
                              self.decay_class, name=f"{self.name}@{lam:g}")


@dataclass(frozen=True)
class SqrtDerivative:
    """phi = d/dv sqrt(G) with the zero rule applied on `zero_mask` nodes."""

    phi: RealFunction
    zero_mask: np.ndarray

    def squared_integral(self, tol: ToleranceSet = DEFAULT_TOL) -> float:
        def _sq(tail: Tail) -> Tail:
            return Tail.power(2.0 * tail.exponent) if tail.kind == "power" else Tail.zero()

        g = self.phi.grid
        phi2 = RealFunction(g.nodes, g.values**2, _sq(g.left_tail), _sq(g.right_tail))
        return integrate(phi2, tol=tol)


def sqrt_weight_derivative(G: WeightFunction,
                           zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> SqrtDerivative:
    """Square-root derivative phi of a nonnegative weight.

    phi = G'/(2 sqrt(G)) where G exceeds zero_threshold times its peak and
    zero elsewhere; G' comes from the shared high-order differentiation
    kernel.  An identically zero G gives phi identically zero.
    """
    vals = G.f.values
    peak = float(np.max(vals)) if vals.size else 0.0
    if peak == 0.0:
        zero = np.zeros_like(vals)
        return SqrtDerivative(G.f.with_values(zero, exact=None), np.ones(vals.size, bool))
    gprime = differentiate(G.f, 1).values
    mask = vals > zero_threshold * peak
    phi = np.zeros_like(vals)
    phi[mask] = gprime[mask] / (2.0 * np.sqrt(vals[mask]))

    def _phi_tail(tail: Tail) -> Tail:
        # G ~ v^-p gives phi ~ v^-(p/2 + 1)
        if tail.kind == "power":
            return Tail.power(tail.exponent / 2.0 + 1.0)
        return Tail.zero()

    g = G.f.grid
    out = RealFunction(G.f.nodes, phi, _phi_tail(g.left_tail), _phi_tail(g.right_tail),
                       name=f"sqrt_derivative({G.name})")
    return SqrtDerivative(out, ~mask)


def qei_functional(G: WeightFunction, c: float,
                   zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
                   tol: ToleranceSet = DEFAULT_TOL) -> float:
    """The sharp lower bound -(c/12 pi) * integral phi^2; always <= 0."""
    if c <= 0:
        raise ValueError("central charge must be positive")
    phi = sqrt_weight_derivative(G, zero_threshold)
    return -(c / (12.0 * math.pi)) * phi.squared_integral(tol)


def decay_envelope_constant(G: WeightFunction,
                            zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> float:
    """Smallest grid certificate M with G'^2 <= 4 M G / (1 + v^2).

    Finite for twice-differentiable nonnegative weights of rapid decay; it
    bounds |phi(v)|^2 by M/(1+v^2) wherever G is above threshold, which is
    what makes the bound integral converge.  Returns 0 for trivial G.
    """
    if G.trivial:
        return 0.0
    vals = G.f.values
    peak = float(np.max(vals))
    gprime = differentiate(G.f, 1).values
    mask = vals > zero_threshold * peak
    v = G.f.nodes
    ratio = np.zeros_like(vals)
    ratio[mask] = (1.0 + v[mask] ** 2) * gprime[mask] ** 2 / (4.0 * vals[mask])
    return float(np.max(ratio))


def epsilon_limit_check(G: WeightFunction, eps_list: Sequence[float],
                        tol: ToleranceSet = DEFAULT_TOL) -> np.ndarray:
    """Regularized integrals I(eps) = integral G'^2 / (4 (G + eps)).

    For a descending eps_list the sequence is nondecreasing and converges
    to the squared integral of the square-root derivative.
    """
    eps_arr = np.asarray(list(eps_list), dtype=float)
    if np.any(eps_arr <= 0) or np.any(np.diff(eps_arr) >= 0):
        raise ValueError("eps_list must be positive and strictly descending")
    vals = G.f.values
    gprime = differentiate(G.f, 1).values
    out = []
    for eps in eps_arr:
        integrand = G.f.with_values(gprime**2 / (4.0 * (vals + eps)), exact=None)
        out.append(integrate(integrand, tol=tol))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# closed-form catalog and CSV loading
# ---------------------------------------------------------------------------

def _bump(x: np.ndarray) -> np.ndarray:
    """Standard smooth bump on (-1, 1), normalized to 1 at the origin."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi**2))
    return out


def _smoothstep(x: np.ndarray) -> np.ndarray:
    """C^inf step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    hi = x >= 1.0
    out[hi] = 1.0
    mid = (x > 0.0) & (x < 1.0)
    xm = x[mid]
    a = np.exp(-1.0 / xm)
    b = np.exp(-1.0 / (1.0 - xm))
    out[mid] = a / (a + b)
    return out


def _plateau(v: np.ndarray, half_width: float, ramp: float) -> np.ndarray:
    """1 on [-half_width, half_width], smooth ramps of the given width."""
    v = np.asarray(v, dtype=float)
    rise = _smoothstep((v + half_width + ramp) / ramp)
    fall = _smoothstep((half_width + ramp - v) / ramp)
    return rise * fall


CATALOG_NAMES = ("gaussian", "bump", "plateau", "double-bump", "lorentzian-squared")


def catalog_weight(name: str, n: int = DEFAULT_GRID_NODES, **params) -> WeightFunction:
    """Named closed-form weights.

    gaussian(center, width): exp(-((v-center)/width)^2), Schwartz class.
    bump(center, width): smooth compactly supported bump.
    plateau(half_width, ramp): 1 on a central interval with smooth ramps.
    double-bump(separation, width): two disjoint bumps, zero in between.
    lorentzian-squared(width): (1 + (v/width)^2)^-2, power decay only.
    """
    if name == "gaussian":
        center = params.pop("center", 0.0)
        width = params.pop("width", 1.0)
        _reject_extra(name, params)
        half = 6.5 * width  # peak ratio below 1e-18 at the window edge
        fn = lambda v: np.exp(-(((np.asarray(v) - center) / width) ** 2))
        f = RealFunction.from_callable(fn, center - half, center + half, n,
                                       Tail.zero(), Tail.zero(), name=name)
        return WeightFunction(f, Interval(center - half, center + half),
                              "schwartz", name=name)
    if name == "bump":
        center = params.pop("center", 0.0)
        width = params.pop("width", 1.0)
        _reject_extra(name, params)
        fn = lambda v: _bump((np.asarray(v) - center) / width)
        margin = 0.05 * width
        f = RealFunction.from_callable(fn, center - width - margin,
                                       center + width + margin, n,
                                       Tail.zero(), Tail.zero(), name=name)
        return WeightFunction(f, Interval(center - width, center + width),
                              "compact", name=name)
    if name == "plateau":
        half_width = params.pop("half_width", 1.0)
        ramp = params.pop("ramp", 1.0)
        _reject_extra(name, params)
        lo = -half_width - ramp
        hi = half_width + ramp
        margin = 0.05 * ramp
        fn = lambda v: _plateau(np.asarray(v), half_width, ramp)
        f = RealFunction.from_callable(fn, lo - margin, hi + margin, n,
                                       Tail.zero(), Tail.zero(), name=name)
        return WeightFunction(f, Interval(lo, hi), "compact", name=name)
    if name == "double-bump":
        separation = params.pop("separation", 6.0)
        width = params.pop("width", 1.0)
        _reject_extra(name, params)
        if separation <= 2.0 * width:
            raise ValueError("double-bump requires separation > 2*width")
        half_sep = separation / 2.0
        fn = lambda v: (_bump((np.asarray(v) + half_sep) / width)
                        + _bump((np.asarray(v) - half_sep) / width))
        lo = -half_sep - width
        hi = half_sep + width
        margin = 0.05 * width
        f = RealFunction.from_callable(fn, lo - margin, hi + margin, n,
                                       Tail.zero(), Tail.zero(), name=name)
        return WeightFunction(f, Interval(lo, hi), "compact", name=name)
    if name == "lorentzian-squared":
        width = params.pop("width", 1.0)
        _reject_extra(name, params)
        half = 50.0 * width
        fn = lambda v: 1.0 / (1.0 + (np.asarray(v) / width) ** 2) ** 2
        f = RealFunction.from_callable(fn, -half, half, n,
                                       Tail.power(4.0), Tail.power(4.0), name=name)
        return WeightFunction(f, Interval(-half, half), "power", name=name)
    raise ValueError(f"unknown catalog weight {name!r}; have {CATALOG_NAMES}")


def _reject_extra(name: str, params: dict) -> None:
    if params:
        raise ValueError(f"unknown parameters for {name!r}: {sorted(params)}")


def weight_from_csv(path, decay_class: str = "compact") -> WeightFunction:
    """Two-column (v, G) file; tails default to the declared decay class."""
    data = np.loadtxt(path, delimiter=",", comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("weight CSV must have two columns (v, G)")
    nodes, vals = data[:, 0], data[:, 1]
    tail = Tail.power(4.0) if decay_class == "power" else Tail.zero()
    f = RealFunction(nodes, vals, tail, tail, name=str(path))
    return WeightFunction(f, Interval(float(nodes[0]), float(nodes[-1])),
                          decay_class, name=str(path))
