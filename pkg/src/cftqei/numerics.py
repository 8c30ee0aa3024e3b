"""Shared numerical kernels.

Everything downstream (weight functionals, Schwarzian derivatives, circle
cocycles, stress profiles) reduces to a handful of operations on sampled
real functions: quadrature with controlled tails, high-order finite
differences, cumulative integrals, phase unwrapping and monotone root
finding.  They are collected here so all tolerances and grid conventions
live in one place.

Functions on the line are represented by :class:`RealFunction`: grid
samples plus a declared tail model on each side, and optionally an exact
evaluator.  Tail models are evaluated in closed form; integrals over
infinite intervals are never silently truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _sci_integrate
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

__all__ = [
    "ToleranceSet",
    "DEFAULT_TOL",
    "DEFAULT_GRID_NODES",
    "Interval",
    "Tail",
    "Grid",
    "RealFunction",
    "integrate",
    "differentiate",
    "cumulative_integral",
    "unwrap_phase",
    "find_root_monotone",
    "fd_weights",
]

DEFAULT_GRID_NODES = 4096


@dataclass(frozen=True)
class ToleranceSet:
    """Tolerances threaded through the numerical kernels.

    rel/abs control quadrature and root-finding targets; resolution guards
    interpolation-based operations.
    """

    rel: float = 1e-10
    abs: float = 1e-12
    resolution: float = 1e-8


DEFAULT_TOL = ToleranceSet()


@dataclass(frozen=True)
class Interval:
    """An interval of the extended real line, lo < hi (infinities allowed)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def measure(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


REAL_LINE = Interval(-math.inf, math.inf)


@dataclass(frozen=True)
class Tail:
    """Closed-form model of a function outside its sampled window.

    kind is one of "zero", "power" (|f| ~ coeff/|v|**exponent, coefficient
    matched at the window edge) or "affine" (slope*v + intercept).
    """

    kind: str
    exponent: float = math.nan
    slope: float = math.nan
    intercept: float = math.nan

    @staticmethod
    def zero() -> "Tail":
        return Tail("zero")

    @staticmethod
    def power(exponent: float) -> "Tail":
        return Tail("power", exponent=float(exponent))

    @staticmethod
    def affine(slope: float, intercept: float) -> "Tail":
        return Tail("affine", slope=float(slope), intercept=float(intercept))


def _as_array(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError("expected a 1-d array of samples")
    return a


@dataclass(frozen=True)
class Grid:
    """Strictly increasing nodes with per-node values and side tails."""

    nodes: np.ndarray
    values: np.ndarray
    left_tail: Tail = field(default_factory=Tail.zero)
    right_tail: Tail = field(default_factory=Tail.zero)

    def __post_init__(self):
        nodes = _as_array(self.nodes)
        values = np.asarray(self.values)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if nodes.size < 8:
            raise ValueError("grid needs at least 8 nodes")
        if values.shape != nodes.shape:
            raise ValueError("nodes and values must have matching shapes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def uniform(self) -> bool:
        d = np.diff(self.nodes)
        return bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0))

    @property
    def span(self) -> Interval:
        return Interval(float(self.nodes[0]), float(self.nodes[-1]))


class RealFunction:
    """A numerical function on the real line.

    Holds grid samples plus tail models, together with an optional exact
    evaluator used for off-node values (falling back to a cubic spline of
    the samples).  Instances are treated as immutable.
    """

    def __init__(
        self,
        nodes,
        values,
        left_tail: Tail | None = None,
        right_tail: Tail | None = None,
        exact: Callable[[np.ndarray], np.ndarray] | None = None,
        name: str = "",
        meta: dict | None = None,
    ):
        self.grid = Grid(
            _as_array(nodes),
            np.asarray(values, dtype=float),
            left_tail or Tail.zero(),
            right_tail or Tail.zero(),
        )
        self.exact = exact
        self.name = name
        self.meta = dict(meta or {})
        self._spline = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_callable(
        fn: Callable,
        lo: float,
        hi: float,
        n: int = DEFAULT_GRID_NODES,
        left_tail: Tail | None = None,
        right_tail: Tail | None = None,
        name: str = "",
    ) -> "RealFunction":
        nodes = np.linspace(lo, hi, n)
        values = np.asarray(fn(nodes), dtype=float)
        return RealFunction(nodes, values, left_tail, right_tail, exact=fn, name=name)

    @staticmethod
    def constant(value: float, lo: float = -1.0, hi: float = 1.0, n: int = 64) -> "RealFunction":
        tail_l = Tail.affine(0.0, value)
        tail_r = Tail.affine(0.0, value)
        return RealFunction.from_callable(
            lambda v: np.full_like(np.asarray(v, dtype=float), value),
            lo, hi, n, tail_l, tail_r, name=f"const({value})",
        )

    # -- evaluation --------------------------------------------------------

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    def _tail_value(self, v: np.ndarray, tail: Tail, edge: float, edge_value: float) -> np.ndarray:
        if tail.kind == "zero":
            return np.zeros_like(v)
        if tail.kind == "affine":
            return tail.slope * v + tail.intercept
        if tail.kind == "power":
            coeff = edge_value * abs(edge) ** tail.exponent
            return coeff / np.abs(v) ** tail.exponent
        raise ValueError(f"unknown tail kind {tail.kind!r}")

    def __call__(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        if self.exact is not None:
            out = np.asarray(self.exact(v), dtype=float)
        else:
            if self._spline is None:
                self._spline = CubicSpline(self.grid.nodes, self.grid.values)
            out = np.empty_like(v)
            lo, hi = self.grid.nodes[0], self.grid.nodes[-1]
            inside = (v >= lo) & (v <= hi)
            out[inside] = self._spline(v[inside])
            left = v < lo
            right = v > hi
            if left.any():
                out[left] = self._tail_value(
                    v[left], self.grid.left_tail, lo, float(self.grid.values[0]))
            if right.any():
                out[right] = self._tail_value(
                    v[right], self.grid.right_tail, hi, float(self.grid.values[-1]))
        return float(out[0]) if scalar else out

    def with_values(self, values, **overrides) -> "RealFunction":
        kw = dict(
            left_tail=self.grid.left_tail,
            right_tail=self.grid.right_tail,
            exact=None,
            name=self.name,
            meta=self.meta,
        )
        kw.update(overrides)
        return RealFunction(self.grid.nodes, values, **kw)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gauss_legendre(fn: Callable, lo: float, hi: float, panels: int) -> float:
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(fn(pts.ravel()), dtype=float).reshape(pts.shape)
    return float(np.sum(vals * _GL_WEIGHTS[None, :] * half[:, None]))


def _tail_integral(f: RealFunction, tail: Tail, edge: float, edge_value: float, side: int) -> float:
    """Closed-form integral of the declared tail from edge to +/-infinity."""
    if tail.kind == "zero":
        return 0.0
    if tail.kind == "power":
        p = tail.exponent
        if not p > 1.0:
            raise ValueError("divergent tail")
        coeff = edge_value * abs(edge) ** p
        return coeff * abs(edge) ** (1.0 - p) / (p - 1.0)
    if tail.kind == "affine":
        if tail.slope == 0.0 and tail.intercept == 0.0:
            return 0.0
        raise ValueError("divergent tail")
    raise ValueError(f"unknown tail kind {tail.kind!r}")


def integrate(f: RealFunction, iv: Interval = REAL_LINE, tol: ToleranceSet = DEFAULT_TOL) -> float:
    """Integrate f over iv, evaluating declared tails in closed form.

    Composite Simpson on the stored uniform grid, Gauss-Legendre panels when
    an exact evaluator is available or the requested interval does not line
    up with the grid.  Raises ValueError("divergent tail") when an infinite
    side has a non-integrable tail model.
    """
    g = f.grid
    window = g.span
    total = 0.0

    lo_inf = math.isinf(iv.lo)
    hi_inf = math.isinf(iv.hi)

    if lo_inf:
        total += _tail_integral(f, g.left_tail, window.lo, float(g.values[0]), -1)
        core_lo = window.lo
    else:
        core_lo = iv.lo
    if hi_inf:
        total += _tail_integral(f, g.right_tail, window.hi, float(g.values[-1]), +1)
        core_hi = window.hi
    else:
        core_hi = iv.hi

    # finite piece outside the sampled window uses the tail model too
    if core_lo < window.lo:
        tail = g.left_tail
        total += _gauss_legendre(
            lambda v: f._tail_value(np.asarray(v), tail, window.lo, float(g.values[0])),
            core_lo, min(core_hi, window.lo), 32)
        core_lo = window.lo
    if core_hi > window.hi:
        tail = g.right_tail
        total += _gauss_legendre(
            lambda v: f._tail_value(np.asarray(v), tail, window.hi, float(g.values[-1])),
            max(core_lo, window.hi), core_hi, 32)
        core_hi = window.hi

    if core_hi <= core_lo:
        return total

    if f.exact is not None:
        panels = max(64, g.nodes.size // 8)
        total += _gauss_legendre(f.exact, core_lo, core_hi, panels)
        return total

    on_grid = (
        abs(core_lo - window.lo) <= 1e-12 * max(1.0, abs(window.lo))
        and abs(core_hi - window.hi) <= 1e-12 * max(1.0, abs(window.hi))
    )
    if on_grid and g.uniform:
        total += float(_sci_integrate.simpson(g.values, x=g.nodes))
        return total

    spline = CubicSpline(g.nodes, g.values)
    total += float(spline.integrate(core_lo, core_hi))
    return total


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def fd_weights(offsets: Sequence[float], order: int) -> np.ndarray:
    """Finite-difference weights for the given derivative order at 0.

    Fornberg's recursion; offsets are node positions relative to the
    evaluation point (in units of the spacing).
    """
    x = np.asarray(offsets, dtype=float)
    n = x.size
    if order >= n:
        raise ValueError("need more nodes than the derivative order")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    x0 = 0.0
    for i in range(1, n):
        c2 = 1.0
        mn = min(i, order)
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - (x[i - 1] - x0) * c[i - 1, k]) / c2
                c[i, 0] = -c1 * (x[i - 1] - x0) * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = ((x[i] - x0) * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = (x[i] - x0) * c[j, 0] / c3
        c1 = c2
    return c[:, order]


# central stencil half-widths giving roughly 8th (orders 1, 2) and 6th
# (order 3) accuracy; boundary nodes fall back to one-sided stencils of
# the same width
_HALF_WIDTH = {1: 4, 2: 4, 3: 4}


def _derivative_samples(values: np.ndarray, h: float, order: int) -> np.ndarray:
    m = _HALF_WIDTH[order]
    npts = 2 * m + 1
    if values.size < npts:
        raise ValueError("grid too coarse for the derivative stencil")
    central = fd_weights(np.arange(-m, m + 1), order) / h**order
    out = np.convolve(values, central[::-1], mode="same")
    # boundary rows: one-sided stencils over the first/last npts nodes
    for i in range(m):
        w_l = fd_weights(np.arange(npts) - i, order) / h**order
        out[i] = w_l @ values[:npts]
        w_r = fd_weights(np.arange(-npts + 1 + i, i + 1), order) / h**order
        out[-(i + 1)] = w_r @ values[-npts:]
    return out


def _tail_derivative(tail: Tail, order: int) -> Tail:
    if tail.kind == "zero":
        return tail
    if tail.kind == "affine":
        if order == 1:
            return Tail.affine(0.0, tail.slope)
        return Tail.zero()
    if tail.kind == "power":
        return Tail.power(tail.exponent + order)
    raise ValueError(tail.kind)


def differentiate(f: RealFunction, order: int = 1, tol: ToleranceSet = DEFAULT_TOL) -> RealFunction:
    """Derivative of f sampled on the same grid.

    Uniform grids use high-order central stencils with one-sided stencils of
    matching width at the boundary nodes.  Raises when the grid is too
    coarse for the stencil.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    g = f.grid
    if not g.uniform:
        raise ValueError("differentiate requires a uniform grid; resample first")
    vals = _derivative_samples(g.values, g.spacing, order)
    return RealFunction(
        g.nodes, vals,
        _tail_derivative(g.left_tail, order),
        _tail_derivative(g.right_tail, order),
        name=f"d{order}({f.name})" if f.name else "",
    )


# ---------------------------------------------------------------------------
# cumulative integration
# ---------------------------------------------------------------------------

def cumulative_integral(f: RealFunction, base: float = 0.0) -> RealFunction:
    """Antiderivative F with F(base) = 0 and F' = f to quadrature accuracy.

    With an exact evaluator, per-cell Gauss-Legendre keeps the result at
    near machine accuracy; otherwise the cubic-spline antiderivative of the
    samples is used.
    """
    g = f.grid
    if not g.span.contains(base):
        raise ValueError("base point must lie inside the sampled window")
    if f.exact is not None:
        lo_edges = g.nodes[:-1]
        hi_edges = g.nodes[1:]
        mid = 0.5 * (lo_edges + hi_edges)
        half = 0.5 * (hi_edges - lo_edges)
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = np.asarray(f.exact(pts.ravel()), dtype=float).reshape(pts.shape)
        cell = np.sum(vals * _GL_WEIGHTS[None, :], axis=1) * half
        F = np.concatenate([[0.0], np.cumsum(cell)])
        spline = CubicSpline(g.nodes, F)
        F = F - float(spline(base))
    else:
        spline = CubicSpline(g.nodes, g.values).antiderivative()
        F = spline(g.nodes) - spline(base)

    # tails: f constant c outside the window integrates to an affine tail
    def _cumulative_tail(tail: Tail, edge_value_F: float, edge: float, side: int) -> Tail:
        if tail.kind == "zero":
            return Tail.affine(0.0, edge_value_F)
        if tail.kind == "affine" and tail.slope == 0.0:
            return Tail.affine(tail.intercept, edge_value_F - tail.intercept * edge)
        # anything else has no affine closed form; freeze the edge value
        return Tail.affine(0.0, edge_value_F)

    return RealFunction(
        g.nodes, F,
        _cumulative_tail(g.left_tail, float(F[0]), float(g.nodes[0]), -1),
        _cumulative_tail(g.right_tail, float(F[-1]), float(g.nodes[-1]), +1),
        name=f"int({f.name})" if f.name else "",
    )


# ---------------------------------------------------------------------------
# phase unwrapping and root finding
# ---------------------------------------------------------------------------

def unwrap_phase(samples) -> np.ndarray:
    """Continuous branch of arg along a complex sequence.

    The first value is the principal argument in (-pi, pi]; consecutive
    increments are principal-branch argument differences, which must stay
    below pi in magnitude.
    """
    z = np.asarray(samples, dtype=complex)
    if z.ndim != 1 or z.size < 1:
        raise ValueError("expected a 1-d complex sequence")
    if np.any(z == 0):
        raise ValueError("zero sample has no argument")
    steps = np.angle(z[1:] / z[:-1])
    if np.any(np.abs(steps) >= math.pi * (1.0 - 1e-12)):
        raise ValueError("undersampled phase")
    out = np.empty(z.size)
    out[0] = np.angle(z[0])
    out[1:] = out[0] + np.cumsum(steps)
    return out


def find_root_monotone(g: Callable[[float], float], bracket: Interval,
                       tol: ToleranceSet = DEFAULT_TOL) -> float:
    """Root of a continuous g changing sign over the bracket.

    Bisection/secant hybrid (Brent); the residual is driven below
    1e-12 times the bracket's value scale.
    """
    lo, hi = bracket.lo, bracket.hi
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("bracket must be finite")
    f_lo, f_hi = g(lo), g(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise ValueError("no sign change over the bracket")
    root = brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=300)
    return float(root)
