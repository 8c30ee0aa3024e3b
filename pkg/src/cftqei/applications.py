"""Derived bounds: worldlines, spacetime volumes, moving mirrors, and the
failure of unweighted averages.

Every bound here reduces to the one-dimensional square-root-derivative
functional after a change of variables:

  * along a curve, the weight seen by each mover is the original weight
    divided by the parameter density of the corresponding null coordinate;
  * for a spacetime-smeared tensor weight, each mover sees the null
    average of the corresponding (u,u) or (v,v) component;
  * in front of a moving boundary v = p(u), the two movers are the same
    field and their weights combine through p, picking up a Schwarzian
    radiation term.

The last section constructs states showing that *sharply cut off*
averages admit no lower bound at all: the half-line energy integral
scales linearly to minus infinity under dilations while the full-line
average stays nonnegative.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import (
    DEFAULT_GRID_NODES,
    DEFAULT_TOL,
    Interval,
    RealFunction,
    Tail,
    ToleranceSet,
    cumulative_integral,
    differentiate,
    find_root_monotone,
    integrate,
)
from .circle import LineReparam, MobiusElement, schwarzian
from .weights import WeightFunction, qei_functional, sqrt_weight_derivative, _bump
from .qei import EnergyProfile

__all__ = [
    "WorldlineCurve",
    "TensorWeight",
    "MirrorTrajectory",
    "worldline_bound",
    "null_averages",
    "worldvolume_bound",
    "mirror_vacuum_energy",
    "mirror_bound",
    "unweighted_demo",
    "UnweightedRow",
    "smoothed_halfline_bound",
    "anec_check",
    "catalog_curve",
    "catalog_tensor_weight",
    "catalog_mirror",
    "TENSOR_CATALOG_NAMES",
    "CURVE_CATALOG_NAMES",
    "MIRROR_CATALOG_NAMES",
    "bound_record",
]


# ---------------------------------------------------------------------------
# worldline averages
# ---------------------------------------------------------------------------

CURVE_KINDS = ("timelike", "spacelike", "null_left", "null_right", "static")


@dataclass
class WorldlineCurve:
    """Smooth curve sampled on a parameter grid, with null-coordinate data.

    u = x0 - x1 and v = x0 + x1 along the curve, together with their
    parameter derivatives.  For timelike (spacelike) kinds the parameter is
    proper time (distance) and both derivatives must stay away from zero by
    eps_min: the curve must not become null asymptotically.
    """

    lam: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    kind: str
    eps_min: float = 1e-3
    name: str = ""

    def __post_init__(self):
        for arr_name in ("lam", "u", "v", "du", "dv"):
            object.__setattr__(self, arr_name, np.asarray(getattr(self, arr_name), dtype=float))
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind in ("timelike", "spacelike", "static"):
            if min(np.min(np.abs(self.du)), np.min(np.abs(self.dv))) < self.eps_min:
                raise ValueError("asymptotically null curve: du, dv must stay away from zero")
            for arr in (self.u, self.v):
                d = np.diff(arr)
                if not (np.all(d > 0) or np.all(d < 0)):
                    raise ValueError("null coordinates must be strictly monotone along the curve")


def _reparametrized_weight(G: WeightFunction, lam: np.ndarray, coord: np.ndarray,
                           dcoord: np.ndarray, n: int = DEFAULT_GRID_NODES) -> WeightFunction:
    """Weight G(lambda(x)) |dx/dlambda| on a uniform grid in the coordinate x."""
    order = np.argsort(coord)
    x_sorted = coord[order]
    lam_sorted = lam[order]
    lam_of_x = CubicSpline(x_sorted, lam_sorted)
    speed_of_lam = CubicSpline(lam, np.abs(dcoord))

    lo = max(G.support.lo, float(lam[0]))
    hi = min(G.support.hi, float(lam[-1]))
    if hi <= lo:
        zero = RealFunction(np.linspace(-1, 1, 16), np.zeros(16))
        return WeightFunction(zero, Interval(-1.0, 1.0), "compact", name="empty")
    coord_spline = CubicSpline(lam, coord)
    x_edges = sorted((float(coord_spline(lo)), float(coord_spline(hi))))
    xs = np.linspace(x_edges[0], x_edges[1], n)
    lam_x = lam_of_x(xs)
    w = np.asarray(G.f(lam_x)) * np.asarray(speed_of_lam(lam_x))
    w = np.maximum(w, 0.0)
    f = RealFunction(xs, w, Tail.zero(), Tail.zero(), name=f"{G.name} along curve")
    return WeightFunction(f, Interval(x_edges[0], x_edges[1]), "compact",
                          name=f"{G.name} along curve")


def worldline_bound(curve: WorldlineCurve, G: WeightFunction,
                    c_L: float, c_R: float) -> float:
    """Optimal lower bound on the G-average of the contracted stress tensor
    along the curve.

    Null rays see a single mover and reduce exactly to the line bound; for
    timelike/spacelike/static curves each mover's weight is G rescaled by
    the parameter density of its null coordinate.
    """
    if curve.kind == "null_left":
        return qei_functional(G, c_R)
    if curve.kind == "null_right":
        return qei_functional(G, c_L)
    w_R = _reparametrized_weight(G, curve.lam, curve.u, curve.du)
    w_L = _reparametrized_weight(G, curve.lam, curve.v, curve.dv)
    term_R = qei_functional(w_R, c_R) if not w_R.trivial else 0.0
    term_L = qei_functional(w_L, c_L) if not w_L.trivial else 0.0
    return term_R + term_L


CURVE_CATALOG_NAMES = ("static", "boosted", "null-left", "null-right", "wiggly")


def catalog_curve(name: str, lam_lo: float = -20.0, lam_hi: float = 20.0,
                  n: int = 4096, **params) -> WorldlineCurve:
    lam = np.linspace(lam_lo, lam_hi, n)
    if name == "static":
        x1 = params.pop("x1", 0.0)
        _reject_extra(name, params)
        return WorldlineCurve(lam, lam - x1, lam + x1, np.ones(n), np.ones(n),
                              "static", name=name)
    if name == "boosted":
        rapidity = params.pop("rapidity", 0.5)
        _reject_extra(name, params)
        kappa = math.exp(rapidity)
        return WorldlineCurve(lam, kappa * lam, lam / kappa,
                              np.full(n, kappa), np.full(n, 1.0 / kappa),
                              "timelike", name=name)
    if name == "null-left":
        v0 = params.pop("v0", 0.0)
        _reject_extra(name, params)
        return WorldlineCurve(lam, lam, np.full(n, v0), np.ones(n), np.zeros(n),
                              "null_left", name=name)
    if name == "null-right":
        u0 = params.pop("u0", 0.0)
        _reject_extra(name, params)
        return WorldlineCurve(lam, np.full(n, u0), lam, np.zeros(n), np.ones(n),
                              "null_right", name=name)
    if name == "wiggly":
        amp = params.pop("amplitude", 0.4)
        width = params.pop("width", 3.0)
        _reject_extra(name, params)
        if not 0.0 <= amp < 0.9:
            raise ValueError("wiggly amplitude must be in [0, 0.9)")
        du = 1.0 + amp * _bump(lam / width)
        dv = 1.0 / du  # proper-time parametrization: du*dv = 1
        u = cumulative_integral(RealFunction(lam, du), base=lam[0])
        v = cumulative_integral(RealFunction(lam, dv), base=lam[0])
        return WorldlineCurve(lam, u.values + lam[0], v.values + lam[0], du, dv,
                              "timelike", name=name)
    raise ValueError(f"unknown catalog curve {name!r}; have {CURVE_CATALOG_NAMES}")


def curve_from_csv(path, kind: str, eps_min: float = 1e-3) -> WorldlineCurve:
    """Three-column (lambda, u, v) file; derivatives by finite differences."""
    data = np.loadtxt(path, delimiter=",", comments="#")
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError("curve CSV must have three columns (lambda, u, v)")
    lam, u, v = data.T
    du = differentiate(RealFunction(lam, u), 1).values
    dv = differentiate(RealFunction(lam, v), 1).values
    return WorldlineCurve(lam, u, v, du, dv, kind, eps_min=eps_min, name=str(path))


# ---------------------------------------------------------------------------
# worldvolume averages
# ---------------------------------------------------------------------------

COMPONENT_KEYS = ("00", "01", "10", "11")


class TensorWeight:
    """Smearing tensor f^{mu nu}(x0, x1) with rapidly decaying components.

    Components are callables of inertial coordinates (catalog entries are
    closed forms; CSV loads interpolate a rectangular grid).  The support
    box in null coordinates (u = x0 - x1, v = x0 + x1) bounds the region
    where anything is nonzero and sets the quadrature windows for the null
    averages.
    """

    def __init__(self, components: dict[str, Callable], u_window: Interval,
                 v_window: Interval, name: str = ""):
        for key in components:
            if key not in COMPONENT_KEYS:
                raise ValueError(f"unknown component {key!r}")
        self.components = dict(components)
        self.u_window = u_window
        self.v_window = v_window
        self.name = name

    def component(self, key: str, x0, x1) -> np.ndarray:
        fn = self.components.get(key)
        if fn is None:
            return np.zeros(np.broadcast(np.asarray(x0), np.asarray(x1)).shape)
        return np.asarray(fn(np.asarray(x0, dtype=float), np.asarray(x1, dtype=float)))

    def _null_component(self, signs: tuple[float, float], u, v) -> np.ndarray:
        # f^{uu} = f00 + f11 - f01 - f10 ; f^{vv} = f00 + f11 + f01 + f10
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        x0 = 0.5 * (u + v)
        x1 = 0.5 * (v - u)
        s01, s10 = signs
        return (self.component("00", x0, x1) + self.component("11", x0, x1)
                + s01 * self.component("01", x0, x1) + s10 * self.component("10", x0, x1))

    def f_uu(self, u, v) -> np.ndarray:
        return self._null_component((-1.0, -1.0), u, v)

    def f_vv(self, u, v) -> np.ndarray:
        return self._null_component((+1.0, +1.0), u, v)

    def scaled_x1(self, s: float) -> "TensorWeight":
        """Stretch the spatial argument: components become f(x0, x1/s)."""
        if s <= 0:
            raise ValueError("stretch factor must be positive")
        comps = {k: (lambda x0, x1, fn=fn: fn(x0, x1 / s))
                 for k, fn in self.components.items()}
        # u,v windows transform through x1 -> s*x1
        span0 = Interval((self.u_window.lo + self.v_window.lo) / 2.0,
                         (self.u_window.hi + self.v_window.hi) / 2.0)
        span1 = Interval((self.v_window.lo - self.u_window.hi) / 2.0,
                         (self.v_window.hi - self.u_window.lo) / 2.0)
        uw = Interval(span0.lo - s * span1.hi, span0.hi - s * span1.lo)
        vw = Interval(span0.lo + s * span1.lo, span0.hi + s * span1.hi)
        return TensorWeight(comps, uw, vw, name=f"{self.name}|x1/{s:g}")


_GL64_NODES, _GL64_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _line_average(fw: TensorWeight, along: str, n: int = 2048,
                  panels: int = 24) -> RealFunction:
    """Quadrature of the appropriate null component along lines of constant
    u (for the right average) or constant v (for the left average).

    The result carries an exact evaluator that redoes the quadrature at
    arbitrary points, so downstream resampling does not lose the edge
    behaviour of compactly supported components.
    """
    if along == "u":
        outer, inner = fw.u_window, fw.v_window
    else:
        outer, inner = fw.v_window, fw.u_window
    edges = np.linspace(inner.lo, inner.hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * _GL64_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL64_WEIGHTS[None, :]).ravel()

    def evaluator(xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        X, Y = np.meshgrid(xs, pts, indexing="ij")
        vals = fw.f_uu(X, Y) if along == "u" else fw.f_vv(Y, X)
        return vals @ wts

    xs = np.linspace(outer.lo, outer.hi, n)
    return RealFunction(xs, evaluator(xs), Tail.zero(), Tail.zero(),
                        exact=evaluator, name=f"null average over {along}")


def null_averages(fw: TensorWeight) -> tuple[RealFunction, RealFunction]:
    """(F_L, F_R): left average over u at fixed v, right average over v at
    fixed u, of the respective null-null components."""
    F_R = _line_average(fw, "u")
    F_L = _line_average(fw, "v")
    return F_L, F_R


def _average_weight(F: RealFunction, label: str) -> WeightFunction:
    vals = np.maximum(F.values, 0.0)
    f = RealFunction(F.nodes, vals, Tail.zero(), Tail.zero(), name=label)
    return WeightFunction(f, f.grid.span, "compact", name=label)


def worldvolume_bound(fw: TensorWeight, c_L: float, c_R: float,
                      negativity_tol: float = 1e-12) -> float:
    """Optimal lower bound on the spacetime average against f^{mu nu},
    valid when both null averages are nonnegative."""
    F_L, F_R = null_averages(fw)
    for F in (F_L, F_R):
        peak = max(float(np.max(np.abs(F.values))), 1e-300)
        if float(np.min(F.values)) < -negativity_tol * peak:
            raise ValueError("hypothesis violated: null averages must be nonnegative")
    term_L = qei_functional(_average_weight(F_L, "left null average"), c_L)
    term_R = qei_functional(_average_weight(F_R, "right null average"), c_R)
    return term_L + term_R


TENSOR_CATALOG_NAMES = ("separable-gaussian", "null-split-bumps", "boost-blob")


def _gauss2(u0: float, v0: float, wu: float, wv: float) -> Callable:
    def f(x0, x1):
        u = x0 - x1
        v = x0 + x1
        return np.exp(-(((u - u0) / wu) ** 2) - (((v - v0) / wv) ** 2))
    return f


def catalog_tensor_weight(name: str, **params) -> TensorWeight:
    """Named tensor weights.

    All entries keep the two null projections disjoint (the left average
    supported at positive v, the right average at negative u), so that
    boundary-theory bounds match full-plane bounds on locality grounds.
    """
    if name == "separable-gaussian":
        u0 = params.pop("u0", -6.0)
        v0 = params.pop("v0", 6.0)
        w = params.pop("width", 0.8)
        _reject_extra(name, params)
        half = 6.5 * w
        comps = {"00": _gauss2(u0, v0, w, w)}
        return TensorWeight(comps, Interval(u0 - half, u0 + half),
                            Interval(v0 - half, v0 + half), name=name)
    if name == "null-split-bumps":
        u0 = params.pop("u0", -5.0)
        v0 = params.pop("v0", 5.0)
        w = params.pop("width", 1.2)
        _reject_extra(name, params)

        def f00(x0, x1):
            u = x0 - x1
            v = x0 + x1
            return _bump((u - u0) / w) * _bump((v - v0) / w)

        return TensorWeight({"00": f00}, Interval(u0 - w, u0 + w),
                            Interval(v0 - w, v0 + w), name=name)
    if name == "boost-blob":
        u0 = params.pop("u0", -6.0)
        v0 = params.pop("v0", 6.0)
        w = params.pop("width", 0.9)
        beta = params.pop("beta", 0.3)
        _reject_extra(name, params)
        if not -1.0 < beta < 1.0:
            raise ValueError("boost parameter must lie in (-1, 1)")
        base = _gauss2(u0, v0, w, w)
        comps = {
            "00": base,
            "01": lambda x0, x1: beta * base(x0, x1),
            "10": lambda x0, x1: beta * base(x0, x1),
            "11": lambda x0, x1: beta**2 * base(x0, x1),
        }
        half = 6.5 * w
        return TensorWeight(comps, Interval(u0 - half, u0 + half),
                            Interval(v0 - half, v0 + half), name=name)
    raise ValueError(f"unknown catalog tensor weight {name!r}; have {TENSOR_CATALOG_NAMES}")


def tensor_from_csv(path, name: str = "") -> TensorWeight:
    """Gridded tensor weight: columns x0, x1, f00, f01, f10, f11."""
    from scipy.interpolate import RegularGridInterpolator

    data = np.loadtxt(path, delimiter=",", comments="#")
    if data.ndim != 2 or data.shape[1] != 6:
        raise ValueError("tensor CSV must have six columns (x0, x1, f00, f01, f10, f11)")
    x0 = np.unique(data[:, 0])
    x1 = np.unique(data[:, 1])
    if x0.size * x1.size != data.shape[0]:
        raise ValueError("tensor CSV must be a complete rectangular grid")
    comps = {}
    for idx, key in enumerate(COMPONENT_KEYS):
        grid = data[:, 2 + idx].reshape(x0.size, x1.size)
        if np.any(grid != 0.0):
            interp = RegularGridInterpolator((x0, x1), grid, bounds_error=False,
                                             fill_value=0.0)
            comps[key] = (lambda a, b, it=interp:
                          it(np.stack(np.broadcast_arrays(a, b), axis=-1)))
    uw = Interval(float(x0[0] - x1[-1]), float(x0[-1] - x1[0]))
    vw = Interval(float(x0[0] + x1[0]), float(x0[-1] + x1[-1]))
    return TensorWeight(comps, uw, vw, name=name or str(path))


# ---------------------------------------------------------------------------
# moving mirrors
# ---------------------------------------------------------------------------

MIRROR_CATALOG_NAMES = ("static", "mobius", "pulse")


@dataclass
class MirrorTrajectory:
    """Boundary trajectory v = p(u), strictly increasing, Moebius outside a
    compact window so that it lifts to a circle diffeomorphism."""

    reparam: LineReparam
    name: str = ""

    def __call__(self, u):
        return self.reparam(u)

    @property
    def window(self) -> Interval:
        return self.reparam.window

    def prime(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        out = np.empty_like(u)
        inside = (u >= self.window.lo) & (u <= self.window.hi)
        if inside.any():
            g = self.reparam.func
            if not hasattr(self, "_prime_spline"):
                dp = differentiate(g, 1)
                self._prime_spline = CubicSpline(dp.nodes, dp.values)
            out[inside] = self._prime_spline(u[inside])
        out[~inside] = self.reparam.tail.derivative(u[~inside])
        return float(out[0]) if scalar else out

    def inverse(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        g = self.reparam.func
        if not hasattr(self, "_inverse_spline"):
            self._inverse_spline = CubicSpline(g.values, g.nodes)
        lo_v = float(g.values[0])
        hi_v = float(g.values[-1])
        out = np.empty_like(v)
        inside = (v >= lo_v) & (v <= hi_v)
        out[inside] = self._inverse_spline(v[inside])
        tail_inv = self.reparam.tail.inverse()
        out[~inside] = tail_inv(v[~inside])
        return float(out[0]) if scalar else out


def catalog_mirror(name: str, n: int = 2048, **params) -> MirrorTrajectory:
    if name == "static":
        _reject_extra(name, params)
        return MirrorTrajectory(LineReparam.identity(Interval(-1.0, 1.0), 256), name=name)
    if name == "mobius":
        a = params.pop("a", 1.0)
        b = params.pop("b", 0.0)
        c = params.pop("c", 0.0)
        d = params.pop("d", 1.0)
        _reject_extra(name, params)
        m = MobiusElement(a, b, c, d)
        window = Interval(-1.0, 1.0)
        if m.c != 0.0:
            pole = -m.d / m.c
            if window.contains(pole) or abs(pole) < 2.0:
                raise ValueError("mobius mirror pole too close to the sampling window")
        return MirrorTrajectory(LineReparam.from_mobius(m, window, 512), name=name)
    if name == "pulse":
        amp = params.pop("amplitude", 0.5)
        width = params.pop("width", 0.45)
        sep = params.pop("separation", 0.45)
        _reject_extra(name, params)
        if not 0.0 < amp < 1.0:
            raise ValueError("pulse amplitude must be in (0, 1)")

        def slope_dev(u):  # integrates to zero, so both tails are the identity
            u = np.asarray(u, dtype=float)
            return amp * (_bump((u + sep) / width) - _bump((u - sep) / width))

        lo = -sep - width - 0.05
        hi = sep + width + 0.05
        dev = RealFunction.from_callable(slope_dev, lo, hi, n)
        p = cumulative_integral(dev, base=lo)
        vals = p.values + dev.nodes
        f = RealFunction(dev.nodes, vals, name="pulse mirror")
        return MirrorTrajectory(LineReparam(f, Interval(lo, hi), MobiusElement.identity()),
                                name=name)
    raise ValueError(f"unknown catalog mirror {name!r}; have {MIRROR_CATALOG_NAMES}")


def mirror_from_csv(path) -> MirrorTrajectory:
    """Two-column (u, p) file; tails default to the identity."""
    data = np.loadtxt(path, delimiter=",", comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("mirror CSV must have two columns (u, p)")
    f = RealFunction(data[:, 0], data[:, 1], name=str(path))
    window = Interval(float(data[0, 0]), float(data[-1, 0]))
    return MirrorTrajectory(LineReparam(f, window, MobiusElement.identity()),
                            name=str(path))


def mirror_vacuum_energy(p: MirrorTrajectory, c: float) -> RealFunction:
    """Energy density radiated by the boundary in the vacuum state, as a
    function of u: a pure Schwarzian of the trajectory (zero for inertial
    and Moebius trajectories)."""
    if c <= 0:
        raise ValueError("central charge must be positive")
    sch = schwarzian(p.reparam)
    out = sch.with_values(-(c / (24.0 * math.pi)) * sch.values)
    out.meta.update(sch.meta)
    out.name = "mirror vacuum energy"
    return out


def mirror_bound(fw: TensorWeight, p: MirrorTrajectory, c: float,
                 n: int = DEFAULT_GRID_NODES) -> float:
    """Lower bound for spacetime averages in front of the boundary v = p(u).

    The two movers combine into a single weight
    G(v) = F_L(v) + p'(p^{-1}(v)) F_R(p^{-1}(v)); the trajectory's
    Schwarzian enters through the radiation term.
    """
    if c <= 0:
        raise ValueError("central charge must be positive")
    if not float(fw.v_window.lo) > float(p(fw.u_window.hi)):
        raise ValueError("tensor weight support must lie in v > p(u)")
    F_L, F_R = null_averages(fw)

    # combined weight on the v side; the grid keeps the spacing of the
    # null-average grids so edge features stay equally resolved
    u_img = np.sort(np.asarray(p(F_R.nodes)))
    lo = min(float(F_L.nodes[0]), float(u_img[0]))
    hi = max(float(F_L.nodes[-1]), float(u_img[-1]))
    h_avg = float(F_L.nodes[1] - F_L.nodes[0])
    n = max(n, int(math.ceil((hi - lo) / h_avg)) + 1)
    vs = np.linspace(lo, hi, n)
    u_back = p.inverse(vs)
    mapped = np.maximum(np.asarray(F_R(u_back)), 0.0) * np.asarray(p.prime(u_back))
    combined = np.maximum(np.asarray(F_L(vs)), 0.0) + mapped
    if float(np.min(combined)) < 0.0:
        raise ValueError("combined weight must be nonnegative")
    G = WeightFunction(RealFunction(vs, combined), Interval(lo, hi), "compact",
                       name="mirror combined weight")
    term_weight = qei_functional(G, c)

    # radiation term: -(c/24 pi) integral {p,u} F_R du over the overlap
    sch = schwarzian(p.reparam)
    fr_at = np.asarray(F_R(sch.nodes))
    radiation = -(c / (24.0 * math.pi)) * integrate(sch.with_values(sch.values * fr_at))
    return term_weight + radiation


# ---------------------------------------------------------------------------
# unweighted (sharp cut-off) averages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnweightedRow:
    lam: float
    half_line: float
    full_line: float


@dataclass(frozen=True)
class UnweightedDemoResult:
    rows: list[UnweightedRow]
    checks: dict
    reparam: LineReparam
    profile_scale: float


def _build_cutoff_state_map(dip_amplitude: float, n: int = 16384):
    """Construct the base reparametrisation V of the sharp-cutoff family.

    V' = W^-2 with W smooth, identically 1 outside (-1, 1), concave and
    nonincreasing on (-1, 0) with curvature in [-1, 0].  The curvature
    profile is a fixed dip on (-1, 0) plus recovery bumps on (0, 1); two
    bump amplitudes are fixed by the closure conditions W(1) = 1,
    W'(1) = 0, and one overshoot amplitude is tuned by root finding so
    that f = W^-2 - 1 integrates to zero (making V agree with the identity
    on both tails).
    """
    if not 0.0 < dip_amplitude <= 1.0:
        raise ValueError("dip amplitude must be in (0, 1]")
    nodes = np.linspace(-1.0, 1.0, n)

    dip = lambda x: _bump((np.asarray(x) + 0.5) / 0.38)
    rec1 = lambda x: _bump((np.asarray(x) - 0.22) / 0.16)
    rec2 = lambda x: _bump((np.asarray(x) - 0.55) / 0.16)
    over = lambda x: _bump((np.asarray(x) - 0.82) / 0.14)

    def moments(shape) -> tuple[float, float]:
        vals = shape(nodes)
        m0 = float(np.trapezoid(vals, nodes))
        m1 = float(np.trapezoid(nodes * vals, nodes))
        return m0, m1

    m_dip = moments(dip)
    m_r1 = moments(rec1)
    m_r2 = moments(rec2)
    m_over = moments(over)
    A = dip_amplitude / float(np.max(dip(nodes)))  # curvature >= -dip_amplitude

    def curvature_for(B: float) -> np.ndarray:
        rhs0 = A * m_dip[0] - B * m_over[0]
        rhs1 = A * m_dip[1] - B * m_over[1]
        det = m_r1[0] * m_r2[1] - m_r2[0] * m_r1[1]
        mu1 = (rhs0 * m_r2[1] - m_r2[0] * rhs1) / det
        mu2 = (m_r1[0] * rhs1 - rhs0 * m_r1[1]) / det
        return (-A * dip(nodes) + mu1 * rec1(nodes) + mu2 * rec2(nodes)
                + B * over(nodes))

    def w_values(B: float) -> np.ndarray:
        q = RealFunction(nodes, curvature_for(B))
        wp = cumulative_integral(q, base=-1.0)
        w = cumulative_integral(RealFunction(nodes, wp.values), base=-1.0)
        return 1.0 + w.values

    def residual(B: float) -> float:
        w = w_values(B)
        return float(np.trapezoid(w**-2 - 1.0, nodes))

    hi = 1.0
    for _ in range(20):
        if residual(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise ValueError("could not bracket the overshoot amplitude")
    B = find_root_monotone(residual, Interval(0.0, hi))

    w = w_values(B)
    q = curvature_for(B)
    f_vals = w**-2 - 1.0
    checks = {
        "w_positive": bool(np.all(w > 0.0)),
        "f_at_least_minus_one": bool(np.all(f_vals >= -1.0)),
        "f_integral": float(np.trapezoid(f_vals, nodes)),
        "curvature_range_ok": bool(
            np.all(q[nodes <= 0.0] <= 1e-12) and np.all(q[nodes <= 0.0] >= -1.0 - 1e-12)),
        "f_nontrivial_left": bool(np.max(np.abs(f_vals[nodes < 0.0])) > 1e-6),
        "tails_identity": bool(abs(w[0] - 1.0) < 1e-12 and abs(w[-1] - 1.0) < 1e-10
                               and abs(f_vals[-1]) < 1e-10),
    }
    for key, ok in checks.items():
        if isinstance(ok, bool) and not ok:
            raise ValueError(f"cutoff-state construction violated hypothesis: {key}")
    if abs(checks["f_integral"]) > 1e-9:
        raise ValueError("cutoff-state construction violated hypothesis: f_integral")

    margin = 0.02
    grid = np.linspace(-1.0 - margin, 1.0 + margin, n)
    f_spline = CubicSpline(nodes, f_vals)

    def f_anywhere(v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        inside = (v > -1.0) & (v < 1.0)
        out[inside] = f_spline(v[inside])
        return out

    F = cumulative_integral(RealFunction.from_callable(f_anywhere, grid[0], grid[-1], n),
                            base=-1.0)
    V = RealFunction(grid, grid + F.values, name="cutoff family map")
    reparam = LineReparam(V, Interval(grid[0], grid[-1]), MobiusElement.identity())

    # the map was built from its curvature profile, so the Schwarzian is
    # available in closed form: {V, v} = -2 W''/W with W = 1/sqrt(V')
    w_spline = CubicSpline(nodes, w)
    q_spline = CubicSpline(nodes, q)

    def exact_schwarzian(v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        out = np.zeros_like(v)
        inside = (v > -1.0) & (v < 1.0)
        out[inside] = -2.0 * q_spline(v[inside]) / w_spline(v[inside])
        return out

    extras = {"nodes": nodes, "w": w, "q": q, "schwarzian": exact_schwarzian}
    return reparam, checks, extras


def unweighted_demo(lam_list: Sequence[float], c: float,
                    dip_amplitude: float = 0.6) -> UnweightedDemoResult:
    """Exhibit the divergence of sharply cut-off energy averages.

    Builds the base state profile T = -(c/24 pi) {V, v} (nonpositive left
    of the origin, strictly so on part of it, positive somewhere to the
    right) and dilates it; the half-line integral over (-inf, 0] scales
    linearly in the dilation and is negative, while the full-line average
    stays nonnegative, so no state-independent bound survives the sharp
    cutoff.
    """
    if c <= 0:
        raise ValueError("central charge must be positive")
    lam_arr = [float(x) for x in lam_list]
    if not lam_arr or any(x <= 0 for x in lam_arr):
        raise ValueError("dilation list must be nonempty and positive")
    reparam, checks, extras = _build_cutoff_state_map(dip_amplitude)

    nodes = extras["nodes"]
    w, q = extras["w"], extras["q"]
    sch_exact = extras["schwarzian"]
    sch_nodes = -2.0 * q / w

    # balance identity: {V,v}/sqrt(V') = -2 W'' integrates to zero over the
    # line because W' returns to zero on both sides
    checks["schwarzian_sqrt_balance"] = float(np.trapezoid(-2.0 * q, nodes))
    left = sch_nodes[nodes < 0.0]
    right = sch_nodes[nodes > 0.0]
    checks["schwarzian_positive_left"] = bool(np.max(left) > 1e-8)
    checks["schwarzian_negative_right"] = bool(np.min(right) < -1e-8)
    checks["schwarzian_nonneg_left"] = bool(np.min(left) > -1e-12)

    # cross-validate the closed-form Schwarzian against the generic
    # finite-difference route on a moderate grid (interior nodes; the
    # comparison is relative to the profile's scale)
    coarse = RealFunction.from_callable(lambda v: reparam(v), -1.02, 1.02, 2048)
    fd = schwarzian(coarse)
    interior = slice(16, -16)
    fd_diff = float(np.max(np.abs(fd.values[interior] - sch_exact(fd.nodes[interior]))))
    sch_scale = float(np.max(np.abs(sch_nodes)))
    checks["fd_cross_check"] = fd_diff
    if fd_diff > 1e-4 * max(1.0, sch_scale):
        raise ValueError("cutoff-state construction violated hypothesis: fd_cross_check")

    factor = -c / (24.0 * math.pi)
    rows = []
    for lam in lam_arr:
        scaled_nodes = np.linspace(-1.0, 1.0, nodes.size) / lam
        vals = lam**2 * sch_exact(lam * scaled_nodes)
        sch_l = RealFunction(scaled_nodes, vals)
        half = factor * integrate(sch_l, Interval(-math.inf, 0.0))
        full = factor * integrate(sch_l)
        rows.append(UnweightedRow(lam, half, full))
    scale = rows[0].half_line / rows[0].lam
    return UnweightedDemoResult(rows, checks, reparam, scale)


def smoothed_halfline_bound(G: WeightFunction, c: float,
                            tol: ToleranceSet = DEFAULT_TOL) -> float:
    """Bound for averaging over the half line with a smoothly rounded end.

    The weight must equal 1 in a neighbourhood of the origin; only the
    rounding at positive v contributes, so widening the plateau leftwards
    leaves the bound unchanged.
    """
    if c <= 0:
        raise ValueError("central charge must be positive")
    if abs(float(G(0.0)) - 1.0) > 1e-10:
        raise ValueError("must equal unity near origin")
    if G.decay_class != "compact":
        raise ValueError("smoothed half-line averaging needs a compact weight")
    phi = sqrt_weight_derivative(G)
    phi2 = phi.phi.with_values(phi.phi.values**2)
    return -(c / (12.0 * math.pi)) * integrate(phi2, Interval(0.0, math.inf), tol=tol)


def anec_check(profile: EnergyProfile, tol: ToleranceSet = DEFAULT_TOL) -> float:
    """Full-line average of the profile; nonnegative for states reached from
    the vacuum by diffeomorphism unitaries (it is a translation-generator
    expectation value)."""
    return profile.total_integral(tol)


# ---------------------------------------------------------------------------
# record emission
# ---------------------------------------------------------------------------

def bound_record(kind: str, inputs: dict, bound: float, components: dict,
                 hypothesis_flags: dict) -> dict:
    """JSON-ready record with a content hash of the inputs."""
    canonical = json.dumps({"kind": kind, "inputs": inputs}, sort_keys=True,
                           default=float)
    digest = hashlib.sha256(canonical.encode()).hexdigest()[:16]
    return {
        "kind": kind,
        "inputs_hash": digest,
        "inputs": inputs,
        "bound": bound,
        "components": components,
        "hypothesis_flags": hypothesis_flags,
    }


def _reject_extra(name: str, params: dict) -> None:
    if params:
        raise ValueError(f"unknown parameters for {name!r}: {sorted(params)}")
