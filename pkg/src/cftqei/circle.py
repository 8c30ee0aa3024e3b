"""Orientation-preserving circle diffeomorphisms and their cocycles.

A group element is stored as a lift rho of the unit circle's universal
cover: rho(theta + 2*pi) = rho(theta) + 2*pi, kept as the periodic part
rho(theta) - theta on a uniform theta grid plus an integer winding offset
tracking the central elements (full 2*pi rotations).  Smooth periodic data
makes every derivative and off-node evaluation spectrally accurate, which
the cocycle quadratures and Schwarzian derivatives rely on.

The light-ray picture is reached through the Cayley map
z(v) = (1 + i v)/(1 - i v); reparametrisations of the line that agree with
a Moebius transformation outside a compact set lift to circle
diffeomorphisms, and their Schwarzian derivatives drive the energy bounds
in the rest of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import (
    DEFAULT_TOL,
    Interval,
    RealFunction,
    Tail,
    ToleranceSet,
    unwrap_phase,
)

__all__ = [
    "DEFAULT_CIRCLE_NODES",
    "MobiusElement",
    "CircleDiffeo",
    "CircleFunction",
    "LineReparam",
    "identity_diffeo",
    "subgroup_element",
    "compose",
    "invert",
    "cayley",
    "inverse_cayley",
    "lift_line_reparam",
    "schwarzian",
    "bott_cocycle",
    "virasoro_cocycle",
    "reality_conjugate",
    "diffeo_from_field",
    "field_theta_component",
    "random_diffeo",
]

DEFAULT_CIRCLE_NODES = 2048
TWO_PI = 2.0 * math.pi


def theta_grid(n: int = DEFAULT_CIRCLE_NODES) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


# ---------------------------------------------------------------------------
# spectral helpers on periodic samples
# ---------------------------------------------------------------------------

def _spectral_derivative(values: np.ndarray, order: int = 1,
                         noise_floor: float = 0.0) -> np.ndarray:
    """d^order/dtheta^order of periodic samples via the FFT.

    A nonzero noise_floor zeroes Fourier modes below that relative
    magnitude before differentiating; high derivatives amplify mode-k
    rounding noise by k**order, so smooth data (exponentially decaying
    spectra) should be filtered.
    """
    n = values.size
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0  # Nyquist mode has no well-defined odd derivative
    coeff = np.fft.fft(values)
    if noise_floor > 0.0:
        scale = np.max(np.abs(coeff))
        if scale > 0.0:
            coeff = np.where(np.abs(coeff) >= noise_floor * scale, coeff, 0.0)
    out = np.fft.ifft(mult * coeff)
    if np.isrealobj(values):
        return out.real
    return out


_DIFFEO_NOISE_FLOOR = 3e-16  # diffeo data is smooth; kill rounding-only modes


def _trig_eval(values: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation of real periodic samples at theta."""
    n = values.size
    coeff = np.fft.rfft(values)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.empty(theta.shape)
    k = np.arange(1, n // 2)
    for start in range(0, theta.size, 4096):
        sl = slice(start, start + 4096)
        phases = np.exp(1j * np.outer(theta[sl], k))
        out[sl] = (
            coeff[0].real / n
            + (2.0 / n) * (phases @ coeff[1:n // 2]).real
            + (coeff[n // 2].real / n) * np.cos((n // 2) * theta[sl])
        )
    return out


def _resolution_defect(values: np.ndarray) -> float:
    """Relative weight of the top frequency band; large means undersampled."""
    coeff = np.abs(np.fft.rfft(values))
    scale = coeff.max()
    if scale == 0.0:
        return 0.0
    band = coeff[-max(2, coeff.size // 16):]
    return float(band.max() / scale)


# ---------------------------------------------------------------------------
# Moebius elements in the light-ray picture
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MobiusElement:
    """u -> (a u + b)/(c u + d) with a d - b c = 1, identified with its negation."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det <= 0:
            raise ValueError("Moebius element must be orientation preserving (det > 0)")
        s = 1.0 / math.sqrt(det)
        a, b, c, d = self.a * s, self.b * s, self.c * s, self.d * s
        # canonical sign for the +/- identification
        lead = next((x for x in (a, b, c, d) if x != 0.0), 1.0)
        if lead < 0:
            a, b, c, d = -a, -b, -c, -d
        for name, val in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, float(val))
        if abs(self.a * self.d - self.b * self.c - 1.0) > 1e-13:
            raise ValueError("Moebius normalization failed")

    @staticmethod
    def identity() -> "MobiusElement":
        return MobiusElement(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def translation(s: float) -> "MobiusElement":
        return MobiusElement(1.0, s, 0.0, 1.0)

    @staticmethod
    def dilation(lam: float) -> "MobiusElement":
        if lam <= 0:
            raise ValueError("dilation parameter must be positive")
        return MobiusElement(math.sqrt(lam), 0.0, 0.0, 1.0 / math.sqrt(lam))

    @staticmethod
    def special_conformal(s: float) -> "MobiusElement":
        return MobiusElement(1.0, 0.0, -s, 1.0)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        den = self.c * u + self.d
        with np.errstate(divide="ignore"):
            out = (self.a * u + self.b) / den
        return out if out.ndim else float(out)

    def __matmul__(self, other: "MobiusElement") -> "MobiusElement":
        return MobiusElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusElement":
        return MobiusElement(self.d, -self.b, -self.c, self.a)

    @property
    def fixes_infinity(self) -> bool:
        return self.c == 0.0

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        out = 1.0 / (self.c * u + self.d) ** 2
        return out if out.ndim else float(out)

    def su11(self) -> tuple[complex, complex]:
        """Circle form z -> (alpha z + beta)/(conj(beta) z + conj(alpha))."""
        alpha = complex((self.a + self.d) / 2.0, (self.b - self.c) / 2.0)
        beta = complex((self.d - self.a) / 2.0, (self.b + self.c) / 2.0)
        return alpha, beta

    def circle_map(self, z: np.ndarray) -> np.ndarray:
        alpha, beta = self.su11()
        return (alpha * z + beta) / (np.conj(beta) * z + np.conj(alpha))

    def is_close(self, other: "MobiusElement", tol: float = 1e-12) -> bool:
        return max(abs(self.a - other.a), abs(self.b - other.b),
                   abs(self.c - other.c), abs(self.d - other.d)) < tol


# ---------------------------------------------------------------------------
# Cayley transform
# ---------------------------------------------------------------------------

def cayley(v):
    """Light-ray coordinate to unit circle, z = (1 + i v)/(1 - i v)."""
    v = np.asarray(v, dtype=float)
    out = (1.0 + 1j * v) / (1.0 - 1j * v)
    return out if out.ndim else complex(out)


def inverse_cayley(z):
    """Unit circle back to the light ray; z = -1 is the point at infinity."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z + 1.0) < 1e-15):
        raise ValueError("point at infinity")
    out = (1j * (1.0 - z) / (1.0 + z)).real
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# the group elements
# ---------------------------------------------------------------------------

class CircleDiffeo:
    """Lift of an orientation-preserving circle diffeomorphism.

    rho(theta) = theta + periodic(theta) + 2*pi*winding, with the periodic
    part sampled on a uniform grid and the winding offset tracking central
    elements.  The canonical form keeps periodic(0) in (-pi, pi].
    """

    def __init__(self, periodic, winding: int = 0, tol: ToleranceSet = DEFAULT_TOL):
        periodic = np.asarray(periodic, dtype=float)
        if periodic.ndim != 1 or periodic.size < 16:
            raise ValueError("periodic part must be a 1-d array of at least 16 samples")
        shift = math.floor((periodic[0] + math.pi) / TWO_PI)
        periodic = periodic - TWO_PI * shift
        self.periodic = periodic
        self.winding = int(winding) + shift
        self.n = periodic.size
        self.theta = theta_grid(self.n)
        self._dperiodic = _spectral_derivative(periodic, 1, _DIFFEO_NOISE_FLOOR)
        if np.min(self.prime_values()) <= 0.0:
            raise ValueError("not a diffeomorphism: rho' must be positive")
        self.tol = tol

    # -- sampled data -------------------------------------------------------

    def rho_values(self) -> np.ndarray:
        return self.theta + self.periodic + TWO_PI * self.winding

    def prime_values(self) -> np.ndarray:
        return 1.0 + self._dperiodic

    def derivative_values(self, order: int) -> np.ndarray:
        if order == 1:
            return self.prime_values()
        return _spectral_derivative(self.periodic, order, _DIFFEO_NOISE_FLOOR)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = theta + _trig_eval(self.periodic, theta).reshape(theta.shape) \
            + TWO_PI * self.winding
        return out if out.ndim else float(out)

    def prime(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = 1.0 + _trig_eval(self._dperiodic, theta).reshape(theta.shape)
        return out if out.ndim else float(out)

    def resolution_defect(self) -> float:
        return _resolution_defect(self.periodic)

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.winding == 0 and float(np.max(np.abs(self.periodic))) < tol

    # -- serialization ------------------------------------------------------

    def to_csv(self, path) -> None:
        data = np.column_stack([self.theta, self.periodic])
        np.savetxt(path, data, fmt="%.17g", delimiter=",",
                   header=f"winding={self.winding}\ntheta,periodic")

    @staticmethod
    def from_csv(path) -> "CircleDiffeo":
        winding = 0
        with open(path) as fh:
            for line in fh:
                if line.startswith("#") and "winding=" in line:
                    winding = int(line.split("winding=")[1].strip())
                if not line.startswith("#"):
                    break
        data = np.loadtxt(path, delimiter=",")
        return CircleDiffeo(data[:, 1], winding=winding)


def identity_diffeo(n: int = DEFAULT_CIRCLE_NODES) -> CircleDiffeo:
    return CircleDiffeo(np.zeros(n))


def mobius_diffeo(m: MobiusElement, n: int = DEFAULT_CIRCLE_NODES) -> CircleDiffeo:
    """Lift of a Moebius transformation, branch fixed by rho(0) in (-pi, pi]."""
    theta = theta_grid(n)
    z = np.exp(1j * theta)
    w = m.circle_map(z)
    periodic = unwrap_phase(w * np.conj(z))
    return CircleDiffeo(periodic)


def subgroup_element(kind: str, param: float, n: int = DEFAULT_CIRCLE_NODES) -> CircleDiffeo:
    """One-parameter subgroup elements: rotations, and the Moebius maps
    acting on the light-ray (translations, dilations, special conformal)."""
    if kind == "rotation":
        return CircleDiffeo(np.full(n, float(param)))
    if kind == "translation":
        return mobius_diffeo(MobiusElement.translation(param), n)
    if kind == "dilation":
        if param <= 0:
            raise ValueError("dilation parameter must be positive")
        return mobius_diffeo(MobiusElement.dilation(param), n)
    if kind == "special_conformal":
        return mobius_diffeo(MobiusElement.special_conformal(param), n)
    raise ValueError(f"unknown subgroup kind {kind!r}")


def compose(first: CircleDiffeo, second: CircleDiffeo,
            tol: ToleranceSet = DEFAULT_TOL) -> CircleDiffeo:
    """(first o second)(theta), via trigonometric interpolation of first."""
    if max(first.resolution_defect(), second.resolution_defect()) > tol.resolution:
        raise ValueError("resolution too low")
    inner = second.theta + second.periodic  # winding of second acts trivially on periodic data
    periodic = second.periodic + _trig_eval(first.periodic, inner)
    return CircleDiffeo(periodic, winding=first.winding + second.winding)


def invert(rho: CircleDiffeo, tol: ToleranceSet = DEFAULT_TOL) -> CircleDiffeo:
    """Pointwise Newton inversion of the lift."""
    theta = rho.theta
    target = theta
    x = theta - rho.periodic  # first-order guess
    shift = TWO_PI * rho.winding
    for _ in range(60):
        f = x + _trig_eval(rho.periodic, x) + shift - target
        fp = 1.0 + _trig_eval(rho._dperiodic, x)
        step = f / fp
        x = x - step
        if np.max(np.abs(step)) < 1e-15 * (1.0 + np.max(np.abs(x))):
            break
    else:
        raise ValueError("inversion did not converge")
    residual = np.max(np.abs(x + _trig_eval(rho.periodic, x) + shift - target))
    if residual > 1e-10:
        raise ValueError("inversion did not converge")
    return CircleDiffeo(x - theta)


# ---------------------------------------------------------------------------
# smooth functions on the circle (complexified vector fields)
# ---------------------------------------------------------------------------

class CircleFunction:
    """Samples of f(e^{i theta}) on the uniform grid.

    The derivative is the circle derivative defined through
    i e^{i theta} f'(e^{i theta}) = d/dtheta f(e^{i theta}).
    """

    def __init__(self, samples, tol: ToleranceSet = DEFAULT_TOL):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 1 or samples.size < 16:
            raise ValueError("need a 1-d array of at least 16 samples")
        self.samples = samples
        self.n = samples.size
        self.theta = theta_grid(self.n)
        self.z = np.exp(1j * self.theta)
        self.tol = tol

    @staticmethod
    def from_callable(fn: Callable[[np.ndarray], np.ndarray],
                      n: int = DEFAULT_CIRCLE_NODES) -> "CircleFunction":
        z = np.exp(1j * theta_grid(n))
        return CircleFunction(np.asarray(fn(z), dtype=complex))

    def derivative(self, order: int = 1) -> "CircleFunction":
        vals = self.samples
        for _ in range(order):
            vals = _spectral_derivative(vals, 1) / (1j * self.z)
        return CircleFunction(vals)

    def resolution_defect(self) -> float:
        coeff = np.abs(np.fft.fft(self.samples))
        scale = coeff.max()
        if scale == 0.0:
            return 0.0
        band = np.concatenate([coeff[self.n // 2 - self.n // 16: self.n // 2 + self.n // 16]])
        return float(band.max() / scale)

    def is_real_field(self, tol: float = 1e-10) -> bool:
        gamma = -self.z**2 * np.conj(self.samples)
        scale = max(1.0, float(np.max(np.abs(self.samples))))
        return float(np.max(np.abs(gamma - self.samples))) < tol * scale


def reality_conjugate(f: CircleFunction) -> CircleFunction:
    """Antilinear conjugation (-z^2 conj f); fixed points are real fields."""
    return CircleFunction(-f.z**2 * np.conj(f.samples))


def field_theta_component(f: CircleFunction) -> np.ndarray:
    """Theta component F with vector field F(theta) d/dtheta; real for real fields."""
    comp = f.samples / (1j * f.z)
    return comp.real if f.is_real_field() else comp


def diffeo_from_field(f: CircleFunction, s: float) -> CircleDiffeo:
    """A curve of diffeomorphisms through the identity with tangent f at s=0."""
    comp = field_theta_component(f)
    if np.iscomplexobj(comp):
        raise ValueError("tangent curves need a real vector field")
    return CircleDiffeo(s * comp)


# ---------------------------------------------------------------------------
# light-ray reparametrisations and lifting
# ---------------------------------------------------------------------------

class LineReparam:
    """Strictly increasing map of the light ray, Moebius outside a window.

    Inside `window` the map is given by sampled values (uniform grid, with
    an optional exact evaluator); outside it coincides with `tail` exactly.
    """

    def __init__(self, func: RealFunction, window: Interval, tail: MobiusElement,
                 tol: ToleranceSet = DEFAULT_TOL):
        if not window.finite:
            raise ValueError("window must be finite")
        if np.any(np.diff(func.values) <= 0.0):
            raise ValueError("not a reparametrisation")
        self.func = func
        self.window = window
        self.tail = tail
        scale = max(1.0, float(np.max(np.abs(func.values))))
        for edge in (window.lo, window.hi):
            if abs(float(func(edge)) - float(tail(edge))) > 1e-7 * scale:
                raise ValueError("sampled map does not match its tail at the window edge")

    @staticmethod
    def identity(window: Interval = Interval(-1.0, 1.0), n: int = 256) -> "LineReparam":
        f = RealFunction.from_callable(lambda v: v, window.lo, window.hi, n,
                                       name="identity")
        return LineReparam(f, window, MobiusElement.identity())

    @staticmethod
    def from_mobius(m: MobiusElement, window: Interval, n: int = 1024) -> "LineReparam":
        f = RealFunction.from_callable(lambda v: m(v), window.lo, window.hi, n)
        return LineReparam(f, window, m)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        out = np.empty_like(v)
        inside = (v >= self.window.lo) & (v <= self.window.hi)
        out[inside] = self.func(v[inside])
        out[~inside] = self.tail(v[~inside])
        return float(out[0]) if scalar else out

    def scaled(self, lam: float) -> "LineReparam":
        """The map v -> V(lam v) (pre-composition with a dilation)."""
        if lam <= 0:
            raise ValueError("scaling must be positive")
        g = self.func.grid
        nodes = g.nodes / lam
        vals = g.values
        exact = None
        if self.func.exact is not None:
            inner = self.func.exact
            exact = lambda v: inner(lam * np.asarray(v))
        f = RealFunction(nodes, vals, exact=exact, name=self.func.name)
        win = Interval(self.window.lo / lam, self.window.hi / lam)
        tail = self.tail @ MobiusElement.dilation(lam)
        return LineReparam(f, win, tail)


def lift_line_reparam(v_map: LineReparam, n: int = DEFAULT_CIRCLE_NODES) -> CircleDiffeo:
    """Lift a line reparametrisation to the circle.

    rho(theta) = 2 arctan(V(tan(theta/2))) on (-pi, pi), glued continuously
    through the point at infinity with the Moebius tail; realised by
    unwrapping the phase of the Cayley image, which is smooth through
    poles of V.
    """
    theta = theta_grid(n)
    half = ((theta + math.pi) % TWO_PI) - math.pi  # principal angle in (-pi, pi]
    z = np.exp(1j * theta)
    w = np.empty(n, dtype=complex)
    at_inf = np.abs(np.abs(half) - math.pi) < 1e-14
    v = np.tan(half[~at_inf] / 2.0)
    w[~at_inf] = cayley(v_map(v))
    if at_inf.any():
        alpha, beta = v_map.tail.su11()
        w[at_inf] = (-alpha + beta) / (-np.conj(beta) + np.conj(alpha))
    periodic = unwrap_phase(w * np.conj(z))
    return CircleDiffeo(periodic)


# ---------------------------------------------------------------------------
# Schwarzian derivatives
# ---------------------------------------------------------------------------

def _schwarzian_forms(prime: np.ndarray, second: np.ndarray, third: np.ndarray,
                      sqrt_route: tuple[np.ndarray, np.ndarray]) -> tuple[np.ndarray, float]:
    form1 = third / prime - 1.5 * (second / prime) ** 2
    inv_sqrt_pp, sqrtp = sqrt_route
    form2 = -2.0 * sqrtp * inv_sqrt_pp
    return form1, float(np.max(np.abs(form1 - form2)))


def _schwarzian_real_function(f: RealFunction) -> RealFunction:
    from .numerics import differentiate

    p1 = differentiate(f, 1).values
    if np.min(p1) <= 0.0:
        raise ValueError("not a reparametrisation: V' must be positive")
    p2 = differentiate(f, 2).values
    p3 = differentiate(f, 3).values
    inv_sqrt = f.with_values(1.0 / np.sqrt(p1))
    inv_sqrt_pp = differentiate(inv_sqrt, 2).values
    form1, disc = _schwarzian_forms(p1, p2, p3, (inv_sqrt_pp, np.sqrt(p1)))
    out = RealFunction(f.grid.nodes, form1, Tail.zero(), Tail.zero(),
                       name=f"schwarzian({f.name})" if f.name else "schwarzian")
    out.meta["forms_discrepancy"] = disc
    return out


def circle_schwarzian_theta(rho: CircleDiffeo) -> tuple[np.ndarray, float]:
    """The Moebius-covariant circle Schwarzian

    b(theta) = {rho, theta} + (rho'(theta)^2 - 1)/2,

    which vanishes identically on the Moebius subgroup and transfers to the
    light-ray Schwarzian through {V, v} = 4 b(theta(v)) / (1 + v^2)^2.
    Returns the samples and the discrepancy between the two algebraic forms
    of the theta-Schwarzian.
    """
    p1 = rho.prime_values()
    p2 = rho.derivative_values(2)
    p3 = rho.derivative_values(3)
    inv_sqrt = 1.0 / np.sqrt(p1)
    inv_sqrt_pp = _spectral_derivative(inv_sqrt, 2, _DIFFEO_NOISE_FLOOR)
    form1, disc = _schwarzian_forms(p1, p2, p3, (inv_sqrt_pp, np.sqrt(p1)))
    return form1 + 0.5 * (p1**2 - 1.0), disc


def _upsampled_periodic_spline(samples: np.ndarray, factor: int = 4) -> CubicSpline:
    n = samples.size
    up = np.fft.irfft(np.fft.rfft(samples), n=factor * n) * factor
    th = theta_grid(factor * n)
    return CubicSpline(np.append(th, TWO_PI), np.append(up, up[0]), bc_type="periodic")


def _schwarzian_circle(rho: CircleDiffeo, v_max: float = 40.0,
                       n: int = 4096) -> RealFunction:
    b, disc = circle_schwarzian_theta(rho)
    spline = _upsampled_periodic_spline(b)

    def evaluator(v):
        v = np.asarray(v, dtype=float)
        th = 2.0 * np.arctan(v)
        return 4.0 * spline(np.mod(th, TWO_PI)) / (1.0 + v**2) ** 2

    nodes = np.linspace(-v_max, v_max, n)
    out = RealFunction(nodes, evaluator(nodes), Tail.power(4.0), Tail.power(4.0),
                       exact=evaluator, name="schwarzian(circle lift)")
    out.meta["forms_discrepancy"] = disc
    out.meta["theta_profile"] = b
    return out


def schwarzian(obj: Union[LineReparam, CircleDiffeo, RealFunction]) -> RealFunction:
    """Schwarzian derivative of a reparametrisation, as a light-ray function.

    Both algebraic forms (third-derivative ratio and the square-root form)
    are computed; their maximal discrepancy is recorded in the result's
    meta["forms_discrepancy"].
    """
    if isinstance(obj, RealFunction):
        return _schwarzian_real_function(obj)
    if isinstance(obj, LineReparam):
        out = _schwarzian_real_function(obj.func)
        # exactly zero outside the window, where the map is Moebius
        out.meta["window"] = (obj.window.lo, obj.window.hi)
        return out
    if isinstance(obj, CircleDiffeo):
        return _schwarzian_circle(obj)
    raise TypeError("schwarzian expects a LineReparam, CircleDiffeo or RealFunction")


# ---------------------------------------------------------------------------
# cocycles
# ---------------------------------------------------------------------------

def _log_sigma_prime(rho: CircleDiffeo) -> np.ndarray:
    """Continuous branch of log sigma' for the projected circle map.

    sigma'(e^{i theta}) = rho'(theta) e^{i (rho(theta) - theta)}; the phase
    is unwrapped from the theta = 0 node (winding number is zero).
    """
    sigma_prime = rho.prime_values() * np.exp(1j * rho.periodic)
    phase = unwrap_phase(sigma_prime)
    return np.log(np.abs(sigma_prime)) + 1j * phase


def bott_cocycle(sigma1: CircleDiffeo, sigma2: CircleDiffeo) -> float:
    """Group two-cocycle whose exponential multiplies composed unitaries.

    B = -(1/48 pi) Re contour_integral log((s1 o s2)'(z)) d log(s2'(z)),
    evaluated by theta quadrature with unwrapped logarithms.
    """
    inner = sigma2.theta + sigma2.periodic
    p1_at = 1.0 + _trig_eval(sigma1._dperiodic, inner)
    if np.min(p1_at) <= 0.0:
        raise ValueError("undersampled")
    log_comp = (
        np.log(p1_at * sigma2.prime_values())
        + 1j * (_trig_eval(sigma1.periodic, inner) + sigma2.periodic)
    )
    dlog2 = _spectral_derivative(_log_sigma_prime(sigma2), 1)
    integrand = (log_comp * dlog2).real
    return float(-np.mean(integrand) * TWO_PI / (48.0 * math.pi))


def virasoro_cocycle(f: CircleFunction, g: CircleFunction,
                     imag_tol: float = 1e-8) -> float:
    """Lie-algebra two-cocycle (1/48 pi) contour_integral (f g''' - f''' g) dz.

    Real for real (conjugation-invariant) fields; raises if a significant
    imaginary part remains.
    """
    val = virasoro_cocycle_complex(f, g)
    scale = max(1.0, abs(val))
    if abs(val.imag) > imag_tol * scale:
        raise ValueError("cocycle has a nonreal value; fields are not real")
    return float(val.real)


def virasoro_cocycle_complex(f: CircleFunction, g: CircleFunction) -> complex:
    if f.n != g.n:
        raise ValueError("fields must share a grid")
    f3 = f.derivative(3).samples
    g3 = g.derivative(3).samples
    integrand = (f.samples * g3 - f3 * g.samples) * 1j * f.z
    return complex(np.mean(integrand) * TWO_PI / (48.0 * math.pi))


# ---------------------------------------------------------------------------
# seeded random diffeomorphisms for property tests
# ---------------------------------------------------------------------------

def random_diffeo(rng: np.random.Generator, n: int = DEFAULT_CIRCLE_NODES,
                  max_modes: int = 6) -> CircleDiffeo:
    """Trigonometric-polynomial periodic part, scaled so min rho' > 0.1."""
    k_max = int(rng.integers(1, max_modes + 1))
    theta = theta_grid(n)
    periodic = np.zeros(n)
    dperiodic = np.zeros(n)
    for k in range(1, k_max + 1):
        amp = rng.normal() / k**2
        phase = rng.uniform(0.0, TWO_PI)
        periodic += amp * np.sin(k * theta + phase)
        dperiodic += amp * k * np.cos(k * theta + phase)
    peak = np.max(np.abs(dperiodic))
    if peak == 0.0:
        return identity_diffeo(n)
    target = rng.uniform(0.3, 0.85)
    return CircleDiffeo(periodic * (target / peak))
