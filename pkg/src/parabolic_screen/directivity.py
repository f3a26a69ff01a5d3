"""Small-gap closed forms for the directivities V0, V1 and the lattice sums behind them.

The gap between neighbouring screens acts as a short Dirichlet segment on the
sheet carrying w0 and as a short Neumann segment on the sheet carrying w1.
Each segment is replaced by a point scatterer of strength h_D (monopole) or
h_N (dipole); the scatterer amplitudes c_n then obey a discrete convolution
system that is solved in closed form through polylogarithms.
"""

import contextlib
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .config import IncidenceSpec, ScreenGeometry
from .core import ComplexAngle, MediumParams, as_complex, green_function, quad_semiinfinite
from .errors import DegenerateError, DomainError, PoleError, ResonanceError, ValidityWarning
from .special import PolylogOrder, polylog

__all__ = [
    "SegmentStrengths",
    "LatticeKind",
    "LatticeSumResult",
    "DirectivitySet",
    "segment_strengths",
    "segment_strengths_quadrature",
    "lattice_sum_dirichlet",
    "lattice_sum_neumann",
    "lattice_sum",
    "lattice_recursion",
    "lattice_inversion",
    "v0_asymptotic",
    "v1_prime_asymptotic",
    "v1_asymptotic",
    "neumann_correction_ratio",
    "directivity_set",
    "flipped_branch",
]

# sqrt(1/i); the sign is load-bearing for the theta -> 0 limits
_SQRT_INV_I = np.exp(-0.25j * np.pi)
_state = {"sqrt_inv_i": _SQRT_INV_I}


@contextlib.contextmanager
def flipped_branch():
    """Test hook: use the wrong root of 1/i inside the block."""
    old = _state["sqrt_inv_i"]
    _state["sqrt_inv_i"] = -_SQRT_INV_I
    try:
        yield
    finally:
        _state["sqrt_inv_i"] = old


@dataclass(frozen=True)
class SegmentStrengths:
    h_D: complex
    h_N: complex


class LatticeKind(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class LatticeSumResult:
    chat: complex
    p: complex
    kind: LatticeKind


@dataclass(frozen=True)
class DirectivitySet:
    """Directivities and their phi-derivatives at phi = theta."""

    V0: complex
    V1: complex
    V0_prime: complex
    V1_prime: complex
    theta: ComplexAngle
    source: str = "asymptotic"


def segment_strengths(q, medium: MediumParams) -> SegmentStrengths:
    """Closed-form monopole and dipole strengths of a segment of length q."""
    if not q > 0:
        raise DomainError("segment length must be positive")
    k = medium.k
    h_d = -2.0 * np.sqrt(2j * q / (np.pi * k))
    h_n = -(2.0 / 3.0) * (q / k) ** 1.5 * np.sqrt(2.0 / np.pi) * np.exp(-0.25j * np.pi)
    return SegmentStrengths(complex(h_d), complex(h_n))


def segment_strengths_quadrature(q, medium: MediumParams, rtol=1e-10) -> SegmentStrengths:
    """h_D and h_N from nested numerical quadrature of the defining double integrals.

    h_D = -4 * int int G(q, y + y') dy dy' and
    h_N = 4 * int int y y' G(q, y + y') dy dy' over the positive quadrant,
    both integrated on contours rotated by pi/4 where G decays like a Gaussian.
    """
    scale = np.sqrt(q / medium.k_real)
    rot = 0.25 * np.pi

    def g(s):
        return green_function(q, s, medium)

    def inner_d(y):
        return quad_semiinfinite(lambda t: g(y + t), scale, rtol=rtol, rotation=rot)

    def inner_n(y):
        return quad_semiinfinite(lambda t: t * g(y + t), scale, rtol=rtol, rotation=rot)

    h_d = -4.0 * quad_semiinfinite(inner_d, scale, rtol=rtol, rotation=rot)
    h_n = 4.0 * quad_semiinfinite(lambda y: y * inner_n(y), scale, rtol=rtol, rotation=rot)
    return SegmentStrengths(complex(h_d), complex(h_n))


def _lattice_constants(kind, geometry: ScreenGeometry, medium: MediumParams):
    """(coef, source amplitude, coupling, order) of c_n = coef*(src n^-s + coupling*sum)."""
    k = medium.k
    a = geometry.a
    strengths = segment_strengths(geometry.q, medium)
    if kind == LatticeKind.DIRICHLET:
        return np.sqrt(k / (2j * np.pi * a)), 1.0, strengths.h_D, 0.5
    f0 = -np.sqrt(2j * geometry.q / (np.pi * k))
    f1 = (k / a) ** 1.5 * np.sqrt(1j / (2.0 * np.pi))
    return f1, f0, strengths.h_N, 1.5


def lattice_sum(kind, p, geometry: ScreenGeometry, medium: MediumParams) -> LatticeSumResult:
    """Closed-form generating function chat(p) = sum_n c_n e^{ipn}."""
    kind = LatticeKind(kind)
    p = complex(p)
    if p.imag < 0:
        raise DomainError("lattice sums need Im p >= 0")
    if geometry.unbranched:
        return LatticeSumResult(0j, p, kind)
    coef, src, coupling, order = _lattice_constants(kind, geometry, medium)
    if p.imag > 700:
        return LatticeSumResult(0j, p, kind)
    li = polylog(order, np.exp(1j * p))
    denom = 1.0 - coef * coupling * li
    if abs(denom) < 1e-14 * max(1.0, abs(coef * coupling * li)):
        raise ResonanceError(f"lattice-sum denominator vanishes at p = {p}")
    return LatticeSumResult(complex(coef * src * li / denom), p, kind)


def lattice_sum_dirichlet(p, geometry, medium) -> LatticeSumResult:
    """chat(p) = sqrt(k/(2 pi i a)) Li_{1/2}(e^{ip}) / (1 + 2 sqrt(eps) Li_{1/2}(e^{ip}) / pi)."""
    return lattice_sum(LatticeKind.DIRICHLET, p, geometry, medium)


def lattice_sum_neumann(p, geometry, medium) -> LatticeSumResult:
    """chat(p) = f0 f1 Li_{3/2}(e^{ip}) / (1 - f1 h_N Li_{3/2}(e^{ip}))."""
    return lattice_sum(LatticeKind.NEUMANN, p, geometry, medium)


def lattice_recursion(kind, n_max, geometry: ScreenGeometry, medium: MediumParams):
    """Amplitudes c_1..c_{n_max} from the direct convolution recursion.

    Returns an array of length n_max + 1 with c[0] = 0.
    """
    kind = LatticeKind(kind)
    coef, src, coupling, order = _lattice_constants(kind, geometry, medium)
    n = np.arange(n_max + 1, dtype=float)
    kern = np.zeros(n_max + 1, dtype=complex)
    kern[1:] = n[1:] ** (-order)
    g = src * kern
    return kernels.convolution_recursion(g, kern, coef, coupling)


def lattice_inversion(kind, n_max, geometry: ScreenGeometry, medium: MediumParams,
                      samples=None, damping=None):
    """Recover c_1..c_{n_max} from the closed form by discrete Fourier inversion.

    chat is sampled on p = t + i*damping over a uniform t-grid of ``samples``
    points; aliasing is suppressed by exp(-damping*samples).
    """
    kind = LatticeKind(kind)
    if samples is None:
        samples = 1 << int(np.ceil(np.log2(32 * max(n_max, 64))))
    if damping is None:
        damping = 30.0 / samples
    coef, src, coupling, order = _lattice_constants(kind, geometry, medium)
    t = 2.0 * np.pi * np.arange(samples) / samples
    z = np.exp(1j * (t + 1j * damping))
    li = polylog(order, z)
    chat = coef * src * li / (1.0 - coef * coupling * li)
    c = np.fft.fft(chat) / samples
    n = np.arange(n_max + 1)
    out = c[: n_max + 1] * np.exp(damping * n)
    out[0] = 0.0
    return out


def _theta_value(theta):
    th = as_complex(theta)
    if th == 0:
        raise DegenerateError("theta = 0 is the degenerate grazing limit")
    return th


def _medium(spec: IncidenceSpec, geometry: ScreenGeometry) -> MediumParams:
    return spec.medium(geometry)


def v0_asymptotic(theta, spec: IncidenceSpec, geometry: ScreenGeometry) -> complex:
    """V0 = 1 / (1 + 2 sqrt(eps) Li_{1/2}(exp(i k a theta^2 / 2)) / pi)."""
    th = _theta_value(theta)
    medium = _medium(spec, geometry)
    k = medium.k
    if geometry.unbranched:
        return 1.0 + 0j
    kq_theta = abs(k * geometry.q * th)
    if kq_theta > 1.0:
        warnings.warn(
            f"k(a-b)theta = {kq_theta:.3g} > 1 (k(a-b)theta^2 = "
            f"{abs(k * geometry.q * th * th):.3g}); the lambda_1 = 1 step is inaccurate",
            ValidityWarning, stacklevel=2)
    p = k * geometry.a * th * th / 2.0
    try:
        li = polylog(PolylogOrder.HALF, np.exp(1j * p))
    except PoleError:
        raise DegenerateError("V0 evaluated at the pole theta^2 = 0") from None
    return complex(1.0 / (1.0 + 2.0 * np.sqrt(geometry.epsilon) * li / np.pi))


def v1_prime_asymptotic(spec: IncidenceSpec, geometry: ScreenGeometry) -> complex:
    """V1' = sqrt(2 (a-b) k / (pi i)), independent of theta."""
    k = _medium(spec, geometry).k
    return complex(np.sqrt(2.0 * geometry.q * k / np.pi) * _state["sqrt_inv_i"])


def v1_asymptotic(theta, phi, spec: IncidenceSpec, geometry: ScreenGeometry) -> complex:
    """V1(theta, phi) = V1' * phi (linear in phi, independent of theta)."""
    return v1_prime_asymptotic(spec, geometry) * as_complex(phi)


def neumann_correction_ratio(theta, phi, spec: IncidenceSpec, geometry: ScreenGeometry) -> float:
    """|dropped Neumann lattice term| / |kept term| in the V1 decomposition.

    The dropped term is i k phi lambda_1 h_N e^{ip} chat_N(p) with
    p = k a theta^2 / 2 and lambda_1 = exp(i k (a-b) (phi^2 - theta^2) / 2).
    """
    th = _theta_value(theta)
    ph = as_complex(phi)
    medium = _medium(spec, geometry)
    k = medium.k
    p = k * geometry.a * th * th / 2.0
    lam1 = np.exp(1j * k * geometry.q * (ph * ph - th * th) / 2.0)
    h_n = segment_strengths(geometry.q, medium).h_N
    chat = lattice_sum_neumann(p, geometry, medium).chat
    dropped = 1j * k * ph * lam1 * h_n * np.exp(1j * p) * chat
    kept = v1_asymptotic(th, ph, spec, geometry)
    return float(abs(dropped) / abs(kept))


def directivity_set(theta, spec: IncidenceSpec, geometry: ScreenGeometry) -> DirectivitySet:
    """Asymptotic directivity set at theta: V0' = 0 and V1 = V1' * theta."""
    th = _theta_value(theta)
    v1p = v1_prime_asymptotic(spec, geometry)
    if isinstance(theta, ComplexAngle):
        angle = theta
    else:
        angle = ComplexAngle(th)
    return DirectivitySet(
        V0=v0_asymptotic(th, spec, geometry),
        V1=v1p * th,
        V0_prime=0j,
        V1_prime=v1p,
        theta=angle,
        source="asymptotic",
    )
