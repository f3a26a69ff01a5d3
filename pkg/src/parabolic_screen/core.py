"""Complex-scalar conventions, the parabolic Green's function and quadrature.

All physics in the package is written for the one-way operator

    L[u] = du/dx + (2ik)^{-1} d^2u/dy^2,

with k = k_real * (1 + i*absorption) so that Im k >= 0 always.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import DomainError, NumericalError

__all__ = [
    "MediumParams",
    "ComplexAngle",
    "as_complex",
    "green_function",
    "green_function_total",
    "sqrt_upper",
    "quad_semiinfinite",
]


@dataclass(frozen=True)
class MediumParams:
    """Wavenumber with explicit limiting absorption.

    Attributes
    ----------
    k_real : float
        Real wavenumber magnitude, > 0.
    absorption : float
        Dimensionless absorption; the working wavenumber is
        ``k_real * (1 + 1j * absorption)``.
    """

    k_real: float
    absorption: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.k_real) and self.k_real > 0):
            raise DomainError(f"k_real must be positive, got {self.k_real!r}")
        if not (0.0 <= self.absorption < 0.1):
            raise DomainError(
                f"absorption must lie in [0, 0.1), got {self.absorption!r}")

    @property
    def k(self) -> complex:
        return complex(self.k_real * (1.0 + 1j * self.absorption))


@dataclass(frozen=True)
class ComplexAngle:
    """A parabolic slope angle together with the branch rule that produced it.

    ``branch`` is ``"given"`` for user supplied angles, ``"upper"`` for roots
    chosen by :func:`sqrt_upper` and ``"principal"`` for principal roots.
    """

    value: complex
    branch: str = "given"

    def __complex__(self):
        return complex(self.value)

    @property
    def real(self):
        return complex(self.value).real

    @property
    def imag(self):
        return complex(self.value).imag


def as_complex(z):
    """Return ``z`` as a Python complex, unwrapping :class:`ComplexAngle`."""
    if isinstance(z, ComplexAngle):
        return complex(z.value)
    return complex(z)


def green_function(x, y, medium: MediumParams):
    """Free-space parabolic Green's function G(x, y) for x > 0.

    Uses the principal branch of the square root in sqrt(k / (2 pi i x)).
    ``y`` may be an array.
    """
    x = float(x)
    if x == 0.0:
        raise DomainError("G(0, y) is a delta sheet; use the distributional identity")
    if x < 0.0:
        raise DomainError("G is only defined here for x > 0; see green_function_total")
    k = medium.k
    y = np.asarray(y)
    out = np.sqrt(k / (2j * np.pi * x)) * np.exp(1j * k * y * y / (2.0 * x))
    return out[()] if out.ndim == 0 else out


def green_function_total(x, y, medium: MediumParams):
    """Green's function extended by zero to x <= 0."""
    if float(x) <= 0.0:
        y = np.asarray(y)
        out = np.zeros(y.shape, dtype=complex)
        return out[()] if out.ndim == 0 else out
    return green_function(x, y, medium)


def sqrt_upper(z, k=1.0):
    """Square root w of z with Im(k*w) >= 0.

    When both roots give Im(k*w) == 0 the root with Re(w) >= 0 is returned.
    Works elementwise on arrays.
    """
    z = np.asarray(z, dtype=complex)
    k = np.asarray(k, dtype=complex)
    w = np.sqrt(z)
    kw = (k * w).imag
    flip = (kw < 0) | ((kw == 0) & (w.real < 0))
    w = np.where(flip, -w, w)
    return w[()] if w.ndim == 0 else w


def _quad_complex(g, lo, hi, epsrel, limit):
    val, err = quad(g, lo, hi, complex_func=True, epsabs=0.0,
                    epsrel=epsrel, limit=limit)
    return complex(val), float(abs(err))


def _quad_fourier(f, start, omega, kind, epsrel, limit):
    # QAWF handles the oscillatory infinite tail of f(t)*cos/sin(omega t)
    parts = []
    errs = 0.0
    for comp in (lambda t: complex(f(t)).real, lambda t: complex(f(t)).imag):
        # the caller checks the returned error bound, so QUADPACK's advisory is redundant
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            val, err = quad(comp, start, np.inf, weight=kind, wvar=omega,
                            epsabs=1e-300, limlst=200, limit=limit)
        parts.append(val)
        errs += abs(err)
    return complex(parts[0], parts[1]), errs


def quad_semiinfinite(f, decay_scale, rtol=1e-10, rotation=0.0, oscillation=None,
                      max_panels=80, limit=400):
    """Integral of f over (0, inf) for decaying or damped-oscillatory f.

    Parameters
    ----------
    f : callable
        Complex integrand. When ``rotation`` is non-zero it is evaluated at
        complex points t = s * exp(i*rotation) and must be analytic there.
    decay_scale : float
        Length of the first panel; later panels grow geometrically.
    rtol : float
        Relative tolerance of the result.
    rotation : float
        Contour rotation angle in radians. Use pi/4 for Fresnel kernels
        exp(i*kappa*t**2) with Re kappa > 0.
    oscillation : tuple (omega, "cos" | "sin"), optional
        Integrate f(t)*cos(omega*t) (or sin) using the Fourier-weight
        quadrature for the infinite tail beyond the first panel.

    Raises
    ------
    NumericalError
        If the panel sum does not settle after ``max_panels`` panels. The
        partial sum is attached as ``estimate``.
    """
    if decay_scale <= 0:
        raise DomainError("decay_scale must be positive")
    if oscillation is not None:
        omega, kind = oscillation
        kind = str(kind)
        if kind not in ("cos", "sin"):
            raise DomainError("oscillation kind must be 'cos' or 'sin'")
        trig = np.cos if kind == "cos" else np.sin
        head, e1 = _quad_complex(lambda t: f(t) * trig(omega * t), 0.0,
                                 decay_scale, rtol, limit)
        tail, e2 = _quad_fourier(f, decay_scale, omega, kind, rtol, limit)
        total = head + tail
        err = e1 + e2
        if err > max(rtol * abs(total), 1e-14):
            raise NumericalError("Fourier-weight quadrature did not converge",
                                 estimate=total, error=err)
        return total

    phase = np.exp(1j * rotation)
    if rotation == 0.0:
        g = f
    else:
        def g(s):
            return f(s * phase) * phase

    total = 0.0 + 0.0j
    err_total = 0.0
    start = 0.0
    width = float(decay_scale)
    quiet = 0
    for _ in range(max_panels):
        piece, err = _quad_complex(g, start, start + width, rtol * 1e-2, limit)
        total += piece
        err_total += err
        start += width
        width *= 1.5
        if abs(piece) <= rtol * abs(total) * 1e-2 or (piece == 0 and total == 0):
            quiet += 1
            if quiet >= 2:
                if err_total > rtol * max(abs(total), 1e-300) and total != 0:
                    raise NumericalError("panel quadrature error above tolerance",
                                         estimate=total, error=err_total)
                return complex(total)
        else:
            quiet = 0
    raise NumericalError("semi-infinite quadrature did not converge",
                         estimate=complex(total), error=err_total)
