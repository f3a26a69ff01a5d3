"""Polylogarithms Li_{1/2}, Li_{3/2} on the closed unit disk and their tails.

Inside |z| <= 0.9 the defining series is summed directly. Closer to the unit
circle the expansion in mu = log z is used,

    Li_s(e^mu) = Gamma(1-s) (-mu)^(s-1) + sum_j zeta(s-j) mu^j / j!,

which converges for |mu| < 2 pi and is exact on the circle itself.
Riemann zeta values come from :func:`scipy.special.zeta`.
"""

from enum import Enum
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.special import gamma, zeta

from . import kernels
from .errors import DomainError, PoleError

__all__ = [
    "PolylogOrder",
    "polylog",
    "polylog_asymptotic_halforder",
    "powerlaw_partial_sum",
    "powerlaw_tail",
    "fit_powerlaw_tail",
]

SERIES_RADIUS = 0.9
_EXPANSION_TERMS = 80


class PolylogOrder(Enum):
    """The two polylogarithm orders used by the lattice sums."""

    HALF = 0.5
    THREE_HALVES = 1.5


def _order_value(s):
    if isinstance(s, PolylogOrder):
        return s.value
    try:
        return PolylogOrder(float(s)).value
    except ValueError:
        raise DomainError(f"polylog order must be 1/2 or 3/2, got {s!r}") from None


@lru_cache(maxsize=None)
def _expansion_coefficients(s):
    j = np.arange(_EXPANSION_TERMS)
    fact = np.array([float(factorial(int(i))) for i in j])
    return zeta(s - j) / fact


def _polylog_general(s, z):
    """Li_s(z) for non-integer real s > 0 and |z| <= 1 (vectorized)."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    out = np.empty(z.shape, dtype=complex)
    r = np.abs(z)
    if np.any(r > 1.0 + 1e-12):
        raise DomainError("polylog requires |z| <= 1")
    inner = r <= SERIES_RADIUS
    if np.any(inner):
        out[inner] = kernels.polylog_series(s, z[inner])
    outer = ~inner
    if np.any(outer):
        mu = np.log(z[outer])
        at_one = mu == 0
        if np.any(at_one) and s <= 1.0:
            raise PoleError(f"Li_{s}(1) diverges")
        coef = _expansion_coefficients(s)
        acc = np.zeros(mu.shape, dtype=complex)
        for c in coef[::-1]:
            acc = acc * mu + c
        mu_safe = np.where(at_one, 1.0, mu)
        sing = gamma(1.0 - s) * (-mu_safe) ** (s - 1.0)
        acc = acc + np.where(at_one, 0.0, sing)
        out[outer] = acc
    return out.reshape(shape)


def polylog(s, z):
    """Polylogarithm Li_s(z) for s in {1/2, 3/2} and |z| <= 1.

    Parameters
    ----------
    s : PolylogOrder or float
        Order, 0.5 or 1.5.
    z : complex or array_like
        Argument(s) in the closed unit disk.

    Raises
    ------
    PoleError
        For s = 1/2 and z = 1.
    DomainError
        For |z| > 1 or an unsupported order.
    """
    sv = _order_value(s)
    out = _polylog_general(sv, z)
    return complex(out) if out.ndim == 0 else out


def polylog_asymptotic_halforder(mu, terms=1):
    """Small-mu expansion of Li_{1/2}(e^mu).

    ``terms=1`` gives the leading term sqrt(pi) * (-mu)^(-1/2) with the
    principal branch; each further term adds zeta(1/2 - j) mu^j / j!.
    """
    mu = complex(mu)
    if mu == 0:
        raise PoleError("Li_{1/2}(e^mu) has a pole at mu = 0")
    if abs(mu) > 0.1:
        raise DomainError("asymptotic form requires |mu| <= 0.1")
    if not (mu.imag >= 0 or mu.real <= 0):
        raise DomainError("mu must satisfy Im mu >= 0 or Re mu <= 0")
    if terms < 1:
        raise DomainError("terms must be >= 1")
    val = np.sqrt(np.pi) * (-mu) ** -0.5
    for j in range(terms - 1):
        val += zeta(0.5 - j) * mu ** j / factorial(j)
    return complex(val)


def powerlaw_partial_sum(z, s, n_last):
    """sum_{n=1}^{n_last} z^n n^{-s}."""
    n = np.arange(1, n_last + 1)
    return complex(np.sum(z ** n * n ** (-float(s))))


def powerlaw_tail(z, coeffs, powers, n_last):
    """sum_{n > n_last} sum_i coeffs[i] z^n n^{-powers[i]} via polylogarithms."""
    total = 0.0 + 0.0j
    for c, s in zip(coeffs, powers):
        li = complex(_polylog_general(float(s), complex(z)))
        total += c * (li - powerlaw_partial_sum(z, s, n_last))
    return total


def fit_powerlaw_tail(terms, z, powers=(0.5, 1.5, 2.5), fit_fraction=0.5):
    """Estimate the tail of a series whose n-th term behaves like z^n P(n).

    ``terms[n-1]`` is the n-th term. The model sum_i c_i z^n n^{-s_i} is fitted
    by least squares over the last ``fit_fraction`` of the available terms and
    then summed from n = len(terms) + 1 to infinity.

    Returns
    -------
    tail : complex
    coeffs : ndarray
    misfit : float
        RMS fit residual relative to the RMS of the fitted terms.
    """
    terms = np.asarray(terms, dtype=complex)
    m = terms.shape[0]
    n = np.arange(1, m + 1)
    start = int(m * (1.0 - fit_fraction))
    sel = slice(start, m)
    basis = np.stack([z ** n[sel] * n[sel] ** (-float(s)) for s in powers], axis=1)
    coeffs, *_ = np.linalg.lstsq(basis, terms[sel], rcond=None)
    resid = terms[sel] - basis @ coeffs
    scale = np.sqrt(np.mean(np.abs(terms[sel]) ** 2))
    misfit = float(np.sqrt(np.mean(np.abs(resid) ** 2)) / scale) if scale > 0 else 0.0
    tail = powerlaw_tail(z, coeffs, powers, m)
    return tail, coeffs, misfit
