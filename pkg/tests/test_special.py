import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import zeta

from parabolic_screen import _kernels_py
from parabolic_screen.errors import DomainError, PoleError
from parabolic_screen.special import (PolylogOrder, fit_powerlaw_tail, polylog,
                                      polylog_asymptotic_halforder, powerlaw_partial_sum,
                                      powerlaw_tail)

mp.mp.dps = 30


def mp_polylog(s, z):
    return complex(mp.polylog(s, mp.mpc(z)))


def test_zero_argument():
    assert polylog(0.5, 0.0) == 0
    assert polylog(1.5, 0.0) == 0


def test_li32_at_one_is_zeta():
    # independent oracle: brute-force partial sum with Euler-Maclaurin tail
    n = 10_000
    head = float(np.sum(np.arange(1, n + 1, dtype=float) ** -1.5))
    tail = 2.0 / np.sqrt(n) - 0.5 * n ** -1.5 + (1.5 / 12.0) * n ** -2.5
    assert abs(polylog(1.5, 1.0) - (head + tail)) / (head + tail) <= 1e-12
    assert polylog(PolylogOrder.THREE_HALVES, 1.0) == pytest.approx(2.612375348685488, rel=1e-14)


def test_li12_pole():
    with pytest.raises(PoleError):
        polylog(0.5, 1.0)


def test_unsupported_order_and_outside_disk():
    with pytest.raises(DomainError):
        polylog(2.5, 0.5)
    with pytest.raises(DomainError):
        polylog(0.5, 1.1)


def test_li12_near_one_dominated_by_leading_term():
    mu = -1e-6
    val = polylog(0.5, np.exp(mu))
    lead = np.sqrt(np.pi) * (-mu) ** -0.5
    assert lead == pytest.approx(1772.4538509, rel=1e-9)
    # first correction is zeta(1/2)
    assert val - lead == pytest.approx(zeta(0.5), rel=1e-5)
    assert val == pytest.approx(mp_polylog(0.5, np.exp(mu)), rel=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.5])
@pytest.mark.parametrize("z", [0.3, -0.7 + 0.2j, 0.89j, 0.95 * np.exp(0.3j), np.exp(-1e-3 + 0.01j),
                               -1.0, 1j, np.exp(2.0j), 0.999 * np.exp(-0.5j)])
def test_polylog_against_mpmath(s, z):
    assert abs(polylog(s, z) - mp_polylog(s, z)) / abs(mp_polylog(s, z)) <= 1e-10


@given(r=st.floats(0.0, 1.0), t=st.floats(-np.pi, np.pi), s=st.sampled_from([0.5, 1.5]))
def test_polylog_property_vs_mpmath(r, t, s):
    z = r * np.exp(1j * t)
    if s == 0.5 and abs(1 - z) < 1e-6:
        return
    ref = mp_polylog(s, z)
    assert abs(polylog(s, z) - ref) <= 1e-10 * max(abs(ref), 1e-300) + 1e-15


def test_series_consistency_inside_half_disk():
    rng = np.random.default_rng(2)
    z = 0.5 * np.sqrt(rng.random(40)) * np.exp(2j * np.pi * rng.random(40))
    for s in (0.5, 1.5):
        brute = _kernels_py.polylog_series(s, z, tol=1e-30, max_terms=1_000_000)
        assert np.max(np.abs(polylog(s, z) - brute)) <= 1e-12


def test_vectorized_matches_scalar():
    z = np.array([0.2, 0.95j, np.exp(-1e-4 + 1e-3j)])
    vec = polylog(0.5, z)
    assert vec.shape == (3,)
    for zi, vi in zip(z, vec):
        assert vi == polylog(0.5, zi)


def test_li12_modulus_increases_towards_one():
    r = 1.0 - np.geomspace(0.5, 1e-7, 200)
    mods = np.abs(polylog(0.5, r))
    assert np.all(np.diff(mods) > 0)


@given(a=st.floats(0.0, 0.999), b=st.floats(0.0, 0.999))
def test_li12_monotone_property(a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-9:
        return
    assert abs(polylog(0.5, hi)) > abs(polylog(0.5, lo))


def test_asymptotic_real_mu():
    assert polylog_asymptotic_halforder(-1e-4) == pytest.approx(177.2453850905516, rel=1e-12)
    ref = polylog(0.5, np.exp(-1e-4))
    assert abs(polylog_asymptotic_halforder(-1e-4) - ref) / abs(ref) <= 1e-2


def test_asymptotic_branch_on_imaginary_ray():
    # the leading term for mu = i delta carries exp(+i pi/4); the series oracle confirms it
    delta = 1e-6
    lead = polylog_asymptotic_halforder(1j * delta)
    assert lead == pytest.approx(np.sqrt(np.pi) * np.exp(0.25j * np.pi) * 1e3, rel=1e-12)
    ref = mp_polylog(0.5, np.exp(1j * delta))
    assert abs(lead - ref) / abs(ref) < 1e-3


@pytest.mark.parametrize("ray", [0.5 * np.pi, 0.75 * np.pi, np.pi])
def test_asymptotic_error_shrinks_along_rays(ray):
    errs = []
    for r in (1e-2, 1e-4, 1e-6, 1e-8):
        mu = r * np.exp(1j * ray)
        ref = mp_polylog(0.5, np.exp(mu))
        errs.append(abs(polylog_asymptotic_halforder(mu) - ref) / abs(ref))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    mu = 1e-4 * np.exp(1j * ray)
    ref = mp_polylog(0.5, np.exp(mu))
    assert abs(polylog_asymptotic_halforder(mu, terms=2) - ref) / abs(ref) <= 1e-3


def test_asymptotic_domain():
    with pytest.raises(PoleError):
        polylog_asymptotic_halforder(0.0)
    with pytest.raises(DomainError):
        polylog_asymptotic_halforder(0.5)
    with pytest.raises(DomainError):
        polylog_asymptotic_halforder(1e-3 - 1e-3j)
    with pytest.raises(DomainError):
        polylog_asymptotic_halforder(-1e-3, terms=0)


def test_powerlaw_tail_reconstructs_polylog():
    z = 0.99 * np.exp(0.2j)
    head = powerlaw_partial_sum(z, 0.5, 50)
    tail = powerlaw_tail(z, [1.0], [0.5], 50)
    assert head + tail == pytest.approx(polylog(0.5, z), rel=1e-12)


def test_fit_powerlaw_tail_exact_model():
    z = np.exp(1j * 0.03 - 1e-3)
    n = np.arange(1, 201)
    coeffs = np.array([0.3 - 0.1j, 2.0, -0.7j])
    terms = sum(c * z ** n * n ** -s for c, s in zip(coeffs, (0.5, 1.5, 2.5)))
    tail, fitted, misfit = fit_powerlaw_tail(terms, z)
    assert np.allclose(fitted, coeffs, rtol=1e-8)
    assert misfit < 1e-10
    total = sum(c * mp_polylog(s, z) for c, s in zip(coeffs, (0.5, 1.5, 2.5)))
    assert terms.sum() + tail == pytest.approx(total, rel=1e-10)
