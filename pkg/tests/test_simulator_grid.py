import numpy as np
import pytest
from hypothesis import given, strategies as st

from parabolic_screen.config import ScreenGeometry
from parabolic_screen.core import MediumParams, green_function
from parabolic_screen.directivity import segment_strengths
from parabolic_screen.errors import DomainError, ResolutionError
from parabolic_screen.simulator.edge import EdgeConfig
from parabolic_screen.simulator.grid import (FieldSlice, SimulationGrid, apply_cut, delta_slice,
                                             dump_slices_csv, green_slice, propagate_slice)

MEDIUM = MediumParams(100.0, 1e-3)


def _grid(n=2048, h=2e-3, medium=MEDIUM, **kw):
    return SimulationGrid(n, h, medium, **kw)


def _l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_grid_layout():
    g = _grid()
    assert g.y[0] == -g.y[-1]
    assert np.count_nonzero(g.lower) == g.n_points // 2
    assert g.free_half_width == pytest.approx(0.7 * g.half_width)
    big = SimulationGrid.from_half_width(3.0, 1e-2, MEDIUM)
    assert big.n_points == 1024
    assert big.metadata()["n_points"] == 1024


@pytest.mark.parametrize("n, h, frac", [(1000, 1e-3, 0.3), (8, 1e-3, 0.3), (64, 0.0, 0.3),
                                        (64, 1e-3, 1.0)])
def test_grid_rejects_invalid(n, h, frac):
    with pytest.raises(DomainError):
        SimulationGrid(n, h, MEDIUM, sponge_fraction=frac)


def test_apply_cut_involution_and_parity():
    g = _grid(256)
    rng = np.random.default_rng(3)
    s = FieldSlice(g, rng.normal(size=256) + 1j * rng.normal(size=256), 0.0)
    assert np.array_equal(apply_cut(apply_cut(s)).values, s.values)
    even = FieldSlice(g, np.exp(-g.y ** 2 / 0.01) + 0j, 0.0)
    cut = apply_cut(even).values
    assert np.array_equal(cut[~g.lower], even.values[~g.lower])
    assert np.array_equal(cut[g.lower], -even.values[g.lower])
    assert np.array_equal(cut, -cut[::-1])


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_apply_cut_involution_property(seed):
    g = _grid(64)
    rng = np.random.default_rng(seed)
    s = FieldSlice(g, rng.normal(size=64) + 1j * rng.normal(size=64), 1.0)
    assert np.array_equal(apply_cut(apply_cut(s)).values, s.values)


def test_gaussian_propagation_matches_closed_form():
    g = _grid(4096, 2e-3, MediumParams(100.0), sponge_fraction=0.0)
    w, dx = 0.05, 0.3
    u0 = np.exp(-g.y ** 2 / (2 * w * w)) + 0j
    num = propagate_slice(FieldSlice(g, u0, 0.0), dx, sponge=False)
    # spread of a Gaussian under du/dx = (i/2k) d2u/dy2: w^2 -> w^2 + i dx / k
    s2 = w * w + 1j * dx / g.k
    exact = w / np.sqrt(s2) * np.exp(-g.y ** 2 / (2 * s2))
    assert _l2(num.values, exact) <= 1e-10
    assert num.x_pos == dx


@pytest.mark.parametrize("absorption", [0.0, 1e-3])
def test_semigroup(absorption):
    g = _grid(4096, 1e-3, MediumParams(100.0, absorption))
    rng = np.random.default_rng(4)
    u = rng.normal(size=4096) + 1j * rng.normal(size=4096)
    raw1 = g.propagate(u, 0.2, sponge=False)
    raw2 = g.propagate(g.propagate(u, 0.1, sponge=False), 0.1, sponge=False)
    assert _l2(raw2, raw1) <= 1e-8


def test_norm_conserved_without_absorption():
    g = _grid(2048, 1e-3, MediumParams(100.0))
    rng = np.random.default_rng(5)
    u = rng.normal(size=2048) + 1j * rng.normal(size=2048)
    out = g.propagate(u, 0.37, sponge=False)
    assert abs(np.linalg.norm(out) / np.linalg.norm(u) - 1) <= 1e-10
    damped = g.propagate(u, 0.37)
    assert np.linalg.norm(damped) <= np.linalg.norm(u)


def test_delta_propagates_to_green():
    m = MediumParams(100.0, 0.05)
    g = SimulationGrid(4096, 1e-3, m, sponge_fraction=0.0)
    s = propagate_slice(delta_slice(g), 0.05, sponge=False)
    exact = green_function(0.05, g.y, m)
    assert _l2(s.values, exact) <= 1e-6
    direct = green_slice(g, 0.05)
    assert _l2(direct.values, exact) <= 1e-6


def test_aliasing_monitor():
    g = _grid(256, 1e-2)
    rough = FieldSlice(g, np.where(np.arange(256) % 2, 1.0, -1.0) + 0j, 0.0)
    with pytest.raises(ResolutionError):
        propagate_slice(rough, 0.01, alias_threshold=0.1)
    smooth = FieldSlice(g, np.exp(-g.y ** 2) + 0j, 0.0)
    propagate_slice(smooth, 0.01, alias_threshold=0.1)


def test_propagation_needs_positive_step():
    with pytest.raises(DomainError):
        propagate_slice(delta_slice(_grid(64)), 0.0)


def test_interpolation_reproduces_samples():
    g = _grid(512, 1e-2)
    u = np.exp(-g.y ** 2 / 0.1) + 0j
    assert np.allclose(g.evaluate(u, g.y[100:105]), u[100:105], atol=1e-12)


@pytest.mark.parametrize("eps", [0.05, 0.02])
def test_single_gap_acts_as_monopole(eps):
    # one period: the gap's net scattered field carries G(b, 0) * h_D, up to O(eps)
    geom = ScreenGeometry.from_epsilon(eps)
    g = EdgeConfig().grid(geom, MEDIUM)
    s = green_slice(g, 1e-3)
    s = apply_cut(propagate_slice(s, geom.b - 1e-3))
    s = apply_cut(propagate_slice(s, geom.q))
    net = np.sum(s.values - green_function(geom.a, g.y, MEDIUM)) * g.h
    ref = green_function(geom.b, 0.0, MEDIUM) * segment_strengths(geom.q, MEDIUM).h_D
    assert abs(net - ref) / abs(ref) <= eps


def test_dump_slices_csv(tmp_path):
    g = _grid(16, 0.1)
    p = tmp_path / "s.csv"
    dump_slices_csv([delta_slice(g, 0.5)], p)
    lines = p.read_text().splitlines()
    assert lines[0] == "x_pos,y,re_u,im_u"
    assert len(lines) == 17
