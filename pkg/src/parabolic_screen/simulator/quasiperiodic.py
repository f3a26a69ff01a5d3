"""Quasi-periodic scattering solver on the two-sheeted surface.

The scattered field is stored on both sheets as two arrays, U1 and U2, at
x = 0+. One period map propagates both sheets across the cell. At every cut
it swaps their lower halves and adds the prescribed jump of the incident
wave, then it applies the Floquet phase. The periodic state solves

    (I - M) U = f,

with M the source-free period map and f the response to the jumps. This is
solved with restarted GMRES. Coefficients are extracted along two probe
lines y = +-Y_p. For each Floquet order the x-integral of every segment
between cuts is done exactly in the spectral basis.
"""

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from ..config import IncidenceSpec, ScreenGeometry, floquet_angle
from ..core import as_complex
from ..embedding import CoefficientTable, default_window, waveguide_map
from ..errors import ContractionError, DomainError, ProbeWarning, ValidityWarning
from .grid import SimulationGrid

__all__ = ["SolverConfig", "QuasiPeriodicSolution", "EdgeValues", "quasi_periodic_field",
           "extract_coefficients", "quasi_periodic_solve", "edge_values_extract",
           "reciprocity_check", "contraction_ratio", "write_metadata", "aperture_margin"]

EVANESCENT_CUTOFF = 1e-8
APERTURE_FACTOR = 5.0


@dataclass(frozen=True)
class SolverConfig:
    """Discretisation and iteration controls; lengths in units of a."""

    n_points: int = 16384
    h_div: float = 16.0
    sponge_fraction: float = 0.5
    sponge_strength: float = 0.5
    wall_strength: float = 50.0
    taper: float = 20.0
    probe: float = 1.5
    rtol: float = 1e-9
    restart: int = 300
    max_restarts: int = 20
    monitor_iterations: int = 20

    def grid(self, geometry: ScreenGeometry, spec: IncidenceSpec) -> SimulationGrid:
        medium = spec.medium(geometry)
        q = geometry.q if geometry.q > 0 else 0.05 * geometry.a
        d = np.sqrt(q / medium.k_real)
        return SimulationGrid(self.n_points, d / self.h_div, medium,
                              sponge_fraction=self.sponge_fraction,
                              sponge_strength=self.sponge_strength,
                              wall_strength=self.wall_strength)


@dataclass
class QuasiPeriodicSolution:
    spec: IncidenceSpec
    geometry: ScreenGeometry
    grid: SimulationGrid
    U1: np.ndarray
    U2: np.ndarray
    config: SolverConfig
    iterations: int = 0
    residual: float = 0.0
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EdgeValues:
    """Total-field values C[n, sheet] at (x_n - 0, 0) on sheets 1* and 2*."""

    n: tuple
    C1: np.ndarray
    C2: np.ndarray


class _PeriodMap:
    def __init__(self, spec, geometry, grid, config):
        k = grid.k
        th = spec.theta_in
        self.grid = grid
        self.a, self.b, self.q = geometry.a, geometry.b, geometry.q
        self.low = grid.lower
        taper = np.exp(-config.taper * grid.sigma)
        plane = np.exp(-1j * k * th * grid.y)
        self.jb = (np.exp(-1j * k * self.b * th * th / 2.0) * plane * taper)[self.low]
        self.ja = (np.exp(-1j * k * self.a * th * th / 2.0) * plane * taper)[self.low]
        self.floquet = np.exp(1j * k * self.a * th * th / 2.0)

    def prop(self, U, dx):
        if dx == 0:
            return U
        V = U.reshape(2, -1)
        V = self.grid.propagate(self.grid.propagate(V, dx / 2), dx / 2)
        return V.reshape(-1)

    def cut(self, U, jump):
        n = self.grid.n_points
        out = U.copy()
        l1 = U[:n][self.low]
        l2 = U[n:][self.low]
        out[:n][self.low] = l2 - jump
        out[n:][self.low] = l1 + jump
        return out

    def to_b(self, U, src):
        """State after the cut at x = b, starting from x = 0+."""
        return self.cut(self.prop(U, self.b), src * self.jb)

    def before_a(self, Ub):
        return self.prop(Ub, self.q)

    def __call__(self, U, src):
        Ub = self.to_b(U, src)
        return self.cut(self.before_a(Ub), src * self.ja) * self.floquet


def aperture_margin(spec: IncidenceSpec, geometry: ScreenGeometry, grid: SimulationGrid,
                    probe: float) -> float:
    """Free width beyond the probe line divided by the width the field needs there.

    Floquet phases cycle over about 2/(k a theta^2) cells; over that distance a
    wave spreads by s = sqrt(cells * a / k). The truncated incident jumps
    contaminate the probe lines unless the free margin exceeds several s.
    Values below 1 mean the coefficients are limited by the aperture.
    """
    th = abs(spec.theta_in)
    k = grid.medium.k_real
    cells = 2.0 / (k * geometry.a * th * th)
    spread = np.sqrt(cells * geometry.a / k)
    return float((grid.free_half_width - probe * geometry.a) / (APERTURE_FACTOR * spread))


def quasi_periodic_field(spec: IncidenceSpec, geometry: ScreenGeometry,
                         config: SolverConfig = SolverConfig()) -> QuasiPeriodicSolution:
    """Solve for the periodic scattered field at x = 0+ on both sheets."""
    if spec.absorption <= 0 and not geometry.unbranched:
        raise DomainError("the quasi-periodic solver needs absorption > 0")
    if spec.theta_in == 0:
        raise DomainError("theta_in must be positive")
    grid = config.grid(geometry, spec)
    n = grid.n_points
    md = {"grid": grid.metadata(), "solver": "gmres", "rtol": config.rtol,
          "restart": config.restart, "probe": config.probe, "taper": config.taper}
    if geometry.unbranched:
        z = np.zeros(n, dtype=complex)
        md["note"] = "no cuts: scattered field vanishes identically"
        return QuasiPeriodicSolution(spec, geometry, grid, z, z.copy(), config, 0, 0.0, md)
    margin = aperture_margin(spec, geometry, grid, config.probe)
    md["aperture_margin"] = margin
    if margin < 1.0:
        warnings.warn(f"transverse aperture too narrow for theta_in = {spec.theta_in.real:.4g} "
                      f"(margin {margin:.2f} < 1); widen the grid", ValidityWarning, stacklevel=2)
    pmap = _PeriodMap(spec, geometry, grid, config)
    f = pmap(np.zeros(2 * n, dtype=complex), 1.0)
    count = [0]

    def matvec(x):
        count[0] += 1
        return x - pmap(x, 0.0)

    if config.monitor_iterations > 0:
        md["contraction_ratio"] = _contraction_ratio(pmap, f, config.monitor_iterations)
    op = LinearOperator((2 * n, 2 * n), matvec=matvec, dtype=complex)
    t0 = time.perf_counter()
    x, info = gmres(op, f, rtol=config.rtol, restart=config.restart,
                    maxiter=config.max_restarts)
    resid = float(np.linalg.norm(matvec(x) - f) / np.linalg.norm(f))
    md["seconds"] = time.perf_counter() - t0
    md["iterations"] = count[0]
    md["residual"] = resid
    if info != 0 and resid > 10 * config.rtol:
        raise ContractionError(f"GMRES stopped with relative residual {resid:.2e}",
                               estimate=x, error=resid)
    return QuasiPeriodicSolution(spec, geometry, grid, x[:n].copy(), x[n:].copy(), config,
                                 count[0], resid, md)


def _contraction_ratio(pmap, f, iterations):
    """Ratio of successive update norms of the plain iteration U <- M U + f."""
    U = np.zeros_like(f)
    prev = ratio = None
    for _ in range(iterations):
        nxt = pmap(U, 0.0) + f
        step = np.linalg.norm(nxt - U)
        if prev:
            ratio = float(step / prev)
        prev, U = step, nxt
    return ratio


def contraction_ratio(spec: IncidenceSpec, geometry: ScreenGeometry,
                      config: SolverConfig = SolverConfig(), iterations=20):
    """Successive-iterate ratio of the plain fixed-point iteration after ``iterations`` steps."""
    grid = config.grid(geometry, spec)
    pmap = _PeriodMap(spec, geometry, grid, config)
    f = pmap(np.zeros(2 * grid.n_points, dtype=complex), 1.0)
    return _contraction_ratio(pmap, f, iterations)


def _segment_core(grid, spectrum, yy, x0, x1, rate0, n, a=1.0):
    """(1/a) int_{x0}^{x1} u(x, yy) e^{i(rate0 + 2 pi n/a) x} dx, exactly per spectral mode.

    ``spectrum`` is the FFT of u at x = x0; each mode evolves as
    exp(-i eta^2 (x - x0) / 2k).
    """
    beta = rate0 + 2.0 * np.pi * n / a
    c = spectrum * np.exp(1j * grid.eta * (yy - grid.y[0])) / grid.n_points
    w = 1j * beta - 1j * grid.eta ** 2 / (2.0 * grid.k)
    length = x1 - x0
    wl = w * length
    small = np.abs(wl) < 1e-8
    safe = np.where(small, 1.0, w)
    f = np.where(small, length * (1.0 + wl / 2.0), np.expm1(wl) / safe)
    return np.exp(1j * beta * x0) * np.sum(c * f) / a


def _incident_segment(k, th, yy, x0, x1, n, a):
    # incident wave times the Floquet weight: only the order-n Fourier factor survives
    w = 2j * np.pi * n / a
    f = (x1 - x0) if n == 0 else (np.exp(w * x1) - np.exp(w * x0)) / w
    return np.exp(-1j * k * th * yy) * f / a


def extract_coefficients(sol: QuasiPeriodicSolution, n_window=None) -> CoefficientTable:
    """Sheet-level coefficients R_nu[n], T_nu[n] from the converged field."""
    spec, geometry, grid = sol.spec, sol.geometry, sol.grid
    if n_window is None:
        n_window = default_window(spec)
    ns = np.array(list(n_window), dtype=int)
    a, b = geometry.a, geometry.b
    k = grid.k
    th = spec.theta_in
    ip = int(np.argmin(np.abs(grid.y - sol.config.probe * a)))
    yu = grid.y[ip]
    yl = -yu
    if yu > grid.free_half_width:
        raise DomainError("probe line lies inside the sponge")
    rate0 = k * th * th / 2.0
    n_pts = grid.n_points
    if geometry.unbranched:
        s01 = s02 = sb1 = sb2 = np.zeros(n_pts, dtype=complex)
    else:
        pmap = _PeriodMap(spec, geometry, grid, sol.config)
        U = np.concatenate([sol.U1, sol.U2])
        Ub = pmap.to_b(U, 1.0)
        s01, s02 = np.fft.fft(sol.U1), np.fft.fft(sol.U2)
        sb1, sb2 = np.fft.fft(Ub[:n_pts]), np.fft.fft(Ub[n_pts:])

    def seg(spectrum, yy, x0, x1, n):
        if x1 <= x0:
            return 0j
        return _segment_core(grid, spectrum, yy, x0, x1, rate0, n, a)

    out = {name: np.full(ns.size, np.nan + 0j) for name in ("R1", "T1", "R2", "T2")}
    psi = np.array([as_complex(floquet_angle(int(n), spec)) for n in ns])
    excluded = []
    for i, n in enumerate(ns):
        eu = np.exp(1j * k * psi[i] * yu)
        if abs(eu) < EVANESCENT_CUTOFF:
            excluded.append(int(n))
            continue
        inc_lo_gap = _incident_segment(k, th, yl, b, a, n, a)
        inc_lo_scr = _incident_segment(k, th, yl, 0.0, b, n, a)
        out["R1"][i] = (seg(s01, yu, 0, b, n) + seg(sb1, yu, b, a, n)) / eu
        out["R2"][i] = (seg(s02, yu, 0, b, n) + seg(sb2, yu, b, a, n)) / eu
        out["T1"][i] = (seg(s02, yl, 0, b, n) + seg(sb1, yl, b, a, n) + inc_lo_gap) / eu
        out["T2"][i] = (seg(s01, yl, 0, b, n) + inc_lo_scr + seg(sb2, yl, b, a, n)) / eu
    if excluded:
        warnings.warn(f"orders {excluded} are too evanescent at the probe line and were "
                      "left as NaN", ProbeWarning, stacklevel=2)
    prop = th.real ** 2 + 4.0 * np.pi * ns / spec.ka >= 0
    md = dict(sol.metadata)
    md.update({"probe_y": float(yu), "excluded_orders": excluded})
    table = CoefficientTable(n=ns, psi=psi, R1=out["R1"], T1=out["T1"], R2=out["R2"],
                             T2=out["T2"], theta_in=th, m=int(spec.m), propagating=prop,
                             pipeline="simulator", metadata=md)
    return waveguide_map(table, spec, geometry)


def quasi_periodic_solve(spec: IncidenceSpec, geometry: ScreenGeometry,
                         config: SolverConfig = SolverConfig(), n_window=None):
    """Solve and extract; returns (table, solution)."""
    sol = quasi_periodic_field(spec, geometry, config)
    return extract_coefficients(sol, n_window), sol


def edge_values_extract(sol: QuasiPeriodicSolution, orders=(0, 1, 2)) -> EdgeValues:
    """Total field at (x_n - 0, 0) on sheets 1* (scattered + incident) and 2*."""
    spec, geometry, grid = sol.spec, sol.geometry, sol.grid
    k = grid.k
    th = spec.theta_in
    n_pts = grid.n_points
    U = np.concatenate([sol.U1, sol.U2])
    if geometry.unbranched:
        before_b = before_a = U
        floquet = np.exp(1j * k * geometry.a * th * th / 2.0)
    else:
        pmap = _PeriodMap(spec, geometry, grid, sol.config)
        before_b = pmap.prop(U, geometry.b)
        before_a = pmap.before_a(pmap.cut(before_b, pmap.jb))
        floquet = pmap.floquet
    C1, C2 = [], []
    for n in orders:
        cell, r = divmod(int(n), 2)
        state = before_b if r else before_a
        shift = floquet ** (1 - cell) if not r else floquet ** (-cell)
        xn = geometry.branch_point(n)
        v1 = complex(grid.evaluate(state[:n_pts], 0.0)[0]) * shift
        v2 = complex(grid.evaluate(state[n_pts:], 0.0)[0]) * shift
        C1.append(v1 + np.exp(-1j * k * th * th * xn / 2.0))
        C2.append(v2)
    return EdgeValues(tuple(int(n) for n in orders), np.array(C1), np.array(C2))


def reciprocity_check(values: EdgeValues, directivity, spec: IncidenceSpec,
                      geometry: ScreenGeometry):
    """Relative defect of C1 - C2 = e^{-ik x_n theta^2/2} V_{1-n}(theta) per order.

    ``directivity`` maps l in {0, 1} to V_l(theta_in); V_{l+2} = V_l.
    """
    k = spec.medium(geometry).k
    th = spec.theta_in
    out = {}
    for n, c1, c2 in zip(values.n, values.C1, values.C2):
        v = directivity[(1 - n) % 2]
        pred = np.exp(-1j * k * geometry.branch_point(n) * th * th / 2.0) * v
        out[n] = float(abs(c1 - c2 - pred) / abs(v))
    return out


def write_metadata(sol: QuasiPeriodicSolution, path):
    """Dump the run metadata (grid, iterations, residual, settings) as JSON."""
    md = dict(sol.metadata)
    md["config"] = dict(sol.config.__dict__)
    md["theta_in"] = [sol.spec.theta_in.real, sol.spec.theta_in.imag]
    md["ka"] = sol.spec.ka
    md["absorption"] = sol.spec.absorption
    md["epsilon"] = sol.geometry.epsilon
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(md, fh, indent=2, sort_keys=True, default=str)
