"""Edge Green's functions by spectral marching and numeric directivities.

The edge Green's function w_l is stored as a single array for sheet 1* (sheet
2* carries its negative), so crossing a cut only negates the lower half.
Directivities are assembled from shore integrals at the cuts. Each pair of
consecutive cuts x_{2m-1}, x_{2m} contributes

    D_m(phi) = int_{y<0} (v - e^{ik(a-b)phi^2/2} P v) e^{-ik phi y} dy,

with v the field just after the cut at x_{2m-1} and P free propagation over
the gap. The pair terms decay like z^m m^{-s} with z = exp(i k a theta^2/2),
so the truncated series is completed by a fitted polylogarithmic tail.
"""

import warnings
from dataclasses import dataclass, field

from typing import Optional

import numpy as np

from ..config import ScreenGeometry
from ..core import ComplexAngle, MediumParams, as_complex, green_function
from ..directivity import DirectivitySet
from ..errors import DomainError, TruncationWarning
from ..special import fit_powerlaw_tail
from .grid import FieldSlice, SimulationGrid, green_slice

__all__ = ["EdgeConfig", "EdgeGreenRun", "edge_green_march", "directivity_numeric",
           "directivity_extended_numeric", "directivity_derivative_numeric",
           "numeric_directivity_set", "numeric_directivities", "sigma_richardson_check"]

TAIL_POWERS = (0.5, 1.5, 2.5)
MIN_CELLS = 64
MAX_CELLS = 4096
MAX_TAIL_SHARE = 0.5


@dataclass(frozen=True)
class EdgeConfig:
    """Discretisation of an edge march; lengths are in units of the period a."""

    n_cells: Optional[int] = None
    sigma: float = 1e-3
    half_width: float = 40.0
    h_div: float = 16.0
    sponge_fraction: float = 0.3
    sponge_strength: float = 0.5
    wall_strength: float = 50.0
    store_slices: bool = False
    tail_tolerance: float = 1e-3

    def cells_for(self, geometry: ScreenGeometry, medium: MediumParams, phis) -> int:
        """Cell count: fixed if given, else enough to reach the power-law regime.

        The pair terms settle into z^m m^{-s} after about 1/|log z| cells with
        z = exp(i k a phi^2 / 2), so the march covers half of that scale.
        """
        if self.n_cells is not None:
            return int(self.n_cells)
        phis = np.abs(np.asarray(phis, dtype=complex))
        phis = phis[phis > 0]
        if phis.size == 0:
            return MIN_CELLS
        rate = medium.k_real * geometry.a * phis.min() ** 2 / 2.0
        need = max(0.5 / rate, 1.0)
        return int(min(MAX_CELLS, max(MIN_CELLS, 1 << int(np.ceil(np.log2(need))))))

    def grid(self, geometry: ScreenGeometry, medium: MediumParams) -> SimulationGrid:
        q = geometry.q if geometry.q > 0 else geometry.a * 1e-2
        d = np.sqrt(q / medium.k_real)
        return SimulationGrid.from_half_width(
            self.half_width * geometry.a, d / self.h_div, medium,
            sponge_fraction=self.sponge_fraction, sponge_strength=self.sponge_strength,
            wall_strength=self.wall_strength)


@dataclass
class EdgeGreenRun:
    """Shore projections of one edge march.

    ``Ev``, ``EPv``, ``Edv``, ``EdPv`` have shape (n_cells, n_phi) and hold
    the projections of v and P v (and their phi-derivative weights) for
    every cell; ``lead`` holds the single leading term of w_1.
    """

    l: int
    sigma: float
    geometry: ScreenGeometry
    medium: MediumParams
    grid: SimulationGrid
    phis: np.ndarray
    x_rel: np.ndarray
    Ev: np.ndarray
    EPv: np.ndarray
    Edv: np.ndarray
    EdPv: np.ndarray
    lead: np.ndarray
    lead_d: np.ndarray
    farfield: np.ndarray
    slices: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def phi_index(self, phi) -> int:
        ph = as_complex(phi)
        hits = np.nonzero(np.abs(self.phis - ph) <= 1e-12 * max(1.0, abs(ph)))[0]
        if hits.size == 0:
            raise DomainError(f"angle {ph} was not projected during the march; "
                              "pass it in `phis`")
        return int(hits[0])


def edge_green_march(l, geometry: ScreenGeometry, medium: MediumParams,
                     config: EdgeConfig = EdgeConfig(), phis=()) -> EdgeGreenRun:
    """March the edge Green's function w_l (l = 0 or 1) across ``n_cells`` periods."""
    if l not in (0, 1):
        raise DomainError("edge index must be 0 or 1")
    a = geometry.a
    if not (1e-4 * a <= config.sigma <= 1e-2 * a):
        raise DomainError("source offset must lie in [1e-4 a, 1e-2 a]")
    if l == 1 and geometry.unbranched:
        raise DomainError("w_1 is undefined when the gap closes")
    first = geometry.b if l == 0 else geometry.q
    if config.sigma >= first:
        raise DomainError("source offset exceeds the distance to the next cut")
    grid = config.grid(geometry, medium)
    k = medium.k
    q, b = geometry.q, geometry.b
    phis = np.atleast_1d(np.asarray(phis, dtype=complex))
    low = grid.lower
    yl = grid.y[low]
    E = np.exp(-1j * k * np.outer(phis, yl)) * grid.h
    Ed = E * (-1j * k * yl)
    n_phi = phis.size
    ncell = config.cells_for(geometry, medium, phis)

    slc = green_slice(grid, config.sigma, x_pos=geometry.branch_point(l))
    u = grid.propagate(slc.values, first - config.sigma)
    x = first
    slices = []

    def keep(vals, xpos):
        if config.store_slices:
            slices.append(FieldSlice(grid, vals.copy(), xpos + geometry.branch_point(l)))

    lead = np.zeros(n_phi, dtype=complex)
    lead_d = np.zeros(n_phi, dtype=complex)
    if l == 1:
        lead = -(E @ u[low])
        lead_d = -(Ed @ u[low])
        u[low] *= -1.0
        keep(u, x)
        u = grid.propagate(grid.propagate(u, b / 2), b / 2)
        x += b

    # far-field sampling distance per angle, kept inside the sponge-free zone
    x_ff = np.full(n_phi, np.nan)
    re = np.abs(phis.real)
    with np.errstate(divide="ignore"):
        reach = np.where(re > 0, 0.5 * grid.free_half_width / re, np.inf)
    x_ff = np.minimum(reach, x + ncell * a)
    farfield = np.full(n_phi, np.nan + 0j)

    x_rel = np.empty(ncell)
    Ev = np.empty((ncell, n_phi), dtype=complex)
    EPv = np.empty_like(Ev)
    Edv = np.empty_like(Ev)
    EdPv = np.empty_like(Ev)
    for m in range(ncell):
        u[low] *= -1.0
        if q > 0:  # with no gap the two cuts coincide and cancel
            keep(u, x)
        x_rel[m] = x
        pv = grid.propagate(u, q, sponge=False)
        Ev[m] = E @ u[low]
        EPv[m] = E @ pv[low]
        Edv[m] = Ed @ u[low]
        EdPv[m] = Ed @ pv[low]
        u = grid.propagate(u, q)
        u[low] *= -1.0
        keep(u, x + q)
        u = grid.propagate(grid.propagate(u, b / 2), b / 2)
        x += a
        due = np.nonzero(np.isnan(farfield.real) & (x >= x_ff - 1e-12))[0]
        if due.size:
            spec = np.fft.fft(u)
            yy = (phis[due].real * x)
            vals = grid.evaluate(u, yy, spec)
            farfield[due] = vals / green_function(x, yy, medium)

    md = {"grid": grid.metadata(), "n_cells": ncell, "sigma": config.sigma,
          "tail_tolerance": config.tail_tolerance,
          "first_step": first, "source": "band-limited G(sigma, y)"}
    return EdgeGreenRun(l=l, sigma=config.sigma, geometry=geometry, medium=medium, grid=grid,
                        phis=phis, x_rel=x_rel, Ev=Ev, EPv=EPv, Edv=Edv, EdPv=EdPv,
                        lead=lead, lead_d=lead_d, farfield=farfield, slices=slices, metadata=md)


def _series(run: EdgeGreenRun, theta, j, derivative):
    k = run.medium.k
    q = run.geometry.q
    ph = run.phis[j]
    g = np.exp(1j * k * q * ph * ph / 2.0)
    phase = np.exp(1j * k * run.x_rel * theta * theta / 2.0)
    if not derivative:
        terms = 2.0 * phase * (run.Ev[:, j] - g * run.EPv[:, j])
        lam = np.exp(1j * k * q * (ph * ph - theta * theta) / 2.0)
        base = lam if run.l == 0 else 1.0
        head = base + (2.0 * g * run.lead[j] if run.l == 1 else 0.0)
    else:
        terms = 2.0 * phase * (run.Edv[:, j] - g * run.EdPv[:, j]
                               - 1j * k * q * ph * g * run.EPv[:, j])
        lam = np.exp(1j * k * q * (ph * ph - theta * theta) / 2.0)
        base = 1j * k * q * ph * lam if run.l == 0 else 0.0
        head = base
        if run.l == 1:
            head = head + 2.0 * g * (run.lead_d[j] + 1j * k * q * ph * run.lead[j])
    return head, terms


def _sum_with_tail(run, theta, head, terms, n_terms):
    if n_terms is not None:
        if n_terms > terms.shape[0]:
            raise DomainError("n_terms exceeds the number of marched cells")
        terms = terms[:n_terms]
    z = np.exp(1j * run.medium.k * run.geometry.a * theta * theta / 2.0)
    if terms.shape[0] >= 8 and not run.geometry.unbranched:
        tail, _, misfit = fit_powerlaw_tail(terms, z, TAIL_POWERS)
    else:
        tail, misfit = 0j, 0.0
    value = head + terms.sum() + tail
    return complex(value), complex(tail), misfit


def directivity_extended_numeric(run: EdgeGreenRun, theta, phi, n_terms=None,
                                 return_tail=False):
    """Extended directivity V_l(theta, phi) from the shore-integral series."""
    th = as_complex(theta)
    j = run.phi_index(phi)
    head, terms = _series(run, th, j, False)
    value, tail, misfit = _sum_with_tail(run, th, head, terms, n_terms)
    # warn when the value is mostly extrapolation or the extrapolation is uncertain
    scale = max(abs(value), 1e-30)
    if (abs(tail) > MAX_TAIL_SHARE * scale
            or misfit * abs(tail) > run.metadata.get("tail_tolerance", 1e-3) * scale):
        warnings.warn(f"directivity tail {abs(tail):.2e} (value {abs(value):.2e}, fit misfit "
                      f"{misfit:.2e}); march more cells", TruncationWarning, stacklevel=2)
    if return_tail:
        return value, tail
    return value


def directivity_numeric(run: EdgeGreenRun, theta, n_terms=None, return_tail=False):
    """Directivity V_l(theta) = V_l(theta, theta)."""
    return directivity_extended_numeric(run, theta, theta, n_terms, return_tail)


def directivity_derivative_numeric(run: EdgeGreenRun, theta, n_terms=None):
    """d/dphi V_l(theta, phi) at phi = theta, differentiating the series termwise."""
    th = as_complex(theta)
    j = run.phi_index(th)
    head, terms = _series(run, th, j, True)
    value, _, _ = _sum_with_tail(run, th, head, terms, n_terms)
    return value


def numeric_directivity_set(run0: EdgeGreenRun, run1: EdgeGreenRun, theta) -> DirectivitySet:
    th = as_complex(theta)
    angle = theta if isinstance(theta, ComplexAngle) else ComplexAngle(th)
    return DirectivitySet(
        V0=directivity_numeric(run0, th),
        V1=directivity_numeric(run1, th),
        V0_prime=directivity_derivative_numeric(run0, th),
        V1_prime=directivity_derivative_numeric(run1, th),
        theta=angle,
        source="numeric",
    )


def numeric_directivities(geometry, medium, angles, config: EdgeConfig = EdgeConfig()):
    """Run both edge marches projecting onto ``angles``; returns (run0, run1)."""
    angles = np.atleast_1d(np.asarray([as_complex(a) for a in angles], dtype=complex))
    run0 = edge_green_march(0, geometry, medium, config, angles)
    run1 = edge_green_march(1, geometry, medium, config, angles)
    return run0, run1


def sigma_richardson_check(l, geometry, medium, config: EdgeConfig, theta):
    """Relative change of V_l(theta) when the source offset is halved."""
    th = as_complex(theta)
    v1 = directivity_numeric(edge_green_march(l, geometry, medium, config, [th]), th)
    half = EdgeConfig(**{**config.__dict__, "sigma": config.sigma / 2})
    v2 = directivity_numeric(edge_green_march(l, geometry, medium, half, [th]), th)
    return float(abs(v1 - v2) / abs(v1))
