"""Embedding formulas: scattering coefficients from edge directivities.

Sheet-level coefficients R1, T1, R2, T2 of every Floquet order n follow from
the directivities at the incidence slope and at the outgoing slope psi_n.
The n = 0 transmission coefficient has a vanishing denominator and is taken
from the phi-derivative form instead. A phase-shifted combination of the
sheet coefficients gives the waveguide-level coefficients Twg, Rwg.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import zeta

from .config import IncidenceSpec, ScreenGeometry, floquet_angle
from .core import ComplexAngle, as_complex
from .directivity import DirectivitySet, directivity_set
from .errors import DegenerateError, RegularizedPathRequired

__all__ = [
    "CoefficientTable",
    "FluxAudit",
    "reflection_coefficient",
    "transmission_coefficient",
    "transmission_zero",
    "transmission_zero_limit",
    "default_window",
    "build_table",
    "asymptotic_table",
    "waveguide_map",
    "flux_audit",
    "flux_tail",
    "GUARD_ORDERS",
]

GUARD_ORDERS = 4


@dataclass(frozen=True)
class CoefficientTable:
    """Scattering coefficients for a contiguous window of Floquet orders."""

    n: np.ndarray
    psi: np.ndarray
    R1: np.ndarray
    T1: np.ndarray
    R2: np.ndarray
    T2: np.ndarray
    theta_in: complex
    m: int
    propagating: np.ndarray
    Twg: np.ndarray = None
    Rwg: np.ndarray = None
    pipeline: str = "asymptotic"
    metadata: dict = field(default_factory=dict)

    @property
    def mode_index(self) -> np.ndarray:
        return self.m - 2 * self.n

    def index(self, n: int) -> int:
        hits = np.nonzero(self.n == n)[0]
        if hits.size == 0:
            raise KeyError(f"order {n} not in table window")
        return int(hits[0])

    def __getitem__(self, key):
        name, n = key
        return getattr(self, name)[self.index(n)]

    def physical_rows(self) -> np.ndarray:
        """Indices of rows with a physical waveguide mode (m - 2n >= 0)."""
        return np.nonzero(self.mode_index >= 0)[0]


@dataclass(frozen=True)
class FluxAudit:
    incoming: float
    outgoing: float
    defect: float
    tail: float = 0.0
    n_max: int = 0

    @property
    def relative(self) -> float:
        return self.defect / self.incoming


def _ika(spec: IncidenceSpec) -> complex:
    return 1j * spec.ka_complex


def _kb(spec: IncidenceSpec, geometry: ScreenGeometry) -> complex:
    return spec.ka_complex * geometry.b / geometry.a


def reflection_coefficient(n, D_in: DirectivitySet, D_n: DirectivitySet,
                           spec: IncidenceSpec, geometry: ScreenGeometry) -> complex:
    """R1[n]; the sheet-2 value is its negative."""
    th = spec.theta_in
    psi = as_complex(floquet_angle(n, spec))
    den = _ika(spec) * psi * (psi + th)
    if den == 0:
        raise DegenerateError("vanishing denominator in R1 (grazing incidence)")
    ph = np.exp(1j * _kb(spec, geometry) * (psi * psi - th * th) / 2.0)
    return complex((D_n.V0 * D_in.V1 + D_n.V1 * D_in.V0 * ph) / den)


def transmission_coefficient(n, D_in: DirectivitySet, D_n: DirectivitySet,
                             spec: IncidenceSpec, geometry: ScreenGeometry) -> complex:
    """T1[n] for n != 0; the sheet-2 value is its negative."""
    if n == 0:
        raise RegularizedPathRequired("T1[0] must come from transmission_zero")
    th = spec.theta_in
    psi = as_complex(floquet_angle(n, spec))
    den = _ika(spec) * psi * (th - psi)
    if den == 0:
        raise DegenerateError("vanishing denominator in T1")
    ph = np.exp(1j * _kb(spec, geometry) * (psi * psi - th * th) / 2.0)
    return complex((-D_n.V0 * D_in.V1 + D_n.V1 * D_in.V0 * ph) / den)


def transmission_zero(D_in: DirectivitySet, spec: IncidenceSpec,
                      geometry: ScreenGeometry) -> complex:
    """T1[0] = (V0' V1 - V1' V0) / (i k a theta_in); T2[0] = 1 - T1[0]."""
    th = spec.theta_in
    if th == 0:
        raise DegenerateError("T1[0] is undefined at theta_in = 0")
    return complex((D_in.V0_prime * D_in.V1 - D_in.V1_prime * D_in.V0) / (_ika(spec) * th))


def transmission_zero_limit(extended, spec: IncidenceSpec, delta=1e-6) -> complex:
    """T1[0] from the phi-limit form by a one-sided finite difference.

    ``extended(l, theta, phi)`` returns the extended directivity V_l(theta, phi).
    """
    th = spec.theta_in
    v0 = extended(0, th, th)
    v1 = extended(1, th, th)
    v0d = extended(0, th, th + delta)
    v1d = extended(1, th, th + delta)
    return complex((v0d * v1 - v1d * v0) / (_ika(spec) * th * delta))


def default_window(spec: IncidenceSpec):
    """All orders reaching a physical mode (m - 2n >= 0) plus evanescent guards."""
    th2 = spec.theta_in.real ** 2
    n_first = int(np.ceil(-th2 * spec.ka / (4.0 * np.pi)))
    n_lo = n_first - GUARD_ORDERS
    n_hi = max(spec.m // 2, n_first)
    return range(n_lo, n_hi + 1)


def build_table(spec: IncidenceSpec, geometry: ScreenGeometry, provider, n_window=None,
                pipeline="asymptotic", metadata=None) -> CoefficientTable:
    """Evaluate the embedding formulas with directivities from ``provider(angle)``."""
    if n_window is None:
        n_window = default_window(spec)
    ns = np.array(list(n_window), dtype=int)
    th = spec.theta_in
    d_in = provider(ComplexAngle(th))
    psi = np.array([as_complex(floquet_angle(int(n), spec)) for n in ns])
    R1 = np.empty(ns.size, dtype=complex)
    T1 = np.empty(ns.size, dtype=complex)
    for i, n in enumerate(ns):
        d_n = d_in if n == 0 else provider(ComplexAngle(psi[i], "upper"))
        R1[i] = reflection_coefficient(int(n), d_in, d_n, spec, geometry)
        if n == 0:
            T1[i] = transmission_zero(d_in, spec, geometry)
        else:
            T1[i] = transmission_coefficient(int(n), d_in, d_n, spec, geometry)
    R2 = -R1
    T2 = -T1
    T2[ns == 0] = 1.0 - T1[ns == 0]
    prop = th.real ** 2 + 4.0 * np.pi * ns / spec.ka >= 0
    table = CoefficientTable(n=ns, psi=psi, R1=R1, T1=T1, R2=R2, T2=T2, theta_in=th,
                             m=int(spec.m), propagating=prop, pipeline=pipeline,
                             metadata=dict(metadata or {}))
    return waveguide_map(table, spec, geometry)


def asymptotic_table(spec: IncidenceSpec, geometry: ScreenGeometry, n_window=None) -> CoefficientTable:
    """Coefficient table from the small-gap closed-form directivities."""
    return build_table(spec, geometry, lambda ang: directivity_set(ang, spec, geometry),
                       n_window, pipeline="asymptotic")


def waveguide_map(table: CoefficientTable, spec: IncidenceSpec,
                  geometry: ScreenGeometry) -> CoefficientTable:
    """Twg[n] = e^{i pi n eps} (T1 + R2), Rwg[n] = e^{i pi n eps} (R1 + T2).

    Only the forward (parabolic) coupling is mapped; backscatter into the
    mirrored modes is outside the model and not represented.
    """
    phase = np.exp(1j * np.pi * table.n * geometry.epsilon)
    Twg = phase * (table.T1 + table.R2)
    Rwg = phase * (table.R1 + table.T2)
    md = dict(table.metadata)
    md["waveguide_phase"] = "exp(i*pi*n*epsilon), n = table order"
    return replace(table, Twg=Twg, Rwg=Rwg, metadata=md)


def _order_flux(table: CoefficientTable) -> np.ndarray:
    return table.psi.real * (np.abs(table.R1) ** 2 + np.abs(table.R2) ** 2
                             + np.abs(table.T1) ** 2 + np.abs(table.T2) ** 2)


def flux_tail(n, f, fit_from, powers=(1.5, 2.5)) -> float:
    """Outgoing flux beyond the last order, fitting f_n ~ sum_j A_j n^{-p_j}.

    The fit uses orders n >= fit_from; the tail is summed with Hurwitz zeta.
    """
    n = np.asarray(n, dtype=float)
    f = np.asarray(f, dtype=float)
    sel = n >= fit_from
    basis = np.stack([n[sel] ** (-p) for p in powers], axis=1)
    coef, *_ = np.linalg.lstsq(basis, f[sel], rcond=None)
    n_last = n.max()
    return float(sum(c * zeta(p, n_last + 1.0) for c, p in zip(coef, powers)))


def flux_audit(table: CoefficientTable, spec: IncidenceSpec, tail_fit_from=None) -> FluxAudit:
    """Flux balance over the propagating orders of the table.

    With ``tail_fit_from`` the flux carried by orders beyond the window is
    estimated from a power-law fit and counted as outgoing.
    """
    incoming = float(spec.theta_in.real)
    sel = table.propagating
    f = _order_flux(table)[sel]
    outgoing = float(np.sum(f))
    tail = 0.0
    if tail_fit_from is not None:
        ns = table.n[sel]
        pos = ns >= 1
        tail = flux_tail(ns[pos], f[pos], tail_fit_from)
    out = outgoing + tail
    return FluxAudit(incoming=incoming, outgoing=out, defect=incoming - out, tail=tail,
                     n_max=int(table.n[sel].max()) if np.any(sel) else 0)
