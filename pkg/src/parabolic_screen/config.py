"""Geometry, incidence, Floquet orders, regime diagnostics and JSON configs."""

import json
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .core import ComplexAngle, MediumParams, as_complex, sqrt_upper
from .errors import ConfigError, DomainError, ValidityWarning

__all__ = [
    "ScreenGeometry",
    "IncidenceSpec",
    "RegimeScales",
    "Regime",
    "regime_scales",
    "floquet_angle",
    "propagating_orders",
    "regime_classify",
    "validity_warnings",
    "ThetaScan",
    "RunConfig",
    "load_config",
    "parse_config",
    "REGIME_FACTOR",
]

REGIME_FACTOR = 3.0
SMALL_GAP_LIMIT = 0.2


@dataclass(frozen=True)
class ScreenGeometry:
    """Period ``a`` and screen width ``b`` of the periodic screen array.

    ``b == a`` (zero gap) is accepted as the unbranched limiting case.
    """

    a: float = 1.0
    b: float = 0.95

    def __post_init__(self):
        if not (self.a > 0 and 0 < self.b <= self.a):
            raise DomainError(f"need 0 < b <= a, got a={self.a}, b={self.b}")

    @classmethod
    def from_epsilon(cls, epsilon, a=1.0):
        if not (0.0 <= epsilon < 1.0):
            raise DomainError(f"gap ratio must lie in [0, 1), got {epsilon}")
        return cls(a=a, b=a * (1.0 - epsilon))

    @property
    def epsilon(self) -> float:
        return (self.a - self.b) / self.a

    @property
    def q(self) -> float:
        """Gap width a - b."""
        return self.a - self.b

    @property
    def unbranched(self) -> bool:
        return self.b == self.a

    def branch_point(self, n: int) -> float:
        """Abscissa x_n: a*m for n = 2m and a*m + b for n = 2m + 1."""
        m, r = divmod(int(n), 2)
        return self.a * m + (self.b if r else 0.0)


@dataclass(frozen=True)
class IncidenceSpec:
    """Incident wave: parabolic slope, waveguide mode index and ka.

    ``absorption`` sets k = k_real (1 + i*absorption) for every quantity that
    depends on the incidence (Floquet angles, phases).
    """

    theta_in: complex
    ka: float
    m: int = 0
    absorption: float = 0.0
    validity_ceiling: float = 3.0

    def __post_init__(self):
        th = as_complex(self.theta_in)
        object.__setattr__(self, "theta_in", th)
        if th.real < 0 or (th.real == 0 and th.imag != 0):
            raise DomainError("theta_in must have a positive real part")
        if not self.ka > 0:
            raise DomainError("ka must be positive")
        if int(self.m) != self.m or self.m < 0:
            raise DomainError("mode index m must be a non-negative integer")
        if not (0.0 <= self.absorption < 0.1):
            raise DomainError("absorption must lie in [0, 0.1)")

    @property
    def ka_complex(self) -> complex:
        return complex(self.ka * (1.0 + 1j * self.absorption))

    def medium(self, geometry: ScreenGeometry) -> MediumParams:
        return MediumParams(k_real=self.ka / geometry.a, absorption=self.absorption)

    @property
    def helmholtz_angle(self) -> float:
        """Helmholtz incidence angle with cos(angle) = 1 - theta_in**2 / 2 (metadata)."""
        c = 1.0 - self.theta_in.real ** 2 / 2.0
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    def with_theta(self, theta) -> "IncidenceSpec":
        return IncidenceSpec(theta, self.ka, self.m, self.absorption, self.validity_ceiling)


@dataclass(frozen=True)
class RegimeScales:
    crossover: float
    theta_seg: float
    diffraction_width: float


class Regime(str, Enum):
    TRANSMISSION = "transmission"
    REFLECTION = "reflection"
    CROSSOVER = "crossover"


def regime_scales(spec: IncidenceSpec, geometry: ScreenGeometry) -> RegimeScales:
    eps = geometry.epsilon
    k = spec.ka / geometry.a
    q = geometry.q
    theta_seg = np.inf if q == 0 else 1.0 / np.sqrt(k * q)
    return RegimeScales(
        crossover=float(np.sqrt(eps / spec.ka)),
        theta_seg=float(theta_seg),
        diffraction_width=float(np.sqrt(q / k)),
    )


def floquet_angle(n: int, spec: IncidenceSpec) -> ComplexAngle:
    """Floquet slope psi_n = sqrt(theta_in^2 + 4 pi n / (k a)) with Im(k psi_n) >= 0."""
    if n == 0:
        return ComplexAngle(spec.theta_in, "given")
    kac = spec.ka_complex
    z = spec.theta_in ** 2 + 4.0 * np.pi * n / kac
    return ComplexAngle(complex(sqrt_upper(z, kac)), "upper")


def propagating_orders(spec, n_range, ka=None):
    """Orders n in ``n_range`` with theta^2 + 4 pi n / ka >= 0 at real k.

    ``spec`` may be an :class:`IncidenceSpec` or a bare real angle (then ``ka``
    is required).
    """
    if isinstance(spec, IncidenceSpec):
        theta = spec.theta_in.real
        ka = spec.ka
    else:
        theta = float(spec)
        if ka is None:
            raise DomainError("ka required when a bare angle is given")
    return [int(n) for n in n_range if theta ** 2 + 4.0 * np.pi * n / ka >= 0.0]


def regime_classify(spec: IncidenceSpec, geometry: ScreenGeometry,
                    factor: float = REGIME_FACTOR) -> Regime:
    """Transmission below crossover/factor, reflection above factor*crossover."""
    if geometry.epsilon > SMALL_GAP_LIMIT:
        warnings.warn(f"gap ratio {geometry.epsilon:g} is not small; regime labels "
                      "assume a narrow gap", ValidityWarning, stacklevel=2)
    c = regime_scales(spec, geometry).crossover
    th = spec.theta_in.real
    if th < c / factor:
        return Regime.TRANSMISSION
    if th > factor * c:
        return Regime.REFLECTION
    return Regime.CROSSOVER


def validity_warnings(spec: IncidenceSpec, geometry: ScreenGeometry):
    """List of human-readable validity notes for this parameter set."""
    notes = []
    th = abs(spec.theta_in)
    if np.sqrt(spec.ka) * th > spec.validity_ceiling:
        notes.append(f"sqrt(ka)*theta = {np.sqrt(spec.ka) * th:.4g} exceeds "
                     f"validity ceiling {spec.validity_ceiling:g}")
    if geometry.epsilon > SMALL_GAP_LIMIT:
        notes.append(f"gap ratio {geometry.epsilon:.4g} is not small")
    return notes


# ---------------------------------------------------------------- JSON configs

@dataclass(frozen=True)
class ThetaScan:
    min: float
    max: float
    count: int
    spacing: str = "log"

    def values(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros(0)
        if self.count == 1:
            return np.array([self.min])
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class RunConfig:
    """Parsed JSON run configuration (lengths normalised to a = 1)."""

    ka: float
    epsilon: float
    m: int
    absorption: float
    theta_scan: Optional[ThetaScan]
    theta_in: Optional[float] = None
    validity_ceiling: float = 3.0
    simulator: dict = field(default_factory=dict)
    source_text: str = ""

    @property
    def geometry(self) -> ScreenGeometry:
        return ScreenGeometry.from_epsilon(self.epsilon)

    def thetas(self) -> np.ndarray:
        vals = [] if self.theta_scan is None else list(self.theta_scan.values())
        if self.theta_in is not None:
            vals.append(self.theta_in)
        return np.array(sorted(set(float(v) for v in vals)))

    def spec(self, theta) -> IncidenceSpec:
        return IncidenceSpec(theta, self.ka, self.m, self.absorption, self.validity_ceiling)

    def canonical(self) -> dict:
        d = {"ka": self.ka, "epsilon": self.epsilon, "m": self.m,
             "absorption": self.absorption, "validity_ceiling": self.validity_ceiling}
        if self.theta_scan is not None:
            s = self.theta_scan
            d["theta_scan"] = {"min": s.min, "max": s.max, "count": s.count,
                               "spacing": s.spacing}
        if self.theta_in is not None:
            d["theta_in"] = self.theta_in
        if self.simulator:
            d["simulator"] = self.simulator
        return d


_KNOWN_KEYS = {"ka", "epsilon", "m", "absorption", "theta_scan", "theta_in",
               "validity_ceiling", "simulator"}


def _line_of(text, key):
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


def _number(obj, key, text, lo=None, hi=None, integer=False, lo_open=False):
    if key not in obj:
        raise ConfigError(f"missing required key '{key}'", 1)
    v = obj[key]
    line = _line_of(text, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {v!r}", line)
    if integer and int(v) != v:
        raise ConfigError(f"'{key}' must be an integer, got {v!r}", line)
    if not np.isfinite(v):
        raise ConfigError(f"'{key}' must be finite", line)
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(f"'{key}' = {v!r} is below the allowed range", line)
    if hi is not None and v >= hi:
        raise ConfigError(f"'{key}' = {v!r} is above the allowed range", line)
    return int(v) if integer else float(v)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON configuration string."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(obj, dict):
        raise ConfigError("top level must be a JSON object", 1)
    for key in obj:
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key '{key}'", _line_of(text, key))
    ka = _number(obj, "ka", text, lo=0.0, lo_open=True)
    eps = _number(obj, "epsilon", text, lo=0.0, hi=1.0)
    m = _number(obj, "m", text, lo=0, integer=True)
    absorption = _number(obj, "absorption", text, lo=0.0, hi=0.1) if "absorption" in obj else 0.0
    ceiling = (_number(obj, "validity_ceiling", text, lo=0.0, lo_open=True)
               if "validity_ceiling" in obj else 3.0)
    theta_in = None
    if "theta_in" in obj:
        theta_in = _number(obj, "theta_in", text, lo=0.0, lo_open=True)
    scan = None
    if "theta_scan" in obj:
        s = obj["theta_scan"]
        line = _line_of(text, "theta_scan")
        if not isinstance(s, dict):
            raise ConfigError("'theta_scan' must be an object", line)
        for key in s:
            if key not in ("min", "max", "count", "spacing"):
                raise ConfigError(f"unknown key '{key}' in theta_scan", _line_of(text, key))
        for key in ("min", "max", "count"):
            if key not in s:
                raise ConfigError(f"theta_scan is missing '{key}'", line)
        tmin = _number(s, "min", text, lo=0.0, lo_open=True)
        tmax = _number(s, "max", text, lo=0.0, lo_open=True)
        count = _number(s, "count", text, lo=0, integer=True)
        spacing = s.get("spacing", "log")
        if spacing not in ("log", "linear"):
            raise ConfigError("'spacing' must be 'log' or 'linear'", _line_of(text, "spacing"))
        if tmax < tmin:
            raise ConfigError("theta_scan max is below min", _line_of(text, "max"))
        scan = ThetaScan(tmin, tmax, count, spacing)
    sim = obj.get("simulator", {})
    if not isinstance(sim, dict):
        raise ConfigError("'simulator' must be an object", _line_of(text, "simulator"))
    cfg = RunConfig(ka=ka, epsilon=eps, m=m, absorption=absorption, theta_scan=scan,
                    theta_in=theta_in, validity_ceiling=ceiling, simulator=dict(sim),
                    source_text=text)
    if cfg.thetas().size == 0:
        raise ConfigError("empty theta grid: give theta_scan with count > 0 or theta_in",
                          _line_of(text, "theta_scan") or _line_of(text, "count") or 1)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)
