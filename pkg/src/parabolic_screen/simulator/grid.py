"""Transverse grid, spectral propagator, absorbing sponge and cut operator."""

from dataclasses import dataclass, replace

import numpy as np

from ..core import MediumParams
from ..errors import DomainError, ResolutionError

__all__ = ["SimulationGrid", "FieldSlice", "propagate_slice", "apply_cut",
           "delta_slice", "green_slice", "dump_slices_csv"]


class SimulationGrid:
    """Uniform grid y_j = (j - N/2 + 1/2) h, symmetric about y = 0.

    The sponge damping rate is sigma(y) = strength*f + wall*f**4 with
    f = exp(1 - 1/s) and s the normalised depth into the outer layer. The
    gentle part absorbs grazing waves, the steep wall stops waves that would
    otherwise wrap around the periodic FFT domain.
    """

    def __init__(self, n_points, h, medium: MediumParams, sponge_fraction=0.3,
                 sponge_strength=0.5, wall_strength=50.0):
        n_points = int(n_points)
        if n_points < 16 or n_points & (n_points - 1):
            raise DomainError("number of grid points must be a power of two >= 16")
        if not h > 0:
            raise DomainError("grid step must be positive")
        if not (0.0 <= sponge_fraction < 1.0):
            raise DomainError("sponge fraction must lie in [0, 1)")
        self.n_points = n_points
        self.h = float(h)
        self.medium = medium
        self.k = medium.k
        self.half_width = n_points * self.h / 2.0
        self.sponge_fraction = float(sponge_fraction)
        self.sponge_strength = float(sponge_strength)
        self.wall_strength = float(wall_strength)
        self.y = (np.arange(n_points) - n_points / 2 + 0.5) * self.h
        self.eta = 2.0 * np.pi * np.fft.fftfreq(n_points, self.h)
        self.lower = self.y < 0
        width = self.sponge_fraction * self.half_width
        if width > 0:
            s = np.clip((np.abs(self.y) - (self.half_width - width)) / width, 0.0, 1.0)
            with np.errstate(divide="ignore"):
                f = np.where(s > 0, np.exp(1.0 - 1.0 / np.maximum(s, 1e-300)), 0.0)
        else:
            f = np.zeros(n_points)
        self.sigma = self.sponge_strength * f + self.wall_strength * f ** 4
        self._cache = {}

    @classmethod
    def from_half_width(cls, half_width, h, medium, **kw):
        n = 1 << int(np.ceil(np.log2(2.0 * half_width / h)))
        return cls(n, h, medium, **kw)

    @property
    def free_half_width(self) -> float:
        """Half-width of the sponge-free interior."""
        return self.half_width * (1.0 - self.sponge_fraction)

    def transfer(self, dx):
        key = round(float(dx), 14)
        if key not in self._cache:
            if len(self._cache) > 32:
                self._cache.clear()
            self._cache[key] = (np.exp(-1j * self.eta ** 2 * dx / (2.0 * self.k)),
                                np.exp(-self.sigma * dx))
        return self._cache[key]

    def propagate(self, u, dx, sponge=True):
        """Exact band-limited free propagation over dx, then sponge damping."""
        if dx == 0:
            return np.array(u, dtype=complex, copy=True)
        phase, damp = self.transfer(dx)
        out = np.fft.ifft(phase * np.fft.fft(u, axis=-1), axis=-1)
        return out * damp if sponge else out

    def evaluate(self, u, yy, spectrum=None):
        """Trigonometric interpolation of grid samples ``u`` at points ``yy``."""
        if spectrum is None:
            spectrum = np.fft.fft(u)
        yy = np.atleast_1d(np.asarray(yy, dtype=float))
        basis = np.exp(1j * np.outer(yy - self.y[0], self.eta))
        return basis @ spectrum / self.n_points

    def alias_fraction(self, u) -> float:
        """Share of spectral energy in the top quarter of the resolved band."""
        spec = np.abs(np.fft.fft(u)) ** 2
        tot = spec.sum()
        if tot == 0:
            return 0.0
        top = np.abs(self.eta) > 0.75 * np.pi / self.h
        return float(spec[top].sum() / tot)

    def metadata(self) -> dict:
        return {"n_points": self.n_points, "h": self.h, "half_width": self.half_width,
                "sponge_fraction": self.sponge_fraction,
                "sponge_strength": self.sponge_strength,
                "wall_strength": self.wall_strength}


@dataclass(frozen=True)
class FieldSlice:
    """Samples of the field on the transverse grid at axial position ``x_pos``.

    ``sheet_convention`` is ``"antisymmetric"`` for the single-array form in
    which the second sheet carries the negative of the stored array.
    """

    grid: SimulationGrid
    values: np.ndarray
    x_pos: float
    sheet_convention: str = "antisymmetric"


def propagate_slice(slc: FieldSlice, dx, sponge=True, alias_threshold=None) -> FieldSlice:
    """Propagate a slice by dx > 0 through a strip free of cuts."""
    if not dx > 0:
        raise DomainError("propagation step must be positive")
    out = slc.grid.propagate(slc.values, dx, sponge=sponge)
    if alias_threshold is not None:
        frac = slc.grid.alias_fraction(out)
        if frac > alias_threshold:
            raise ResolutionError(f"aliasing monitor: {frac:.3g} of spectral energy "
                                  f"near the band edge", estimate=frac)
    return replace(slc, values=out, x_pos=slc.x_pos + dx)


def apply_cut(slc: FieldSlice) -> FieldSlice:
    """Cross a cut: negate the samples with y < 0."""
    vals = slc.values.copy()
    vals[slc.grid.lower] *= -1.0
    return replace(slc, values=vals)


def delta_slice(grid: SimulationGrid, x_pos=0.0) -> FieldSlice:
    """Band-limited unit point source at y = 0."""
    return green_slice(grid, 0.0, x_pos)


def green_slice(grid: SimulationGrid, dist, x_pos=0.0) -> FieldSlice:
    """Band-limited G(dist, y) on the grid (a delta for dist = 0)."""
    spec = np.exp(-1j * grid.eta ** 2 * dist / (2.0 * grid.k)) * np.exp(1j * grid.eta * grid.y[0])
    spec[grid.n_points // 2] = 0.0
    vals = np.fft.ifft(spec) / grid.h
    return FieldSlice(grid, vals, x_pos + dist)


def dump_slices_csv(slices, path):
    """Write slices as rows (x_pos, y, Re u, Im u) for debugging."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x_pos,y,re_u,im_u\n")
        for s in slices:
            for yy, v in zip(s.grid.y, s.values):
                fh.write(f"{s.x_pos:.17g},{yy:.17g},{v.real:.17g},{v.imag:.17g}\n")
