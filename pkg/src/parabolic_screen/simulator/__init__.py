"""Spectral marching on the two-sheeted surface: edge Green's functions and the periodic problem."""

from .edge import (EdgeConfig, EdgeGreenRun, directivity_derivative_numeric,
                   directivity_extended_numeric, directivity_numeric, edge_green_march,
                   numeric_directivities, numeric_directivity_set, sigma_richardson_check)
from .grid import (FieldSlice, SimulationGrid, apply_cut, delta_slice, dump_slices_csv,
                   green_slice, propagate_slice)
from .quasiperiodic import (EdgeValues, QuasiPeriodicSolution, SolverConfig, aperture_margin,
                            edge_values_extract, extract_coefficients, quasi_periodic_field,
                            quasi_periodic_solve, reciprocity_check, contraction_ratio,
                            write_metadata)

__all__ = [
    "EdgeConfig", "EdgeGreenRun", "directivity_derivative_numeric",
    "directivity_extended_numeric", "directivity_numeric", "edge_green_march",
    "numeric_directivities", "numeric_directivity_set", "sigma_richardson_check",
    "FieldSlice", "SimulationGrid", "apply_cut", "delta_slice", "dump_slices_csv",
    "green_slice", "propagate_slice", "EdgeValues", "QuasiPeriodicSolution", "SolverConfig",
    "edge_values_extract", "extract_coefficients", "quasi_periodic_field",
    "quasi_periodic_solve", "reciprocity_check", "contraction_ratio", "write_metadata",
    "aperture_margin",
]
