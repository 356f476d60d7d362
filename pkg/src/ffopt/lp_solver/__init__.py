"""Interior-point solving, MPS interchange and mask-solution verification."""

from .ipm import STATUSES, Solution, SolverConfig, solve
from .mps import MPSExportError, MPSParseError, export_mps, parse_mps, read_mps, write_mps
from .verify import FeasibilityReport, VerificationError, verify_mask_solution

__all__ = [
    "STATUSES", "Solution", "SolverConfig", "solve",
    "MPSExportError", "MPSParseError", "export_mps", "parse_mps", "read_mps", "write_mps",
    "FeasibilityReport", "VerificationError", "verify_mask_solution",
]
