"""Zeno and Zeno-like dynamics of a 13C nuclear spin watched by an NV centre."""

from .channel import analytic_spectrum, extract_transfer_matrix, qzle_locus
from .dynamics import run_cycle, run_n_cycles
from .model import PhysicalParams, default_params

__all__ = [
    "PhysicalParams",
    "analytic_spectrum",
    "default_params",
    "extract_transfer_matrix",
    "qzle_locus",
    "run_cycle",
    "run_n_cycles",
]
__version__ = "0.1.0"
