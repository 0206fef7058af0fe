"""Partition-based partial MaxSAT solving."""
from .engine import (
    MaxSatResult,
    Stats,
    Status,
    brute_force_optimum,
    check_hard,
    solve,
    solve_linear_sat_unsat,
    solve_linear_unsat_sat,
    solve_msu3,
    solve_partition_msu3,
)
from .wcnf import WcnfFormula, dump_wcnf, normalize, parse_wcnf, read_wcnf

__all__ = [
    "MaxSatResult",
    "Stats",
    "Status",
    "WcnfFormula",
    "brute_force_optimum",
    "check_hard",
    "dump_wcnf",
    "normalize",
    "parse_wcnf",
    "read_wcnf",
    "solve",
    "solve_linear_sat_unsat",
    "solve_linear_unsat_sat",
    "solve_msu3",
    "solve_partition_msu3",
]

__version__ = "0.1.0"
