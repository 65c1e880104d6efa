from .branch_bound import MipResult, ResourceLimitError, solve_bracket_enumeration, solve_bracket_mip
from .export import lp_text, write_lp_file
from .simplex import (EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, Basis, LinearProgram, LPBuilder, LpSolution,
                      SolverError, solve_lp)

__all__ = [
    "EQ", "GE", "LE", "OPTIMAL", "INFEASIBLE", "UNBOUNDED",
    "Basis", "LinearProgram", "LPBuilder", "LpSolution", "SolverError", "solve_lp",
    "MipResult", "ResourceLimitError", "solve_bracket_mip", "solve_bracket_enumeration",
    "lp_text", "write_lp_file",
]
