from covexperts.lp.solver import LinearProgram, LpSolution, solve_lp, to_lp_text
from covexperts.lp.programs import (
    build_lincomb_lp,
    build_relaxation_lp,
    build_dual_lp,
    solve_offline_opt,
    solve_dynamic,
)

__all__ = [
    "LinearProgram",
    "LpSolution",
    "solve_lp",
    "to_lp_text",
    "build_lincomb_lp",
    "build_relaxation_lp",
    "build_dual_lp",
    "solve_offline_opt",
    "solve_dynamic",
]
