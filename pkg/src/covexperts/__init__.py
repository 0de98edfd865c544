"""Online covering LPs with multiple expert predictions.

Library + service implementing an online primal-dual algorithm that
aggregates several expert solutions per arriving covering constraint,
the linear-combination / dynamic benchmark LPs used to evaluate it,
classical baselines (multiplicative weights, average of experts), seeded
instance generators, and a verification harness for the algorithm's
invariants and competitive-ratio certificates.
"""

__version__ = "0.1.0"

from covexperts.instance import CoveringInstance, GeneratorParams
from covexperts.lp import LinearProgram, LpSolution, solve_lp

__all__ = [
    "CoveringInstance",
    "GeneratorParams",
    "LinearProgram",
    "LpSolution",
    "solve_lp",
    "__version__",
]
