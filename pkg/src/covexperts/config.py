"""Numerical tolerances and run limits, overridable via environment variables.

Every knob can be overridden with ``COVEXPERTS_<NAME>`` (upper-cased field
name), e.g. ``COVEXPERTS_FW_GAP_TOL=1e-5``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class Tolerances:
    # expert stream validation (relative)
    expert_rel_tol: float = 1e-7
    # |sum_i a_i * aux_i - 1| allowed after tightening
    tight_tol: float = 1e-9
    # Frank-Wolfe termination
    fw_gap_tol: float = 1e-6
    fw_max_iters: int = 10_000
    # per-step program constraint slack at the returned point
    program_tol: float = 1e-8
    # prefix-constraint satisfaction in trace checks
    feasibility_tol: float = 1e-7
    # reported cost vs trace recomputation
    cost_tol: float = 1e-9
    # dual-certificate bound slack
    certificate_tol: float = 1e-7
    # envelope constant in the competitive-ratio check
    ratio_constant: float = 4.0
    # stopping-time bisection for the growth baselines
    growth_tol: float = 1e-9


def load_tolerances(env: dict[str, str] | None = None) -> Tolerances:
    """Build a Tolerances instance, applying COVEXPERTS_* env overrides."""
    source = os.environ if env is None else env
    overrides: dict[str, object] = {}
    for f in fields(Tolerances):
        key = f"COVEXPERTS_{f.name.upper()}"
        if key in source:
            cast = int if f.name == "fw_max_iters" else float
            overrides[f.name] = cast(source[key])
    return Tolerances(**overrides)  # type: ignore[arg-type]
