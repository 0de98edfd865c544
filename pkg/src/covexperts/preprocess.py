"""Per-step preprocessing of expert predictions.

Two stages per expert per arriving constraint:

1. ``downscale`` shrinks the prediction uniformly toward the previous scaled
   prediction (an elementwise floor preserves monotonicity) until the new
   constraint is as tight as the floor allows.
2. ``tighten`` builds an auxiliary solution that is exactly tight on the new
   constraint, never exceeds the scaled prediction, and keeps each adjusted
   coordinate above the carry-over level implied by the previous auxiliary
   solution.

The auxiliary solutions are what the per-step convex program's covering
constraint uses; exact tightness there makes the uniform weight vector
feasible on every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TIGHT_EPS = 1e-12  # window in which a constraint counts as already tight


class ExpertNotFeasibleError(ValueError):
    """Input prediction does not satisfy the arriving constraint."""


@dataclass
class TightenedPredictions:
    """Scaled predictions, tight auxiliaries, and per-expert adjusted index sets."""

    scaled: np.ndarray  # (n, K)
    aux: np.ndarray  # (n, K), tight on the current row per expert
    raised_sets: list[np.ndarray]  # per expert: indices eligible for reduction


def downscale(s_new: np.ndarray, s_prev: np.ndarray, row: np.ndarray) -> np.ndarray:
    """Uniformly scale ``s_new`` down to ``max(theta * s_new, s_prev)``.

    ``theta`` is the smallest value in [0, 1] for which the scaled vector
    still satisfies ``row @ v >= 1``; it is found exactly by scanning the
    breakpoints of the piecewise-linear map ``theta -> row @ max(theta*s, s_prev)``.
    """
    s = np.asarray(s_new, dtype=float)
    p = np.asarray(s_prev, dtype=float)
    a = np.asarray(row, dtype=float)
    total = float(a @ s)
    if total < 1.0 - 1e-9:
        raise ExpertNotFeasibleError(f"prediction misses the constraint: {total} < 1")
    if float(a @ np.maximum(0.0, p)) >= 1.0:
        return np.maximum(p, 0.0)  # the floor alone covers the row
    if total <= 1.0 + TIGHT_EPS:
        return np.maximum(s, p)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(s > 0, p / np.where(s > 0, s, 1.0), 0.0)
    brks = np.unique(np.concatenate([[0.0, 1.0], np.clip(ratios, 0.0, 1.0)]))
    values = np.array([float(a @ np.maximum(b * s, p)) for b in brks])
    m = int(np.argmax(values >= 1.0))  # first breakpoint covering the row; m >= 1 here
    if values[m] < 1.0:
        theta = 1.0  # only reachable through float noise; total >= 1 was checked
    else:
        lo = brks[m - 1]
        linear = (a > 0) & (s > 0) & (ratios <= lo)
        slope = float(np.sum(a[linear] * s[linear]))
        const = float(np.sum((a * np.maximum(0.0, p))[~linear]))
        theta = brks[m] if slope <= 0 else min((1.0 - const) / slope, brks[m])
    return np.maximum(theta * s, p)


def tighten(
    s_scaled: np.ndarray,
    aux_prev: np.ndarray | None,
    row_prev: np.ndarray | None,
    row: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Make the scaled prediction exactly tight on the arriving constraint.

    Returns ``(aux, raised)`` where ``aux <= s_scaled`` elementwise,
    ``row @ aux == 1`` (to float precision), and ``raised`` is the index set
    that was eligible for reduction.  On the first step (``aux_prev is
    None``) the prediction is scaled down uniformly.  Otherwise coordinate i
    may be reduced only if its scaled value exceeds the carry-over level
    ``aux_prev[i] * row_prev[i] / row[i]``, and never below it; coordinates
    outside the constraint are left untouched.  Reduction proceeds
    deterministically in increasing index order (water-filling).
    """
    s = np.asarray(s_scaled, dtype=float)
    a = np.asarray(row, dtype=float)
    total = float(a @ s)
    if total < 1.0 - 1e-9:
        raise ExpertNotFeasibleError(f"scaled prediction misses the constraint: {total} < 1")
    if total <= 1.0 + TIGHT_EPS:
        return s.copy(), np.array([], dtype=int)
    if aux_prev is None:
        return s / total, np.flatnonzero(s > 0)

    ap = np.asarray(row_prev, dtype=float)
    aux = s.copy()
    in_row = a > 0
    floors = np.zeros_like(s)
    floors[in_row] = np.asarray(aux_prev, dtype=float)[in_row] * ap[in_row] / a[in_row]
    raised = np.flatnonzero(in_row & (s > floors))
    excess = total - 1.0
    for i in raised:
        reducible = a[i] * (s[i] - floors[i])
        take = min(excess, reducible)
        aux[i] -= take / a[i]
        excess -= take
        if excess <= 0.0:
            break
    if excess > 1e-9:
        raise ExpertNotFeasibleError(
            f"cannot tighten: carry-over levels leave the constraint over-covered by {excess}"
        )
    return aux, raised


def preprocess_matrix(
    raw: np.ndarray,
    scaled_prev: np.ndarray | None,
    aux_prev: np.ndarray | None,
    row_prev: np.ndarray | None,
    row: np.ndarray,
) -> TightenedPredictions:
    """Apply both stages to every expert column of a step's prediction matrix."""
    n, num_experts = raw.shape
    zeros = np.zeros(n)
    scaled = np.empty_like(raw)
    aux = np.empty_like(raw)
    raised_sets = []
    for k in range(num_experts):
        prev_col = zeros if scaled_prev is None else scaled_prev[:, k]
        scaled[:, k] = downscale(raw[:, k], prev_col, row)
        aux_col_prev = None if aux_prev is None else aux_prev[:, k]
        aux[:, k], raised = tighten(scaled[:, k], aux_col_prev, row_prev, row)
        raised_sets.append(raised)
    return TightenedPredictions(scaled=scaled, aux=aux, raised_sets=raised_sets)
