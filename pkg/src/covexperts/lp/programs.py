"""Benchmark LPs for covering instances with expert predictions.

Predictions are given as one ``(n, K)`` matrix per step (column k is expert
k's solution after constraint t arrived).  Builders return ``LinearProgram``
objects:

* the linear-combination benchmark: the cheapest online solution obtainable
  by re-weighting the experts with weights summing to one at every step,
  under per-variable monotonicity;
* its relaxation (weight sums >= 1, per-step increase variables); and
* the dual of that relaxation.

``solve_offline_opt`` is the clairvoyant optimum over the full instance and
``solve_dynamic`` is the cheapest solution that dominates, per resource and
step, at least one expert's suggestion while satisfying every constraint.
"""

from __future__ import annotations

import numpy as np

from covexperts.instance import CoveringInstance
from covexperts.lp.solver import EQ, GE, LE, LinearProgram, LpSolution, solve_lp


def _check_shapes(instance: CoveringInstance, predictions: list[np.ndarray]) -> tuple[int, int, int]:
    if len(predictions) != instance.num_steps:
        raise ValueError(
            f"{len(predictions)} prediction steps for {instance.num_steps} constraints"
        )
    if not predictions:
        raise ValueError("empty prediction stream")
    n, k = predictions[0].shape
    if n != instance.n:
        raise ValueError("prediction rows do not match instance resources")
    for p in predictions:
        if p.shape != (n, k):
            raise ValueError("ragged prediction stream")
    return n, k, len(predictions)


def build_lincomb_lp(
    instance: CoveringInstance, predictions: list[np.ndarray]
) -> LinearProgram:
    """LP for the best time-varying convex combination of the experts.

    Variables are per-step weights (one per expert) and per-step solutions
    x[t, i]; weights sum to one at each step, x dominates the weighted
    prediction and is monotone in t; the objective charges the final step.
    """
    n, K, T = _check_shapes(instance, predictions)
    num_w = T * K
    num_vars = num_w + T * n

    def w_idx(t: int, k: int) -> int:
        return t * K + k

    def x_idx(t: int, i: int) -> int:
        return num_w + t * n + i

    objective = np.zeros(num_vars)
    for i in range(n):
        objective[x_idx(T - 1, i)] = instance.costs[i]

    p = LinearProgram("min", objective)
    for t in range(T):
        row = np.zeros(num_vars)
        row[t * K : (t + 1) * K] = 1.0
        p.add_row(row, EQ, 1.0)
    for t in range(T):
        s = predictions[t]
        for i in range(n):
            row = np.zeros(num_vars)
            row[x_idx(t, i)] = 1.0
            row[t * K : (t + 1) * K] = -s[i, :]
            p.add_row(row, GE, 0.0)
            if t >= 1:
                row = np.zeros(num_vars)
                row[x_idx(t, i)] = 1.0
                row[x_idx(t - 1, i)] = -1.0
                p.add_row(row, GE, 0.0)
    return p


def build_relaxation_lp(
    instance: CoveringInstance, predictions: list[np.ndarray]
) -> LinearProgram:
    """Relaxed combination benchmark: weight sums >= 1, increases charged per step."""
    n, K, T = _check_shapes(instance, predictions)
    num_w = T * K
    num_vars = num_w + T * n

    def y_idx(t: int, i: int) -> int:
        return num_w + t * n + i

    objective = np.zeros(num_vars)
    for t in range(T):
        for i in range(n):
            objective[y_idx(t, i)] = instance.costs[i]

    p = LinearProgram("min", objective)
    for t in range(T):
        row = np.zeros(num_vars)
        row[t * K : (t + 1) * K] = 1.0
        p.add_row(row, GE, 1.0)
    for t in range(T):
        s = predictions[t]
        for i in range(n):
            # y[t,i] >= sum_k (w[t,k] s[t][i,k] - w[t-1,k] s[t-1][i,k])
            row = np.zeros(num_vars)
            row[y_idx(t, i)] = 1.0
            row[t * K : (t + 1) * K] -= s[i, :]
            if t >= 1:
                row[(t - 1) * K : t * K] += predictions[t - 1][i, :]
            p.add_row(row, GE, 0.0)
    return p


def build_dual_lp(
    instance: CoveringInstance, predictions: list[np.ndarray]
) -> LinearProgram:
    """Dual of the relaxed benchmark (per-step bonus alpha, per-resource prices beta)."""
    n, K, T = _check_shapes(instance, predictions)
    num_vars = T + T * n

    def b_idx(t: int, i: int) -> int:
        return T + t * n + i

    objective = np.zeros(num_vars)
    objective[:T] = 1.0

    p = LinearProgram("max", objective)
    for t in range(T):
        s = predictions[t]
        for k in range(K):
            # alpha[t] + sum_i s[t][i,k] (beta[t+1,i] - beta[t,i]) <= 0, beta[T,.] = 0
            row = np.zeros(num_vars)
            row[t] = 1.0
            for i in range(n):
                if s[i, k] != 0.0:
                    row[b_idx(t, i)] -= s[i, k]
                    if t + 1 < T:
                        row[b_idx(t + 1, i)] += s[i, k]
            p.add_row(row, LE, 0.0)
    for t in range(T):
        for i in range(n):
            row = np.zeros(num_vars)
            row[b_idx(t, i)] = 1.0
            p.add_row(row, LE, float(instance.costs[i]))
    return p


def solve_offline_opt(instance: CoveringInstance) -> LpSolution:
    """Clairvoyant optimum: min c'x subject to every constraint row, x >= 0."""
    p = LinearProgram("min", instance.costs.copy())
    for row in instance.rows:
        p.add_row(row, GE, 1.0)
    return solve_lp(p)


def solve_dynamic(
    instance: CoveringInstance, predictions: list[np.ndarray]
) -> LpSolution:
    """Cheapest solution dominating one expert per (resource, step), covering all rows.

    The per-resource floor is ``max_t min_k s[t][i,k]``; the witnessing expert
    may differ across steps.  Covering feasibility is required in addition to
    the domination floors.
    """
    n, _, _ = _check_shapes(instance, predictions)
    floors = np.zeros(n)
    for s in predictions:
        floors = np.maximum(floors, s.min(axis=1))
    p = LinearProgram("min", instance.costs.copy(), lower_bounds=floors)
    for row in instance.rows:
        p.add_row(row, GE, 1.0)
    return solve_lp(p)
