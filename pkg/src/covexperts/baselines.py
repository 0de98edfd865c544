"""Baseline online algorithms for covering instances.

* ``MwaRun``: the classical multiplicative-growth update.  On an unsatisfied
  constraint each covering variable grows along
  ``dx_i/dtau = (a_i/c_i) (x_i + 1/n)`` until the constraint value reaches 1.
* ``AnandRun``: additive growth rates seeded by the average of the experts'
  suggestions, run at half scale: variables grow along
  ``dx_i/dtau = (a_i/c_i) (x_i + avg_i)``, are frozen at 0.5, and each
  constraint is only satisfied to value 0.5; the returned solution is doubled
  at the end.
* ``average_of_experts``: cost of the plain average of the experts' final
  solutions (feasible by convexity).

The growth dynamics use the exponential closed form per segment plus
bisection on the stopping time, so there is no discretization drift; the
stopping value overshoots by at most the bisection tolerance.
"""

from __future__ import annotations

import numpy as np

from covexperts.config import Tolerances

_MAX_BISECT = 200


def _grow(x0: np.ndarray, shift: np.ndarray, rate: np.ndarray, tau: float) -> np.ndarray:
    """Closed form of dx/dtau = rate * (x + shift) started at x0."""
    return (x0 + shift) * np.exp(rate * tau) - shift


def _stop_time(
    x0: np.ndarray,
    shift: np.ndarray,
    rate: np.ndarray,
    row: np.ndarray,
    frozen_value: float,
    target: float,
    tol: float,
) -> float:
    """Smallest tau with row @ x(tau) + frozen_value >= target (monotone map).

    Returns the bisection upper endpoint, so the constraint value lands in
    [target, target + tol].
    """

    def value(tau: float) -> float:
        return float(row @ _grow(x0, shift, rate, tau)) + frozen_value

    hi = 1.0
    while value(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("growth stalled: no stopping time below 1e12")
    lo = 0.0
    for _ in range(_MAX_BISECT):
        if value(hi) - target <= tol:
            break
        mid = 0.5 * (lo + hi)
        if value(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


class MwaRun:
    """Stateful multiplicative-growth run over one instance's constraint stream."""

    def __init__(self, costs: np.ndarray, tol: float = Tolerances.growth_tol):
        self.costs = np.asarray(costs, dtype=float)
        self.n = len(self.costs)
        self.x = np.zeros(self.n)
        self.tol = tol

    def step(self, row: np.ndarray) -> np.ndarray:
        row = np.asarray(row, dtype=float)
        if float(row @ self.x) >= 1.0:
            return self.x
        grow = row > 0
        rate = np.zeros(self.n)
        rate[grow] = row[grow] / self.costs[grow]
        shift = np.full(self.n, 1.0 / self.n)
        fixed = float(row[~grow] @ self.x[~grow])  # zero, but keeps the map explicit
        tau = _stop_time(self.x[grow], shift[grow], rate[grow], row[grow], fixed, 1.0, self.tol)
        self.x[grow] = _grow(self.x[grow], shift[grow], rate[grow], tau)
        return self.x

    def cost(self) -> float:
        return float(self.costs @ self.x)


class AnandRun:
    """Half-scale additive-growth run; call ``finalize`` to get the doubled solution."""

    CAP = 0.5

    def __init__(self, costs: np.ndarray, tol: float = Tolerances.growth_tol):
        self.costs = np.asarray(costs, dtype=float)
        self.n = len(self.costs)
        self.x = np.zeros(self.n)
        self.tol = tol

    def step(self, row: np.ndarray, expert_matrix: np.ndarray) -> np.ndarray:
        """Process one constraint given the experts' current solutions (n x K)."""
        row = np.asarray(row, dtype=float)
        shift = np.asarray(expert_matrix, dtype=float).mean(axis=1)
        target = self.CAP
        while float(row @ self.x) < target - self.tol:
            growable = (row > 0) & (self.x < self.CAP) & (self.x + shift > 0)
            if not growable.any():
                raise RuntimeError("all variables capped but the constraint is unsatisfied")
            rate = row[growable] / self.costs[growable]
            x0 = self.x[growable]
            sh = shift[growable]
            # first time any growing variable hits the cap
            freeze = np.min(np.log((self.CAP + sh) / (x0 + sh)) / rate)
            frozen_value = float(row[~growable] @ self.x[~growable])
            full = float(row[growable] @ _grow(x0, sh, rate, freeze)) + frozen_value
            if full < target:
                tau = freeze  # advance exactly to the freeze, then re-plan
            else:
                tau = _stop_time(x0, sh, rate, row[growable], frozen_value, target, self.tol)
            self.x[growable] = np.minimum(_grow(x0, sh, rate, tau), self.CAP)
            if tau == freeze:
                continue
            break
        return self.x

    def finalize(self) -> np.ndarray:
        """Doubled end-of-run solution; satisfies every processed constraint at >= 1."""
        return 2.0 * self.x

    def cost(self) -> float:
        return float(self.costs @ self.finalize())


def average_of_experts(final_matrix: np.ndarray, costs: np.ndarray) -> tuple[float, np.ndarray]:
    """Cost and solution of the average of the experts' final predictions."""
    xbar = np.asarray(final_matrix, dtype=float).mean(axis=1)
    return float(np.asarray(costs, dtype=float) @ xbar), xbar
