"""Expert strategies and online validation of their streams.

An expert emits, after each arriving constraint, its cumulative solution
vector over all resources.  Valid streams are feasible for every constraint
seen so far and coordinatewise monotone; ``validate_stream`` enforces both
online and permanently deactivates violators (they are ignored by the
algorithm and by the benchmarks from that step on).
"""

from __future__ import annotations

import numpy as np

from covexperts.instance import CoveringInstance
from covexperts.lp.programs import solve_offline_opt

EXPERT_TYPES = ("perfect", "online", "random", "adversarial", "dummy", "scripted")


class NoValidExpertsError(RuntimeError):
    """Raised when every expert in the roster has been deactivated."""


class PerfectExpert:
    """Plays the clairvoyant optimum of the full instance at every step."""

    name = "perfect"

    def __init__(self, instance: CoveringInstance):
        sol = solve_offline_opt(instance)
        if not sol.is_optimal:
            raise ValueError("instance has no offline optimum")
        self._x = np.asarray(sol.x, dtype=float)

    def step(self, row: np.ndarray) -> np.ndarray:
        return self._x.copy()


class AdversarialExpert:
    """Suggests the trivial all-ones solution."""

    name = "adversarial"

    def __init__(self, n: int):
        self._x = np.ones(n)

    def step(self, row: np.ndarray) -> np.ndarray:
        return self._x.copy()


class DummyExpert:
    """Starts every variable at a small value, then greedily tightens.

    The initial value is 1/n per variable; on each unsatisfied constraint the
    single variable with the best cost-per-coverage ratio is raised until the
    constraint is tight.  Keeps every coordinate strictly positive, which is
    what the main algorithm relies on for its denominators.
    """

    name = "dummy"

    def __init__(self, costs: np.ndarray):
        n = len(costs)
        self._costs = np.asarray(costs, dtype=float)
        self._x = np.full(n, 1.0 / n)

    def step(self, row: np.ndarray) -> np.ndarray:
        value = float(row @ self._x)
        if value < 1.0:
            ratio = np.where(row > 0, self._costs / np.maximum(row, 1e-300), np.inf)
            i = int(np.argmin(ratio))
            self._x[i] += (1.0 - value) / row[i]
        return self._x.copy()


class OnlineExpert:
    """An independent multiplicative-growth run used as a prediction source."""

    name = "online"

    def __init__(self, costs: np.ndarray):
        from covexperts.baselines import MwaRun

        self._run = MwaRun(costs)

    def step(self, row: np.ndarray) -> np.ndarray:
        return self._run.step(row).copy()


class RandomExpert:
    """Raises one uniformly chosen covering variable until the constraint is tight."""

    name = "random"

    def __init__(self, n: int, seed: int = 0):
        self._x = np.zeros(n)
        self._rng = np.random.default_rng(seed)

    def step(self, row: np.ndarray) -> np.ndarray:
        value = float(row @ self._x)
        if value < 1.0:
            candidates = np.flatnonzero(row > 0)
            i = int(self._rng.choice(candidates))
            self._x[i] += (1.0 - value) / row[i]
        return self._x.copy()


class ScriptedExpert:
    """Replays a fixed list of per-step solution vectors."""

    name = "scripted"

    def __init__(self, vectors: list[np.ndarray]):
        self._vectors = [np.asarray(v, dtype=float) for v in vectors]
        self._t = 0

    def step(self, row: np.ndarray) -> np.ndarray:
        if self._t >= len(self._vectors):
            raise IndexError("scripted expert ran out of steps")
        v = self._vectors[self._t]
        self._t += 1
        return v.copy()


def build_expert(entry: dict, instance: CoveringInstance):
    """Instantiate a strategy from a roster entry {type, seed?, predictions?}."""
    kind = entry["type"]
    if kind == "perfect":
        return PerfectExpert(instance)
    if kind == "adversarial":
        return AdversarialExpert(instance.n)
    if kind == "dummy":
        return DummyExpert(instance.costs)
    if kind == "online":
        return OnlineExpert(instance.costs)
    if kind == "random":
        return RandomExpert(instance.n, seed=int(entry.get("seed", 0)))
    if kind == "scripted":
        return ScriptedExpert([np.asarray(v, dtype=float) for v in entry["predictions"]])
    raise ValueError(f"unknown expert type {kind!r}")


class PredictionMatrix:
    """Per-step (n x K) prediction matrices plus the active-expert mask.

    Column k of ``steps[t]`` is expert k's cumulative solution after
    constraint t.  Deactivation is permanent: the mask recorded after step t
    is a subset of the one after step t-1.
    """

    def __init__(self, n: int, num_experts: int):
        self.n = n
        self.num_experts = num_experts
        self.steps: list[np.ndarray] = []
        self.active = np.ones(num_experts, dtype=bool)
        self.active_history: list[np.ndarray] = []

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    def append(self, matrix: np.ndarray) -> None:
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (self.n, self.num_experts):
            raise ValueError(f"expected ({self.n}, {self.num_experts}) matrix")
        self.steps.append(matrix)

    def active_columns(self, t: int | None = None) -> list[np.ndarray]:
        """Stream restricted to experts active at step t (default: final mask)."""
        mask = self.active if t is None else self.active_history[t]
        return [s[:, mask] for s in self.steps]

    def num_active(self) -> int:
        return int(self.active.sum())


def validate_stream(
    predictions: PredictionMatrix,
    instance: CoveringInstance,
    t: int,
    rel_tol: float = 1e-7,
) -> np.ndarray:
    """Check step t of the stream and return the updated active mask.

    An active expert is deactivated when its step-t solution misses the new
    constraint or decreases any coordinate, beyond ``rel_tol`` (relative).
    Earlier constraints stay satisfied by induction for monotone streams, so
    only the arriving row is tested.  Raises NoValidExpertsError when nobody
    is left.
    """
    matrix = predictions.steps[t]
    row = instance.rows[t]
    for k in range(predictions.num_experts):
        if not predictions.active[k]:
            continue
        col = matrix[:, k]
        if float(row @ col) < 1.0 - rel_tol:
            predictions.active[k] = False
            continue
        if t >= 1:
            prev = predictions.steps[t - 1][:, k]
            if np.any(col < prev - rel_tol * np.maximum(1.0, np.abs(prev))):
                predictions.active[k] = False
    predictions.active_history.append(predictions.active.copy())
    if not predictions.active.any():
        raise NoValidExpertsError(f"no valid experts left at step {t}")
    return predictions.active.copy()


def collect_predictions(
    roster: list,
    predictions: PredictionMatrix,
    instance: CoveringInstance,
    t: int,
    rel_tol: float = 1e-7,
) -> np.ndarray:
    """Advance every active expert on row t, validate, and return the mask.

    Deactivated experts are frozen: they stop being stepped and their columns
    repeat the last accepted value.
    """
    row = instance.rows[t]
    if t == 0:
        matrix = np.column_stack([exp.step(row) for exp in roster])
    else:
        prev = predictions.steps[t - 1]
        cols = []
        for k, exp in enumerate(roster):
            cols.append(exp.step(row) if predictions.active[k] else prev[:, k])
        matrix = np.column_stack(cols)
    predictions.append(matrix)
    return validate_stream(predictions, instance, t, rel_tol=rel_tol)
