"""Online covering LP instances: data model, generators, and JSON file I/O.

An instance is a cost vector over ``n`` resources plus an ordered stream of
covering constraint rows ``sum_i a[i] * x[i] >= 1`` with ``a >= 0``.  Row
order is arrival order.  Three generator families are provided: uniformly
random instances driven by a twelve-knob parameter set, the pathological
family on which multiplicative-weights updates pay a log factor, and the
batched construction (with scripted expert predictions) on which the additive
growth-rate baseline pays a cost linear in the number of batches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

PRNG_ID = "numpy-pcg64"


@dataclass
class CoveringInstance:
    """Costs and the online stream of covering constraint rows."""

    n: int
    costs: np.ndarray  # shape (n,), strictly positive
    rows: list[np.ndarray]  # each shape (n,), nonnegative, some entry > 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.costs = np.asarray(self.costs, dtype=float)
        self.rows = [np.asarray(r, dtype=float) for r in self.rows]

    @property
    def num_steps(self) -> int:
        return len(self.rows)

    def cost_of(self, x: np.ndarray) -> float:
        return float(self.costs @ np.asarray(x, dtype=float))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "costs": self.costs.tolist(),
            "rows": [r.tolist() for r in self.rows],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoveringInstance":
        return cls(n=int(d["n"]), costs=d["costs"], rows=d["rows"], meta=d.get("meta", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "CoveringInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs of the random-instance generator (plus the expert roster mix)."""

    num_variables: int
    num_constraints: int
    min_objective_coef: int
    max_objective_coef: int
    min_constraint_coef: int
    max_constraint_coef: int
    min_zero_coefs: int
    max_zero_coefs: int
    num_perfect_experts: int = 0
    num_online_experts: int = 0
    num_random_experts: int = 0
    num_adversarial_experts: int = 0
    seed: int = 0

    def validate(self) -> list[str]:
        problems = []
        if self.num_variables < 1:
            problems.append("num_variables must be >= 1")
        if self.num_constraints < 1:
            problems.append("num_constraints must be >= 1")
        for lo, hi, name in [
            (self.min_objective_coef, self.max_objective_coef, "objective_coef"),
            (self.min_constraint_coef, self.max_constraint_coef, "constraint_coef"),
            (self.min_zero_coefs, self.max_zero_coefs, "zero_coefs"),
        ]:
            if lo > hi:
                problems.append(f"min_{name} exceeds max_{name}")
        if self.min_objective_coef < 1:
            problems.append("objective coefficients must be >= 1 (costs are positive)")
        if self.min_constraint_coef < 0:
            problems.append("constraint coefficients must be >= 0")
        if self.max_zero_coefs >= self.num_variables:
            problems.append("max_zero_coefs must be < num_variables")
        if self.min_zero_coefs < 0:
            problems.append("min_zero_coefs must be >= 0")
        return problems

    def to_dict(self) -> dict:
        return asdict(self)


# Parameter columns of the generated-experiment table.
EXPERIMENT_PARAMS = {
    "instance1": GeneratorParams(10, 10, 1, 10, 1, 10, 0, 5, 1, 2, 1, 1),
    "instance2": GeneratorParams(10, 25, 10, 25, 10, 25, 1, 5, 0, 1, 1, 1),
    "instance3": GeneratorParams(44, 2, 1, 100, 1, 1, 11, 22, 0, 1, 11, 0),
    "instance4": GeneratorParams(30, 15, 1, 100, 1, 1, 5, 20, 2, 2, 0, 0),
}


def validate(instance: CoveringInstance) -> list[str]:
    """Return a list of invariant violations (empty means the instance is OK)."""
    problems = []
    if instance.n < 1:
        problems.append("n must be >= 1")
        return problems
    if instance.costs.shape != (instance.n,):
        problems.append(f"costs has shape {instance.costs.shape}, expected ({instance.n},)")
        return problems
    if not np.all(np.isfinite(instance.costs)):
        problems.append("non-finite cost")
    if np.any(instance.costs <= 0):
        i = int(np.argmax(instance.costs <= 0))
        problems.append(f"nonpositive cost at resource {i}")
    for t, row in enumerate(instance.rows):
        if row.shape != (instance.n,):
            problems.append(f"row {t} has shape {row.shape}, expected ({instance.n},)")
            continue
        if not np.all(np.isfinite(row)):
            problems.append(f"non-finite coefficient in row {t}")
        if np.any(row < 0):
            problems.append(f"negative coefficient in row {t}")
        if not np.any(row > 0):
            problems.append(f"all-zero row {t} (constraint infeasible)")
    return problems


def gen_random(params: GeneratorParams) -> CoveringInstance:
    """Draw an instance with coefficients and per-row zero counts in the declared ranges.

    Integer coefficients are sampled uniformly, then a uniformly drawn number
    of positions per row is zeroed out; rows that end up all-zero are
    resampled.  Deterministic given the seed (PRNG recorded in the metadata;
    cross-implementation reproduction goes through the serialized file).
    """
    problems = params.validate()
    if problems:
        raise ValueError("; ".join(problems))
    rng = np.random.default_rng(params.seed)
    n = params.num_variables
    costs = rng.integers(params.min_objective_coef, params.max_objective_coef + 1, size=n)
    rows = []
    while len(rows) < params.num_constraints:
        row = rng.integers(
            params.min_constraint_coef, params.max_constraint_coef + 1, size=n
        ).astype(float)
        k_zero = int(rng.integers(params.min_zero_coefs, params.max_zero_coefs + 1))
        if k_zero > 0:
            row[rng.choice(n, size=k_zero, replace=False)] = 0.0
        if not np.any(row > 0):
            continue
        rows.append(row)
    meta = {"generator": "random", "prng": PRNG_ID, "params": params.to_dict(), "seed": params.seed}
    return CoveringInstance(n=n, costs=costs.astype(float), rows=rows, meta=meta)


def gen_mwa_worst_case(n: int) -> CoveringInstance:
    """Uniform-cost instance whose t-th constraint covers only resources t..n.

    Each arriving constraint drops one more variable, so a multiplicative
    growth rule keeps paying for variables that later become useless; the
    offline optimum is 1 (buy the last variable).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rows = []
    for t in range(n):
        row = np.zeros(n)
        row[t:] = 1.0
        rows.append(row)
    meta = {"generator": "mwa-worst", "params": {"n": n}}
    return CoveringInstance(n=n, costs=np.ones(n), rows=rows, meta=meta)


def gen_anand_counterexample(
    num_experts: int, num_batches: int
) -> tuple[CoveringInstance, list[np.ndarray]]:
    """Batched instance plus scripted 0/1 expert predictions.

    With K experts and L batches there are ``L*K + 1`` uniform-cost variables
    and ``L*(K-1)`` constraints.  Constraint j of batch l covers variables
    ``(l-1)K + j .. lK`` plus the shared last variable ``LK+1``, which no
    expert ever suggests.  At each batch start the experts' new assignments
    form an identity matrix on the batch's first K variables; when the lowest
    variable leaves the constraint, every displaced expert moves to the
    smallest-index variable still available.  Expert K holds the batch's last
    variable throughout.

    Returns the instance and the per-step prediction matrices, each of shape
    ``(n, K)``; the scripted stream is feasible, monotone, and tight on every
    arriving constraint.
    """
    K, L = num_experts, num_batches
    if K < 2:
        raise ValueError("need at least 2 experts")
    if L < 1:
        raise ValueError("need at least 1 batch")
    n = L * K + 1
    rows = []
    preds = []
    current = np.zeros((n, K))
    for batch in range(L):
        base = batch * K  # 0-based offset of the batch's first variable
        for j in range(K - 1):
            row = np.zeros(n)
            row[base + j : base + K] = 1.0
            row[n - 1] = 1.0
            rows.append(row)
            if j == 0:
                for k in range(K):
                    current[base + k, k] = 1.0
            else:
                # experts displaced from variables below base+j move up
                for k in range(j):
                    current[base + j, k] = 1.0
            preds.append(current.copy())
    meta = {"generator": "anand", "params": {"num_experts": K, "num_batches": L}}
    inst = CoveringInstance(n=n, costs=np.ones(n), rows=rows, meta=meta)
    return inst, preds


def predictions_to_dict(preds: list[np.ndarray]) -> dict:
    """Serialize scripted per-step prediction matrices (steps x K x n on disk)."""
    return {
        "num_experts": int(preds[0].shape[1]) if preds else 0,
        "predictions": [p.T.tolist() for p in preds],
    }


def predictions_from_dict(d: dict) -> list[np.ndarray]:
    return [np.asarray(step, dtype=float).T for step in d["predictions"]]
