"""The main online algorithm: per-step convex program and solution update.

At each arriving constraint the algorithm preprocesses the expert
predictions (see :mod:`covexperts.preprocess`), then solves a convex program
over per-resource, per-expert weights ``w[i, k]``:

    minimize  sum_i c_i [ (z_i + shift_i) * ln((z_i + shift_i) / denom_prev_i) - z_i ]
    subject to  sum_i a_i * sum_k aux[i,k] * w[i,k] >= 1
                sum_k w[i,k] >= 1                       (per included resource)
                0 <= w[i,k] <= cap

with ``z_i = sum_k preds[i,k] * w[i,k]`` and ``shift_i`` the average of the
predictions for resource i.  The objective is a relative-entropy distance
from the previous step's aggregate, shifted by the prediction average so the
logarithm stays defined.  The weighted prediction then raises the solution:
``x_i = max(z_i, previous x_i)``.

The program is solved with Frank-Wolfe: the linear subproblem over the
capped polytope goes through the bundled LP solver and certifies the duality
gap.  Each iteration additionally re-optimizes the objective exactly over
the convex hull of the vertices collected so far (a fully-corrective
variant); the plain 2/(j+2) schedule, even with exact line search, zigzags
on the degenerate faces produced by near-duplicate experts and cannot
certify small gaps within a reasonable iteration budget.  A line-search step
along the Frank-Wolfe direction is the guaranteed-descent fallback whenever
the correction fails to improve.  Resources with no positive prediction are
excluded from the program and their weights preset to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from covexperts.config import Tolerances
from covexperts.experts import PredictionMatrix, collect_predictions
from covexperts.instance import CoveringInstance
from covexperts.lp.solver import GE, LinearProgram, solve_lp
from covexperts.preprocess import preprocess_matrix


class StepSolveError(RuntimeError):
    """Frank-Wolfe hit the iteration cap before reaching the gap tolerance."""

    def __init__(self, gap: float, iters: int):
        super().__init__(f"duality gap {gap:.3e} after {iters} iterations")
        self.gap = gap
        self.iters = iters


@dataclass
class StepProgram:
    """One step's convex program, restricted to the included resources."""

    costs: np.ndarray  # (m,)
    preds: np.ndarray  # (m, K) scaled predictions
    aux: np.ndarray  # (m, K) tight auxiliaries
    shift: np.ndarray  # (m,) prediction averages
    denom_prev: np.ndarray  # (m,) previous aggregates, > 0
    row: np.ndarray  # (m,) constraint coefficients
    cap: float  # upper bound on each weight

    @property
    def num_resources(self) -> int:
        return int(self.costs.size)

    @property
    def num_experts(self) -> int:
        return int(self.preds.shape[1])


def objective_and_gradient(
    program: StepProgram, w: np.ndarray
) -> tuple[float, np.ndarray]:
    """Objective value and gradient of the step program at weights ``w`` (m x K)."""
    z = np.sum(program.preds * w, axis=1)
    arg = (z + program.shift) / program.denom_prev
    if np.any(arg <= 0):
        raise ValueError("nonpositive logarithm argument: weights outside the domain")
    log_arg = np.log(arg)
    value = float(np.sum(program.costs * ((z + program.shift) * log_arg - z)))
    grad = (program.costs * log_arg)[:, None] * program.preds
    return value, grad


def _directional_derivative(program: StepProgram, z: np.ndarray, dz: np.ndarray, gamma: float):
    arg = (z + gamma * dz + program.shift) / program.denom_prev
    return float(np.sum(program.costs * dz * np.log(arg)))


def _line_search(program: StepProgram, w: np.ndarray, d: np.ndarray, gamma_max: float) -> float:
    """Exact minimizer of the objective along ``w + gamma d`` for gamma in [0, gamma_max]."""
    z = np.sum(program.preds * w, axis=1)
    dz = np.sum(program.preds * d, axis=1)
    if _directional_derivative(program, z, dz, gamma_max) <= 0.0:
        return gamma_max
    lo, hi = 0.0, gamma_max
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _directional_derivative(program, z, dz, mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, gamma_max):
            break
    return 0.5 * (lo + hi)


def _build_lmo_program(program: StepProgram) -> LinearProgram:
    m, K = program.num_resources, program.num_experts
    dim = m * K
    lp = LinearProgram(
        "min",
        np.zeros(dim),
        upper_bounds=np.full(dim, program.cap),
    )
    cover = (program.row[:, None] * program.aux).ravel()
    lp.add_row(cover, GE, 1.0)
    for i in range(m):
        row = np.zeros(dim)
        row[i * K : (i + 1) * K] = 1.0
        lp.add_row(row, GE, 1.0)
    return lp


@dataclass
class FrankWolfeResult:
    weights: np.ndarray  # (m, K)
    value: float
    gap: float
    iters: int
    cap_active: bool


def _correct_over_hull(
    program: StepProgram, atoms: np.ndarray, lam0: np.ndarray
) -> np.ndarray | None:
    """Minimize the objective over the convex hull of ``atoms`` (rows are vertices).

    Returns the hull weights, or None when the inner solver fails.
    """
    from scipy.optimize import minimize

    num_atoms = atoms.shape[0]
    shape = (program.num_resources, program.num_experts)

    def fun(lam: np.ndarray):
        value, grad = objective_and_gradient(program, (lam @ atoms).reshape(shape))
        return value, atoms @ grad.ravel()

    res = minimize(
        fun,
        lam0,
        jac=True,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * num_atoms,
        constraints=[
            {
                "type": "eq",
                "fun": lambda lam: lam.sum() - 1.0,
                "jac": lambda lam: np.ones(num_atoms),
            }
        ],
        options={"maxiter": 200, "ftol": 1e-12},
    )
    lam = np.clip(res.x, 0.0, None)
    total = lam.sum()
    if not np.isfinite(total) or total <= 0:
        return None
    return lam / total


def solve_step_program(
    program: StepProgram,
    gap_tol: float = Tolerances.fw_gap_tol,
    max_iters: int = Tolerances.fw_max_iters,
    corrective: bool = True,
) -> FrankWolfeResult:
    """Minimize the step program over the capped weight polytope.

    Starts from the uniform weights 1/K (always feasible: the auxiliaries are
    tight per expert, so uniform weights cover the constraint exactly) and
    iterates Frank-Wolfe until the duality gap certified by the linear
    subproblem drops below ``gap_tol``.  Raises :class:`StepSolveError` if
    the iteration cap is hit first.
    """
    m, K = program.num_resources, program.num_experts
    lmo_lp = _build_lmo_program(program)

    w = np.full((m, K), 1.0 / K)
    atom_list: list[np.ndarray] = [w.copy()]
    lam = np.array([1.0])
    gap = math.inf
    iters = 0
    for j in range(max_iters):
        iters = j + 1
        value, grad = objective_and_gradient(program, w)
        lmo_lp.objective = grad.ravel()
        sol = solve_lp(lmo_lp)
        if not sol.is_optimal:
            raise RuntimeError(f"linear subproblem came back {sol.status}")
        v = sol.x.reshape(m, K)
        gap = float(np.sum(grad * (w - v)))
        if gap <= gap_tol:
            break

        # guaranteed-descent fallback: exact line search toward the new vertex
        gamma = _line_search(program, w, v - w, 1.0)
        w_ls = w + gamma * (v - w)
        lam_ls = np.append(lam * (1.0 - gamma), gamma)
        atom_list.append(v.copy())

        w_next, lam_next = w_ls, lam_ls
        if corrective:
            stacked = np.stack([a.ravel() for a in atom_list])
            lam_corr = _correct_over_hull(program, stacked, np.append(lam, 0.0))
            if lam_corr is not None:
                w_corr = (lam_corr @ stacked).reshape(m, K)
                if objective_and_gradient(program, w_corr)[0] <= objective_and_gradient(
                    program, w_ls
                )[0]:
                    w_next, lam_next = w_corr, lam_corr
        w, lam = w_next, lam_next

        keep = lam > 1e-12
        if not keep.all():
            atom_list = [a for a, k in zip(atom_list, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
    else:
        raise StepSolveError(gap, iters)

    value, _ = objective_and_gradient(program, w)
    cap_active = bool(np.any(w >= program.cap - 1e-9))
    return FrankWolfeResult(weights=w, value=value, gap=gap, iters=iters, cap_active=cap_active)


def discrepancy_ratio(mass_steps: list[np.ndarray]) -> float:
    """Max over resources of (largest total prediction) / (smallest positive total).

    ``mass_steps[t][i]`` is the summed prediction mass of resource i at step
    t.  Resources whose mass is zero at every step are skipped; steps with
    zero mass never appear in a denominator.  Returns NaN when no resource
    ever receives positive mass; otherwise the ratio is >= 1.
    """
    if not mass_steps:
        return math.nan
    mass = np.vstack(mass_steps)  # (T, n)
    ratio = math.nan
    for i in range(mass.shape[1]):
        column = mass[:, i]
        positive = column[column > 0]
        if positive.size == 0:
            continue
        r = float(column.max() / positive.min())
        ratio = r if math.isnan(ratio) else max(ratio, r)
    return ratio


@dataclass
class AlgoState:
    """Mutable state of one online run."""

    x: np.ndarray  # (n,) current solution, monotone
    weights: np.ndarray  # (n, K) last solved weights (zero on excluded entries)
    shift: np.ndarray  # (n,) last prediction averages over active experts
    denom: np.ndarray  # (n,) last aggregates z + shift
    step_count: int = 0


class AlgorithmRun:
    """Online run of the main algorithm over a fixed expert roster.

    Feed constraint rows one at a time with :meth:`step`; the run advances
    its experts, validates their streams, preprocesses the predictions, and
    solves the per-step program.  A dummy expert is appended by default so
    every resource keeps a positive prediction average (the denominators of
    the program's logarithm stay positive).
    """

    def __init__(
        self,
        instance: CoveringInstance,
        experts: list,
        append_dummy: bool = True,
        cap: float | None = None,
        tolerances: Tolerances | None = None,
        keep_programs: bool = False,
        label: str = "alg",
    ):
        from covexperts.experts import DummyExpert

        self.instance = instance
        self.tol = tolerances or Tolerances()
        self.label = label
        self.experts = list(experts)
        if append_dummy:
            self.experts.append(DummyExpert(instance.costs))
        self.num_experts = len(self.experts)
        self.cap = float(cap) if cap is not None else float(self.num_experts)
        if self.cap < 1.0:
            raise ValueError("weight cap below 1 can cut off the uniform point")
        n = instance.n
        self.predictions = PredictionMatrix(n, self.num_experts)  # raw stream
        self.scaled_steps: list[np.ndarray] = []
        self.aux_steps: list[np.ndarray] = []
        self.mass_steps: list[np.ndarray] = []
        self.state = AlgoState(
            x=np.zeros(n),
            weights=np.zeros((n, self.num_experts)),
            shift=np.zeros(n),
            denom=np.zeros(n),
        )
        self.trace: list[dict] = []
        self.keep_programs = keep_programs
        self.programs: list[StepProgram] = []
        self.program_results: list[FrankWolfeResult] = []
        self._prev_row: np.ndarray | None = None

    def step(self, row: np.ndarray) -> np.ndarray:
        """Process one arriving constraint and return the updated solution."""
        t = self.state.step_count
        row = np.asarray(row, dtype=float)
        mask = collect_predictions(
            self.experts, self.predictions, self.instance, t, rel_tol=self.tol.expert_rel_tol
        )
        raw = self.predictions.steps[t]

        scaled_prev = self.scaled_steps[-1] if self.scaled_steps else None
        aux_prev = self.aux_steps[-1] if self.aux_steps else None
        pre = preprocess_matrix(raw, scaled_prev, aux_prev, self._prev_row, row)
        scaled, aux = pre.scaled, pre.aux
        if scaled_prev is not None:
            # deactivated experts are frozen at their last scaled values
            dropped = ~mask
            scaled[:, dropped] = scaled_prev[:, dropped]
            aux[:, dropped] = aux_prev[:, dropped]
        self.scaled_steps.append(scaled)
        self.aux_steps.append(aux)

        active = np.flatnonzero(mask)
        mass = scaled[:, active].sum(axis=1)
        self.mass_steps.append(mass)
        shift = mass / active.size
        included = np.flatnonzero(mass > 0)

        # A resource's first program (step 1, or first positive prediction)
        # has no previous aggregate; its own prediction average is the neutral
        # reference point: zero movement then costs zero.
        denom_prev = self.state.denom[included]
        denom_prev = np.where(denom_prev > 0, denom_prev, shift[included])
        program = StepProgram(
            costs=self.instance.costs[included],
            preds=scaled[np.ix_(included, active)],
            aux=aux[np.ix_(included, active)],
            shift=shift[included],
            denom_prev=denom_prev,
            row=row[included],
            cap=self.cap,
        )
        result = solve_step_program(
            program, gap_tol=self.tol.fw_gap_tol, max_iters=self.tol.fw_max_iters
        )
        if self.keep_programs:
            self.programs.append(program)
            self.program_results.append(result)

        weights = np.zeros((self.instance.n, self.num_experts))
        weights[np.ix_(included, active)] = result.weights
        z = np.sum(scaled * weights, axis=1)
        prev_x = self.state.x
        new_x = np.maximum(z, prev_x)
        marginal = float(self.instance.costs @ (new_x - prev_x))

        self.state = AlgoState(
            x=new_x,
            weights=weights,
            shift=shift,
            denom=z + shift,
            step_count=t + 1,
        )
        self._prev_row = row
        self.trace.append(
            {
                "algo": self.label,
                "t": t,
                "x": new_x.tolist(),
                "weights": weights.tolist(),
                "shift": shift.tolist(),
                "denom_prev": self._expand(denom_prev, included).tolist(),
                "denom": (z + shift).tolist(),
                "mass": mass.tolist(),
                "fw_gap": result.gap,
                "fw_iters": result.iters,
                "cap_active": result.cap_active,
                "marginal_cost": marginal,
            }
        )
        return new_x.copy()

    def _expand(self, values: np.ndarray, idx: np.ndarray) -> np.ndarray:
        out = np.ones(self.instance.n)
        out[idx] = values
        return out

    def run(self) -> np.ndarray:
        """Process the whole instance and return the final solution."""
        for row in self.instance.rows[self.state.step_count :]:
            self.step(row)
        return self.state.x.copy()

    def cost(self) -> float:
        return float(self.instance.costs @ self.state.x)

    def discrepancy(self) -> float:
        return discrepancy_ratio(self.mass_steps)

    def effective_num_experts(self) -> int:
        return self.predictions.num_active()


class AlgorithmExpert:
    """Adapter exposing any online run (``step(row) -> x``) as an expert."""

    def __init__(self, run, name: str = "algorithm"):
        self._run = run
        self.name = name

    def step(self, row: np.ndarray) -> np.ndarray:
        return np.asarray(self._run.step(row), dtype=float).copy()


def combine(
    instance: CoveringInstance,
    runs: list,
    append_dummy: bool = True,
    tolerances: Tolerances | None = None,
    label: str = "combined",
) -> AlgorithmRun:
    """Layer the main algorithm on top of other online algorithms.

    Each entry of ``runs`` must expose ``step(row) -> x`` with feasible,
    monotone outputs (any :class:`AlgorithmRun` or baseline run qualifies);
    they are treated as the experts of a fresh two-expert run.  Invalid
    streams are dropped by the usual online validation.
    """
    experts = [
        AlgorithmExpert(run, name=getattr(run, "label", f"inner{i}"))
        for i, run in enumerate(runs)
    ]
    return AlgorithmRun(
        instance,
        experts,
        append_dummy=append_dummy,
        tolerances=tolerances,
        label=label,
    )
