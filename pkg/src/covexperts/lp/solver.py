"""Dense LP container and solver.

``LinearProgram`` carries an objective, inequality/equality rows, and
per-variable bounds; ``solve_lp`` dispatches to scipy's HiGHS backend and
maps the result onto the ``LpSolution`` contract.  Solves are deterministic
for identical inputs.  ``to_lp_text`` renders a program in the plain-text LP
interchange format for cross-checking against external solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

GE, LE, EQ = ">=", "<=", "="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

ROW_TOL = 1e-7  # relative slack allowed on rows of an optimal solution


@dataclass
class LinearProgram:
    """min/max c'x subject to rows (A x rel b) and bounds lb <= x <= ub."""

    sense: str  # "min" or "max"
    objective: np.ndarray
    row_coefs: list[np.ndarray] = field(default_factory=list)
    row_relations: list[str] = field(default_factory=list)
    row_rhs: list[float] = field(default_factory=list)
    lower_bounds: np.ndarray | None = None  # default 0
    upper_bounds: np.ndarray | None = None  # default +inf
    variable_names: list[str] | None = None

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.size
        if self.lower_bounds is None:
            self.lower_bounds = np.zeros(n)
        else:
            self.lower_bounds = np.asarray(self.lower_bounds, dtype=float)
        if self.upper_bounds is None:
            self.upper_bounds = np.full(n, np.inf)
        else:
            self.upper_bounds = np.asarray(self.upper_bounds, dtype=float)
        self.row_coefs = [np.asarray(r, dtype=float) for r in self.row_coefs]
        self._check()

    def _check(self) -> None:
        n = self.num_variables
        if self.sense not in ("min", "max"):
            raise ValueError(f"unknown sense {self.sense!r}")
        if not (len(self.row_coefs) == len(self.row_relations) == len(self.row_rhs)):
            raise ValueError("row fields have inconsistent lengths")
        for r in self.row_coefs:
            if r.shape != (n,):
                raise ValueError(f"row of shape {r.shape} in a {n}-variable program")
        for rel in self.row_relations:
            if rel not in (GE, LE, EQ):
                raise ValueError(f"unknown relation {rel!r}")
        if np.any(self.lower_bounds > self.upper_bounds):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def num_variables(self) -> int:
        return int(self.objective.size)

    @property
    def num_rows(self) -> int:
        return len(self.row_coefs)

    def add_row(self, coefs: np.ndarray, relation: str, rhs: float) -> None:
        coefs = np.asarray(coefs, dtype=float)
        if coefs.shape != (self.num_variables,):
            raise ValueError("row length mismatch")
        if relation not in (GE, LE, EQ):
            raise ValueError(f"unknown relation {relation!r}")
        self.row_coefs.append(coefs)
        self.row_relations.append(relation)
        self.row_rhs.append(float(rhs))


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None
    value: float | None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def solve_lp(program: LinearProgram) -> LpSolution:
    """Solve the program; when optimal, every row holds within 1e-7 relative."""
    sign = 1.0 if program.sense == "min" else -1.0
    c = sign * program.objective

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for coefs, rel, rhs in zip(program.row_coefs, program.row_relations, program.row_rhs):
        if rel == LE:
            a_ub.append(coefs)
            b_ub.append(rhs)
        elif rel == GE:
            a_ub.append(-coefs)
            b_ub.append(-rhs)
        else:
            a_eq.append(coefs)
            b_eq.append(rhs)

    bounds = [
        (lo, None if np.isinf(hi) else hi)
        for lo, hi in zip(program.lower_bounds, program.upper_bounds)
    ]
    res = linprog(
        c,
        A_ub=np.asarray(a_ub) if a_ub else None,
        b_ub=np.asarray(b_ub) if b_ub else None,
        A_eq=np.asarray(a_eq) if a_eq else None,
        b_eq=np.asarray(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return LpSolution(INFEASIBLE, None, None)
    if res.status == 3:
        return LpSolution(UNBOUNDED, None, None)
    if res.status != 0:
        raise RuntimeError(f"LP solve failed: {res.message}")
    x = np.asarray(res.x, dtype=float)
    _assert_rows_satisfied(program, x)
    return LpSolution(OPTIMAL, x, float(sign * res.fun))


def _assert_rows_satisfied(program: LinearProgram, x: np.ndarray) -> None:
    for coefs, rel, rhs in zip(program.row_coefs, program.row_relations, program.row_rhs):
        lhs = float(coefs @ x)
        slack = ROW_TOL * max(1.0, abs(rhs))
        ok = (
            lhs >= rhs - slack
            if rel == GE
            else lhs <= rhs + slack
            if rel == LE
            else abs(lhs - rhs) <= slack
        )
        if not ok:
            raise RuntimeError(f"optimal solution violates row: {lhs} {rel} {rhs}")


def _term(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    return f"{sign} {abs(coef):.12g} {name} "


def to_lp_text(program: LinearProgram, name: str = "program") -> str:
    """Render in the plain-text LP interchange format (debug/cross-check only)."""
    n = program.num_variables
    names = program.variable_names or [f"x{j}" for j in range(n)]
    out = [f"\\ {name}", "Minimize" if program.sense == "min" else "Maximize", " obj: "]
    first = True
    for j in range(n):
        if program.objective[j] != 0:
            out.append(_term(program.objective[j], names[j], first))
            first = False
    if first:
        out.append("0 " + names[0] + " ")
    out.append("\nSubject To\n")
    for i, (coefs, rel, rhs) in enumerate(
        zip(program.row_coefs, program.row_relations, program.row_rhs)
    ):
        out.append(f" r{i}: ")
        first = True
        for j in range(n):
            if coefs[j] != 0:
                out.append(_term(coefs[j], names[j], first))
                first = False
        if first:
            out.append("0 " + names[0] + " ")
        out.append({GE: ">=", LE: "<=", EQ: "="}[rel] + f" {rhs:.12g}\n")
    out.append("Bounds\n")
    for j in range(n):
        lo, hi = program.lower_bounds[j], program.upper_bounds[j]
        if np.isinf(hi):
            out.append(f" {names[j]} >= {lo:.12g}\n")
        else:
            out.append(f" {lo:.12g} <= {names[j]} <= {hi:.12g}\n")
    out.append("End\n")
    return "".join(out)
