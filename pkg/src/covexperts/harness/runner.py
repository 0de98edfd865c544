"""Experiment orchestration: run algorithms and benchmarks, check invariants.

``run_experiment`` drives the requested algorithms over one instance,
computes the benchmark values, runs every applicable certificate and trace
check, and returns a :class:`RunReport` plus the per-step trace records.
Any failed check marks the report failed.  ``emit_table`` renders a list of
reports as the standard comparison table (Markdown and CSV).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from covexperts.baselines import AnandRun, MwaRun, average_of_experts
from covexperts.config import Tolerances
from covexperts.core import AlgorithmRun, discrepancy_ratio
from covexperts.experts import PredictionMatrix, build_expert, collect_predictions
from covexperts.harness.certificates import check_competitive_ratio, check_dual_certificate
from covexperts.instance import CoveringInstance, validate
from covexperts.lp import (
    build_dual_lp,
    build_lincomb_lp,
    build_relaxation_lp,
    solve_dynamic,
    solve_lp,
    solve_offline_opt,
)

ALGO_NAMES = ("alg", "mwa", "anand")
TABLE_ROWS = ("OPT Offline", "MWA Online", "Our Algo", "Avg of experts")


@dataclass
class RunConfig:
    instance: CoveringInstance
    roster: list[dict]
    algos: tuple[str, ...] = ("alg", "mwa")
    append_dummy: bool = True
    benchmarks: bool = True
    label: str | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class RunReport:
    """Final costs, benchmark values, and check outcomes for one experiment."""

    label: str
    num_resources: int
    num_steps: int
    num_user_experts: int
    effective_num_experts: int | None
    discrepancy: float | None  # of the algorithm's preprocessed stream (dummy included)
    raw_discrepancy: float | None  # of the validated user expert stream
    costs: dict
    benchmarks: dict
    ratio_constant: float
    checks: list[CheckResult]
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checks"] = [asdict(c) for c in self.checks]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        checks = [CheckResult(**c) for c in d.get("checks", [])]
        fields = {k: v for k, v in d.items() if k != "checks"}
        return cls(checks=checks, **fields)


def _check_trace(
    instance: CoveringInstance,
    solutions: list[np.ndarray],
    reported_cost: float,
    name: str,
    tol: Tolerances,
    prefix_target: float = 1.0,
    final_scale: float = 1.0,
) -> list[CheckResult]:
    """Monotonicity, prefix feasibility, and cost-recompute checks for one trace."""
    results = []
    monotone = all(
        np.all(solutions[t] >= solutions[t - 1] - 1e-12) for t in range(1, len(solutions))
    )
    results.append(CheckResult(f"{name}_monotone", monotone))
    worst = math.inf
    for t, x in enumerate(solutions):
        for row in instance.rows[: t + 1]:
            worst = min(worst, float(row @ x))
    feasible = worst >= prefix_target - tol.feasibility_tol
    results.append(
        CheckResult(
            f"{name}_prefix_feasible",
            feasible,
            f"min prefix value {worst:.9f} (target {prefix_target})",
        )
    )
    recomputed = final_scale * float(instance.costs @ solutions[-1])
    ok = abs(recomputed - reported_cost) <= tol.cost_tol * max(1.0, abs(reported_cost))
    results.append(
        CheckResult(f"{name}_cost_recompute", ok, f"trace {recomputed!r} vs {reported_cost!r}")
    )
    return results


def _prediction_pass(
    instance: CoveringInstance, roster: list[dict], tol: Tolerances
) -> PredictionMatrix:
    experts = [build_expert(e, instance) for e in roster]
    pm = PredictionMatrix(instance.n, len(experts))
    for t in range(instance.num_steps):
        collect_predictions(experts, pm, instance, t, rel_tol=tol.expert_rel_tol)
    return pm


def run_experiment(config: RunConfig) -> tuple[RunReport, list[dict]]:
    instance = config.instance
    tol = config.tolerances
    problems = validate(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    label = config.label or instance.meta.get("generator", "instance")

    checks: list[CheckResult] = []
    trace: list[dict] = []
    costs: dict = {"alg": None, "mwa": None, "anand": None, "avg_experts": None}
    benchmarks: dict = {
        "opt_offline": None,
        "lincomb": None,
        "relaxation": None,
        "dual": None,
        "dynamic": None,
    }

    alg_run = None
    if "alg" in config.algos:
        experts = [build_expert(e, instance) for e in config.roster]
        alg_run = AlgorithmRun(
            instance,
            experts,
            append_dummy=config.append_dummy,
            tolerances=tol,
            label="alg",
        )
        alg_run.run()
        costs["alg"] = alg_run.cost()
        trace.extend(alg_run.trace)
        checks.extend(
            _check_trace(instance, [np.asarray(r["x"]) for r in alg_run.trace],
                         costs["alg"], "alg", tol)
        )
        gaps_ok = all(r["fw_gap"] <= tol.fw_gap_tol for r in alg_run.trace)
        checks.append(
            CheckResult(
                "alg_fw_gap",
                gaps_ok,
                f"max gap {max(r['fw_gap'] for r in alg_run.trace):.3g}",
            )
        )
        predictions = alg_run.predictions
        user_mask = predictions.active.copy()
        if config.append_dummy:
            user_mask[-1] = False  # dummy column is internal to the algorithm
        user_steps = [s[:, user_mask] for s in predictions.steps]
    else:
        pm = _prediction_pass(instance, config.roster, tol)
        user_steps = [s[:, pm.active] for s in pm.steps]

    num_user = user_steps[0].shape[1] if user_steps else 0
    raw_disc = discrepancy_ratio([s.sum(axis=1) for s in user_steps])

    avg_cost, avg_x = average_of_experts(user_steps[-1], instance.costs)
    costs["avg_experts"] = avg_cost
    avg_feasible = all(float(row @ avg_x) >= 1.0 - tol.feasibility_tol for row in instance.rows)
    checks.append(CheckResult("avg_experts_feasible", avg_feasible))

    if "mwa" in config.algos:
        mwa = MwaRun(instance.costs, tol=tol.growth_tol)
        xs = []
        for t, row in enumerate(instance.rows):
            x = mwa.step(row).copy()
            xs.append(x)
            trace.append({"algo": "mwa", "t": t, "x": x.tolist()})
        costs["mwa"] = mwa.cost()
        checks.extend(_check_trace(instance, xs, costs["mwa"], "mwa", tol))

    if "anand" in config.algos:
        tight = all(
            abs(float(instance.rows[t] @ user_steps[t][:, k]) - 1.0) <= tol.feasibility_tol
            for t in range(instance.num_steps)
            for k in range(num_user)
        )
        if not tight:
            checks.append(
                CheckResult(
                    "anand_applicable",
                    True,
                    "skipped: expert solutions are not tight on every constraint",
                )
            )
        else:
            anand = AnandRun(instance.costs, tol=tol.growth_tol)
            xs = []
            for t, row in enumerate(instance.rows):
                x = anand.step(row, user_steps[t]).copy()
                xs.append(x)
                trace.append({"algo": "anand", "t": t, "x": x.tolist()})
            costs["anand"] = anand.cost()
            checks.extend(
                _check_trace(
                    instance, xs, costs["anand"], "anand", tol,
                    prefix_target=AnandRun.CAP, final_scale=2.0,
                )
            )
            doubled = anand.finalize()
            final_ok = all(
                float(row @ doubled) >= 1.0 - tol.feasibility_tol for row in instance.rows
            )
            checks.append(CheckResult("anand_doubled_feasible", final_ok))

    if config.benchmarks:
        opt = solve_offline_opt(instance)
        benchmarks["opt_offline"] = opt.value
        checks.append(CheckResult("opt_offline_solved", opt.is_optimal, opt.status))
        lincomb = solve_lp(build_lincomb_lp(instance, user_steps))
        relaxation = solve_lp(build_relaxation_lp(instance, user_steps))
        dual = solve_lp(build_dual_lp(instance, user_steps))
        dynamic = solve_dynamic(instance, user_steps)
        benchmarks["lincomb"] = lincomb.value
        benchmarks["relaxation"] = relaxation.value
        benchmarks["dual"] = dual.value
        benchmarks["dynamic"] = dynamic.value
        expert_costs = [
            float(instance.costs @ user_steps[-1][:, k]) for k in range(num_user)
        ]
        slack = 1e-6 * max(1.0, abs(relaxation.value or 1.0))
        sandwich_ok = (
            abs(dual.value - relaxation.value) <= slack
            and relaxation.value <= lincomb.value + slack
            and lincomb.value <= min(expert_costs) + slack
            and dynamic.value <= lincomb.value + slack
        )
        checks.append(
            CheckResult(
                "benchmark_sandwich",
                sandwich_ok,
                f"dual={dual.value:.6g} relax={relaxation.value:.6g} "
                f"lincomb={lincomb.value:.6g} min_expert={min(expert_costs):.6g} "
                f"dynamic={dynamic.value:.6g}",
            )
        )

    effective = None
    disc = None
    if alg_run is not None:
        effective = alg_run.effective_num_experts()
        disc = alg_run.discrepancy()
        user_scaled_mass = [s[:, user_mask].sum(axis=1) for s in alg_run.scaled_steps]
        cert_ok, violation, detail = check_dual_certificate(
            instance.costs,
            alg_run.mass_steps,
            [np.asarray(r["denom"]) for r in alg_run.trace],
            effective,
            disc,
            tol=tol.certificate_tol,
            predicted_steps=user_scaled_mass,
        )
        checks.append(CheckResult("dual_certificate", cert_ok, detail))
        if config.benchmarks and benchmarks["lincomb"] is not None:
            ratio_ok, bound, detail = check_competitive_ratio(
                costs["alg"], benchmarks["lincomb"], effective, disc,
                constant=tol.ratio_constant,
            )
            checks.append(CheckResult("competitive_ratio", ratio_ok, detail))

    report = RunReport(
        label=label,
        num_resources=instance.n,
        num_steps=instance.num_steps,
        num_user_experts=num_user,
        effective_num_experts=effective,
        discrepancy=disc,
        raw_discrepancy=raw_disc if math.isfinite(raw_disc) else None,
        costs=costs,
        benchmarks=benchmarks,
        ratio_constant=tol.ratio_constant,
        checks=checks,
        passed=all(c.passed for c in checks),
    )
    return report, trace


def verify_report(report: RunReport) -> tuple[bool, list[str]]:
    """Re-assert a stored report's internal consistency.

    Re-derives the benchmark sandwich orderings and the competitive-ratio
    bound from the stored numbers and re-checks every recorded outcome.
    """
    problems = [f"check failed: {c.name} ({c.detail})" for c in report.checks if not c.passed]
    b = report.benchmarks
    if b.get("dual") is not None and b.get("relaxation") is not None:
        slack = 1e-6 * max(1.0, abs(b["relaxation"]))
        if abs(b["dual"] - b["relaxation"]) > slack:
            problems.append("stored dual and relaxation values disagree")
        if b.get("lincomb") is not None:
            if b["relaxation"] > b["lincomb"] + slack:
                problems.append("stored relaxation exceeds the combination benchmark")
            if b.get("dynamic") is not None and b["dynamic"] > b["lincomb"] + slack:
                problems.append("stored dynamic value exceeds the combination benchmark")
    if (
        report.costs.get("alg") is not None
        and b.get("lincomb") is not None
        and report.effective_num_experts
        and report.discrepancy
    ):
        ok, _, detail = check_competitive_ratio(
            report.costs["alg"],
            b["lincomb"],
            report.effective_num_experts,
            report.discrepancy,
            constant=report.ratio_constant,
        )
        if not ok:
            problems.append(f"stored costs violate the ratio bound: {detail}")
    return not problems, problems


def _fmt(value) -> str:
    return "-" if value is None else f"{value:.4g}"


def emit_table(reports: list[RunReport]) -> tuple[str, str]:
    """Markdown and CSV comparison tables, one column per report."""
    columns = [r.label for r in reports]
    rows = [
        ("OPT Offline", [r.benchmarks.get("opt_offline") for r in reports]),
        ("MWA Online", [r.costs.get("mwa") for r in reports]),
        ("Our Algo", [r.costs.get("alg") for r in reports]),
        ("Avg of experts", [r.costs.get("avg_experts") for r in reports]),
        ("Anand et al.", [r.costs.get("anand") for r in reports]),
        ("LIN-COMB", [r.benchmarks.get("lincomb") for r in reports]),
        ("DYNAMIC", [r.benchmarks.get("dynamic") for r in reports]),
        ("discrepancy", [r.discrepancy for r in reports]),
    ]
    # drop optional rows that are empty everywhere; the first four always print
    rows = [row for i, row in enumerate(rows) if i < 4 or any(v is not None for v in row[1])]

    md = ["| Algo name | " + " | ".join(columns) + " |",
          "|---|" + "---|" * len(columns)]
    csv = ["Algo name," + ",".join(columns)]
    for name, values in rows:
        md.append("| " + name + " | " + " | ".join(_fmt(v) for v in values) + " |")
        csv.append(name + "," + ",".join("" if v is None else repr(float(v)) for v in values))
    return "\n".join(md) + "\n", "\n".join(csv) + "\n"
