"""FastAPI service wrapping the core package.

Stateless compute endpoints: clients ship instances and rosters inline and
receive reports and traces back; no files or results are stored server-side.
The bundled CLI is a thin client of this API (in-process by default).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

import covexperts
from covexperts.config import load_tolerances
from covexperts.harness import RunConfig, RunReport, emit_table, run_experiment, verify_report
from covexperts.instance import (
    CoveringInstance,
    GeneratorParams,
    gen_anand_counterexample,
    gen_mwa_worst_case,
    gen_random,
    validate,
)
from covexperts.service.schemas import (
    BenchmarkRequest,
    BenchmarkResponse,
    GenerateRequest,
    GenerateResponse,
    HealthResponse,
    InstanceModel,
    ReportModel,
    RunRequest,
    RunResponse,
    ValidateRequest,
    ValidateResponse,
    VerifyRequest,
    VerifyResponse,
)


def _to_instance(model: InstanceModel) -> CoveringInstance:
    return CoveringInstance.from_dict(model.model_dump())


def _run_one(req: RunRequest) -> tuple[RunReport, list[dict]]:
    config = RunConfig(
        instance=_to_instance(req.instance),
        roster=[e.model_dump(exclude_none=True) for e in req.roster],
        algos=tuple(req.algos),
        append_dummy=req.append_dummy,
        benchmarks=req.benchmarks,
        label=req.label,
        tolerances=load_tolerances(),
    )
    return run_experiment(config)


def create_app() -> FastAPI:
    app = FastAPI(
        title="covexperts",
        description="Online covering with multiple expert predictions",
        version=covexperts.__version__,
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=covexperts.__version__)

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest) -> GenerateResponse:
        try:
            if req.family == "random":
                params = dict(req.params)
                if req.seed is not None:
                    params["seed"] = req.seed
                instance = gen_random(GeneratorParams(**params))
                preds = None
            elif req.family == "mwa-worst":
                instance = gen_mwa_worst_case(int(req.params["n"]))
                preds = None
            else:
                instance, matrices = gen_anand_counterexample(
                    int(req.params["num_experts"]), int(req.params["num_batches"])
                )
                preds = [m.T.tolist() for m in matrices]
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return GenerateResponse(
            instance=InstanceModel(**instance.to_dict()), predictions=preds
        )

    @app.post("/validate", response_model=ValidateResponse)
    def validate_instance(req: ValidateRequest) -> ValidateResponse:
        violations = validate(_to_instance(req.instance))
        return ValidateResponse(ok=not violations, violations=violations)

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            report, trace = _run_one(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return RunResponse(
            report=ReportModel(**report.to_dict()),
            trace=trace if req.include_trace else None,
        )

    @app.post("/benchmark", response_model=BenchmarkResponse)
    def benchmark(req: BenchmarkRequest) -> BenchmarkResponse:
        reports = []
        for job in req.jobs:
            try:
                report, _ = _run_one(job)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            reports.append(report)
        md, csv = emit_table(reports)
        return BenchmarkResponse(
            reports=[ReportModel(**r.to_dict()) for r in reports],
            table_markdown=md,
            table_csv=csv,
            passed=all(r.passed for r in reports),
        )

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        report = RunReport.from_dict(req.report.model_dump())
        passed, problems = verify_report(report)
        return VerifyResponse(passed=passed, problems=problems)

    return app


app = create_app()
