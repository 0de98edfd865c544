"""Command-line interface: a thin client of the service API.

All file reading and writing happens client-side; the service only computes.
Subcommands: ``generate`` (instance families), ``run`` (one experiment),
``benchmark`` (a suite of experiments plus the comparison table), ``verify``
(re-check a stored report), and ``serve`` (start the HTTP service).
Exit code 0 means every check passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from covexperts.client import make_client


def _load_json_arg(value: str) -> dict:
    """Accept inline JSON or a path to a JSON file."""
    value = value.strip()
    if value.startswith("{"):
        return json.loads(value)
    return json.loads(Path(value).read_text())


def _load_roster(path: str) -> tuple[list[dict], bool]:
    """Read a roster file, expanding scripted prediction files inline."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, list):
        entries, append_dummy = data, True
    else:
        entries = data["experts"]
        append_dummy = bool(data.get("append_dummy", True))
    base = Path(path).parent
    expanded = []
    for entry in entries:
        entry = dict(entry)
        if entry.get("type") == "scripted" and "path" in entry:
            sidecar = json.loads((base / entry.pop("path")).read_text())
            num = int(sidecar["num_experts"])
            steps = sidecar["predictions"]  # steps x experts x resources
            for k in range(num):
                expanded.append(
                    {"type": "scripted", "predictions": [step[k] for step in steps]}
                )
        else:
            expanded.append(entry)
    return expanded, append_dummy


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        print(f"error: {path} returned {response.status_code}: {detail}", file=sys.stderr)
        raise SystemExit(2)
    return response.json()


def _print_report(report: dict) -> None:
    print(f"run '{report['label']}': {'PASS' if report['passed'] else 'FAIL'}")
    for name in ("alg", "mwa", "anand", "avg_experts"):
        if report["costs"].get(name) is not None:
            print(f"  cost[{name}] = {report['costs'][name]:.6g}")
    for name, value in report["benchmarks"].items():
        if value is not None:
            print(f"  benchmark[{name}] = {value:.6g}")
    if report.get("discrepancy") is not None:
        print(f"  discrepancy = {report['discrepancy']:.6g}"
              f" (effective experts: {report['effective_num_experts']})")
    for check in report["checks"]:
        status = "ok" if check["passed"] else "FAIL"
        suffix = f"  {check['detail']}" if check["detail"] else ""
        print(f"  [{status}] {check['name']}{suffix}")


def cmd_generate(args) -> int:
    client = make_client(args.server)
    params = _load_json_arg(args.params) if args.params else {}
    payload = {"family": args.family, "params": params, "seed": args.seed}
    result = _post(client, "/generate", payload)
    Path(args.out).write_text(json.dumps(result["instance"], sort_keys=True))
    print(f"wrote {args.out}")
    if result.get("predictions") is not None:
        target = args.predictions_out or str(Path(args.out).with_suffix(".predictions.json"))
        num_experts = len(result["predictions"][0]) if result["predictions"] else 0
        Path(target).write_text(
            json.dumps({"num_experts": num_experts, "predictions": result["predictions"]})
        )
        print(f"wrote {target}")
    return 0


def cmd_run(args) -> int:
    client = make_client(args.server)
    instance = json.loads(Path(args.instance).read_text())
    roster, append_dummy = _load_roster(args.experts)
    if args.no_dummy:
        append_dummy = False
    payload = {
        "instance": instance,
        "roster": roster,
        "algos": args.algos.split(","),
        "append_dummy": append_dummy,
        "benchmarks": not args.no_benchmarks,
        "include_trace": args.trace is not None,
        "label": args.label,
    }
    result = _post(client, "/run", payload)
    report = result["report"]
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2))
    if args.trace and result.get("trace") is not None:
        with open(args.trace, "w") as fh:
            for record in result["trace"]:
                fh.write(json.dumps(record) + "\n")
    _print_report(report)
    return 0 if report["passed"] else 1


def cmd_benchmark(args) -> int:
    client = make_client(args.server)
    suite = json.loads(Path(args.suite).read_text())
    base = Path(args.suite).parent
    jobs = []
    for job in suite["jobs"]:
        instance = json.loads((base / job["instance"]).read_text())
        roster, append_dummy = _load_roster(str(base / job["experts"]))
        jobs.append(
            {
                "instance": instance,
                "roster": roster,
                "algos": job.get("algos", ["alg", "mwa"]),
                "append_dummy": job.get("append_dummy", append_dummy),
                "benchmarks": job.get("benchmarks", True),
                "include_trace": False,
                "label": job.get("label"),
            }
        )
    result = _post(client, "/benchmark", {"jobs": jobs})
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for report in result["reports"]:
        (out_dir / f"report_{report['label']}.json").write_text(json.dumps(report, indent=2))
    (out_dir / "table.md").write_text(result["table_markdown"])
    (out_dir / "table.csv").write_text(result["table_csv"])
    print(result["table_markdown"])
    print(f"reports and tables written to {out_dir}")
    return 0 if result["passed"] else 1


def cmd_verify(args) -> int:
    client = make_client(args.server)
    report = json.loads(Path(args.report).read_text())
    result = _post(client, "/verify", {"report": report})
    if result["passed"]:
        print("report verified: all checks pass")
        return 0
    for problem in result["problems"]:
        print(f"FAIL: {problem}")
    return 1


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("covexperts.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covexperts", description=__doc__)
    parser.add_argument("--server", default=None, help="service URL (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate an instance file")
    p.add_argument("--family", required=True, choices=["random", "mwa-worst", "anand"])
    p.add_argument("--params", default=None, help="inline JSON or a JSON file path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--predictions-out", default=None,
                   help="where to write scripted predictions (anand family)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run algorithms and checks on one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--experts", required=True, help="roster JSON file")
    p.add_argument("--algos", default="alg,mwa")
    p.add_argument("--out", default=None, help="report JSON path")
    p.add_argument("--trace", default=None, help="trace JSONL path")
    p.add_argument("--label", default=None)
    p.add_argument("--no-benchmarks", action="store_true")
    p.add_argument("--no-dummy", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("benchmark", help="run a suite of experiments")
    p.add_argument("--suite", required=True)
    p.add_argument("--out-dir", default="benchmark_out")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("verify", help="re-check a stored report")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
