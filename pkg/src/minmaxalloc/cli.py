"""Command-line front end: a thin client of the HTTP service.

Without --server the service runs in-process over an ASGI transport, so no
daemon is needed; with --server requests go to a remote instance.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import httpx
from pydantic import ValidationError

from .config import ScenarioFile, SweepFile

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


class ServiceClient:
    """HTTP client for the service, in-process unless a server URL is given."""

    def __init__(self, server: Optional[str] = None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, body: dict) -> dict:
        response = self._client.post(path, json=body)
        if response.status_code != 200:
            raise CliError(_extract_detail(response), code=EXIT_USAGE)
        return response.json()

    def close(self):
        self._client.close()


def _extract_detail(response: httpx.Response) -> str:
    try:
        detail = response.json().get("detail", response.text)
    except Exception:
        detail = response.text
    if isinstance(detail, list):
        parts = []
        for item in detail:
            loc = ".".join(str(p) for p in item.get("loc", ()))
            parts.append(f"{loc}: {item.get('msg', item)}")
        detail = "; ".join(parts)
    return f"service rejected the request: {detail}"


def _load_json(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CliError(f"config file {path} is not valid JSON: {exc}")


def _validation_error(path: str, exc: ValidationError) -> CliError:
    issues = "; ".join(
        f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
    )
    return CliError(f"invalid config {path}: {issues}")


def load_scenario_file(path: str) -> ScenarioFile:
    data = _load_json(path)
    try:
        return ScenarioFile.model_validate(data)
    except ValidationError as exc:
        raise _validation_error(path, exc)


def load_sweep_file(path: str) -> SweepFile:
    data = _load_json(path)
    try:
        return SweepFile.model_validate(data)
    except ValidationError as exc:
        raise _validation_error(path, exc)


def _apply_common_overrides(scenario_data: dict, args) -> dict:
    if args.seed is not None:
        scenario_data["seed"] = args.seed
    if args.checks is not None:
        scenario_data["checks"] = args.checks == "on"
    return scenario_data


def _out_stem(out: str) -> Path:
    path = Path(out)
    if path.suffix in (".csv", ".json"):
        path = path.with_suffix("")
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def cmd_run(args) -> int:
    loaded = load_scenario_file(args.config)
    scenario = _apply_common_overrides(loaded.scenario.model_dump(mode="json"), args)
    client = ServiceClient(args.server)
    try:
        body = {"scenario": scenario, "timing_in_csv": args.csv_timing}
        reply = client.post("/run", body)
    finally:
        client.close()
    stem = _out_stem(args.out)
    _write_text(stem.with_suffix(".csv"), reply["csv"])
    _write_text(
        stem.with_suffix(".json"), json.dumps(reply["payload"], indent=2) + "\n"
    )
    summary = reply["summary"]
    print(
        f"run {summary['algorithm']} seed={summary['seed']} T={summary['horizon']}: "
        f"final regret {summary['final_regret']:.6g}, "
        f"tail avg {summary['tail_avg_regret']:.6g}"
    )
    if not reply["checks_passed"]:
        for line in summary["check_failures"]:
            print(f"check failed: {line}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_compare(args) -> int:
    loaded = load_scenario_file(args.config)
    scenario = _apply_common_overrides(loaded.scenario.model_dump(mode="json"), args)
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    if not policies:
        raise CliError("no policies given")
    client = ServiceClient(args.server)
    try:
        body = {
            "scenario": scenario,
            "policies": policies,
            "timing_in_csv": args.csv_timing,
        }
        reply = client.post("/compare", body)
    finally:
        client.close()
    stem = _out_stem(args.out)
    _write_text(stem.with_suffix(".csv"), reply["csv"])
    for name in policies:
        summary = reply["summaries"][name]
        print(
            f"{name}: final regret {summary['final_regret']:.6g}, "
            f"tail avg {summary['tail_avg_regret']:.6g}, "
            f"policy time {summary['total_policy_time_s']:.4g}s"
        )
    if not reply["checks_passed"]:
        for name, summary in reply["summaries"].items():
            for line in summary["check_failures"]:
                print(f"check failed [{name}]: {line}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_sweep(args) -> int:
    loaded = load_sweep_file(args.config)
    scenario = _apply_common_overrides(loaded.scenario.model_dump(mode="json"), args)
    client = ServiceClient(args.server)
    try:
        body = {
            "scenario": scenario,
            "sweep": loaded.sweep.model_dump(mode="json"),
            "jobs": args.jobs,
        }
        reply = client.post("/sweep", body)
    finally:
        client.close()
    stem = _out_stem(args.out)
    _write_text(stem.with_suffix(".csv"), reply["csv"])
    print(f"sweep over {loaded.sweep.parameter}: {len(reply['rows'])} rows")
    if not reply["checks_passed"]:
        print("check failures occurred in at least one sweep cell", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("minmaxalloc.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minmaxalloc",
        description="Online min-max resource allocation: runs, comparisons, sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--config", required=True, help="path to a JSON config file")
        if with_out:
            p.add_argument("--out", required=True, help="output path stem")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument(
            "--checks", choices=("on", "off"), default=None, help="toggle runtime checks"
        )
        p.add_argument("--server", default=None, help="URL of a running service")
        p.add_argument(
            "--csv-timing",
            action="store_true",
            help="emit measured policy times in the CSV (breaks byte-identical reruns)",
        )

    p_run = sub.add_parser("run", help="execute one scenario")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run several policies on one seed")
    common(p_cmp)
    p_cmp.add_argument(
        "--policies", required=True, help="comma-separated policy names"
    )
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    common(p_sweep)
    p_sweep.add_argument("--jobs", type=int, default=1, help="concurrent sweep cells")
    p_sweep.set_defaults(func=cmd_sweep)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except httpx.HTTPError as exc:
        print(f"error: cannot reach the service: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
