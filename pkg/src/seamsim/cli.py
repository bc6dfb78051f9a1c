"""Command-line interface.

Commands:
  validate  - parse and validate a model (optionally merged with a delta)
  analyze   - run the full pipeline over a trace file and write the report
  generate  - produce a synthetic trace corpus from a generator config
  serve     - local HTTP mode backing the companion workbench UI

Exit codes: 0 success, 1 input/validation error, 2 significant duration
regressions found (only with --fail-on-significant).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dsl
from .analyze import ComparisonReport
from .gen import GenConfig, generate
from .model import DeploymentModel, MergeError, ScenarioDelta, apply_delta, microservice_groups
from .pipeline import analyze_stream
from .traces import write_trace_file

DEFAULT_ALPHA = 0.05
DEFAULT_PORT = 8645


class CliError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_model(path: str) -> DeploymentModel:
    result = dsl.parse_model(_read_text(path))
    _print_diagnostics(path, result.diagnostics)
    if not result.ok:
        raise CliError(f"{path}: model is invalid")
    return result.value


def load_delta(path: str) -> ScenarioDelta:
    result = dsl.parse_delta(_read_text(path))
    _print_diagnostics(path, result.diagnostics)
    if not result.ok:
        raise CliError(f"{path}: scenario is invalid")
    return result.value


def load_models(model_path: str, delta_path: str | None) -> tuple[DeploymentModel, DeploymentModel | None]:
    base = load_model(model_path)
    if delta_path is None:
        return base, None
    delta = load_delta(delta_path)
    try:
        return base, apply_delta(base, delta)
    except MergeError as exc:
        raise CliError(f"{delta_path}: {exc}") from None


def _print_diagnostics(path: str, diagnostics) -> None:
    for d in diagnostics:
        print(f"{path}:{d}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(args) -> int:
    base, scenario = load_models(args.model, args.delta)
    if scenario is not None:
        print(f"merged scenario model: {len(scenario.components)} components, "
              f"{len(scenario.connections)} connections, {len(scenario.data_stores)} data stores")
        for members, flag in microservice_groups(scenario):
            tag = "potential microservice" if flag else "not a potential microservice"
            print(f"  group {{{', '.join(sorted(members))}}}: {tag}")
    else:
        print(f"model ok: {len(base.components)} components, "
              f"{len(base.connections)} connections, {len(base.data_stores)} data stores")
    return 0


def format_summary(report: ComparisonReport) -> str:
    obj = report.to_obj()
    lines = []
    lines.append(f"{'use case':32} {'n':>6} {'mean':>12} {'mean*':>12} {'delta':>10} {'p':>10}  sig")
    for uc in obj["use_cases"]:
        welch = uc["welch"]
        if welch is None:
            p = "-"
            delta = uc["rewritten"]["mean"] - uc["original"]["mean"]
        else:
            p = "<1e-12" if 0 < welch["p_value"] < 1e-12 else (f"{welch['p_value']:.4g}" if welch["p_value"] is not None else "-")
            delta = welch["mean_delta"]
        lines.append(
            f"{uc['name'][:32]:32} {uc['trace_count']:>6} {uc['original']['mean']:>12.1f} "
            f"{uc['rewritten']['mean']:>12.1f} {delta:>+10.1f} {p:>10}  {'*' if uc['significant'] else ''}"
        )
    s = obj["summary"]
    lines.append("")
    lines.append(
        f"traces: {s['traces']}  new issues: {s['new_issues']}  vanished issues: {s['vanished_issues']}  "
        f"outcome changes: {s['outcome_changes']}  significant use cases: {s['significant_use_cases']}"
    )
    for group in obj["microservice_groups"]:
        tag = "potential microservice" if group["potential_microservice"] else "not a potential microservice"
        lines.append(f"group {{{', '.join(group['components'])}}}: {tag}")
    return "\n".join(lines)


def report_bytes(report: ComparisonReport) -> bytes:
    return (json.dumps(report.to_obj(), separators=(",", ":")) + "\n").encode("utf-8")


def cmd_analyze(args) -> int:
    base, scenario = load_models(args.model, args.delta)
    try:
        with open(args.traces, "rb") as f:
            report = analyze_stream(f, base, scenario, alpha=args.alpha, workers=args.workers)
    except OSError as exc:
        raise CliError(f"cannot read {args.traces}: {exc.strerror or exc}") from None

    payload = report_bytes(report)
    if args.out:
        Path(args.out).write_bytes(payload)
        print(f"report written to {args.out}", file=sys.stderr)
    if args.format == "text" or args.out:
        print(format_summary(report))
    else:
        sys.stdout.buffer.write(payload)

    if args.fail_on_significant and report.significant_use_cases:
        return 2
    return 0


def cmd_generate(args) -> int:
    base = load_model(args.model)
    try:
        config = GenConfig.from_obj(json.loads(_read_text(args.config)))
    except (ValueError, KeyError) as exc:
        raise CliError(f"{args.config}: invalid generator config: {exc}") from None
    traces = generate(config, base)
    write_trace_file(traces, args.out)
    print(f"wrote {len(traces)} traces to {args.out}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    from .server import WorkbenchServer

    base, scenario = load_models(args.model, args.delta)
    server = WorkbenchServer(
        base_model=base,
        traces_path=args.traces,
        alpha=args.alpha,
        workers=args.workers,
        ui_dir=args.ui_dir,
        initial_scenario=scenario,
    )
    server.serve_forever(host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seamsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_args(p, delta=True):
        p.add_argument("--model", required=True, help="deployment model file (.dm)")
        if delta:
            p.add_argument("--delta", help="scenario delta file (.dms)")

    p = sub.add_parser("validate", help="validate a model (and optional scenario)")
    add_model_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="rewrite + analyze a trace corpus")
    add_model_args(p)
    p.add_argument("--traces", required=True, help="trace corpus (.traces.ndjson)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="significance level (default 0.05)")
    p.add_argument("--workers", type=int, default=1, help="worker processes; 0 = all cores")
    p.add_argument("--out", help="write the report JSON here")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--fail-on-significant", action="store_true",
                   help="exit 2 when any use case changes significantly")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="generate a synthetic trace corpus")
    p.add_argument("--config", required=True, help="generator config JSON")
    p.add_argument("--model", required=True, help="deployment model file (.dm)")
    p.add_argument("--out", required=True, help="output trace file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="serve the workbench API (and UI, if built)")
    add_model_args(p)
    p.add_argument("--traces", required=True)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", help="directory with the built UI (defaults to the bundled frontend build)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    from .simtypes import SimulationError
    from .traces import FormatError, TraceValidationError

    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, FormatError, TraceValidationError, SimulationError, MergeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
