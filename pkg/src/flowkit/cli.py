"""Command line entry point.

Every subcommand is a thin shell over one library operation: read the
named files, call the operation, print its result.  Results go to
stdout, diagnostics and findings to stderr, so the model output of
``fmt``, ``derive``, and ``merge`` can be piped onward.

Exit codes: 0 success; 1 findings present and ``--fail-on-findings``
given; 2 usage error; 3 unreadable or unparseable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import uvicorn

from . import analysis, derive, dot, dsl, goals, merge, patterns, quanta
from .mapserver.app import create_app
from .mapserver.state import ServerState
from .model import FlowModel, Severity, validate

USAGE_ERROR = 2
INPUT_ERROR = 3


class _Failure(Exception):
    """Abort the command with a message and a fixed exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed its message; keep its code for --help
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.handler(args)
    except _Failure as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


# --- plumbing -------------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Failure(INPUT_ERROR, f"cannot read {path}: {exc}")


def _load_model(path: str) -> FlowModel:
    try:
        return dsl.parse(_read_text(path))
    except dsl.ParseFailure as exc:
        raise _Failure(INPUT_ERROR, f"{path}: {exc}")


def _records(args) -> bool:
    return args.format == "records"


def _verdict(args, findings: int) -> int:
    return 1 if args.fail_on_findings and findings else 0


def _count(n: int, noun: str) -> str:
    return f"{n} {noun}" if n == 1 else f"{n} {noun}s"


def _emit_record(data: dict, stream=None) -> None:
    print(json.dumps(data, sort_keys=True), file=stream or sys.stdout)


# --- subcommands ----------------------------------------------------------


def _cmd_validate(args) -> int:
    found = validate(_load_model(args.file))
    if _records(args):
        for v in found:
            _emit_record(
                {
                    "rule": v.rule,
                    "element": v.element_id,
                    "message": v.message,
                    "severity": v.severity.value,
                }
            )
    else:
        for v in found:
            print(v)
        print(_count(len(found), "violation"))
    return _verdict(args, len(found))


def _cmd_fmt(args) -> int:
    model = _load_model(args.file)
    try:
        print(dsl.serialize(model), end="")
    except ValueError as exc:
        raise _Failure(INPUT_ERROR, f"{args.file}: {exc}")
    return 0


def _cmd_dot(args) -> int:
    print(dot.export_dot(_load_model(args.file)), end="")
    return 0


def _cmd_derive(args) -> int:
    try:
        process = derive.parse_process(_read_text(args.file))
        result = derive.derive_document_flows(process)
        model = result.model
        if args.roles:
            model = derive.augment_role_flows(process, model)
    except ValueError as exc:
        raise _Failure(INPUT_ERROR, f"{args.file}: {exc}")
    print(dsl.serialize(model), end="")
    for finding in result.findings:
        if _records(args):
            _emit_record(
                {
                    "rule": finding.rule,
                    "activity": finding.activity,
                    "document": finding.document,
                    "message": finding.message,
                },
                stream=sys.stderr,
            )
        else:
            print(finding, file=sys.stderr)
    return _verdict(args, len(result.findings))


def _cmd_merge(args) -> int:
    parts = [_load_model(path) for path in args.files]
    try:
        merged, issues = merge.merge_models(parts)
    except merge.MergeError as exc:
        raise _Failure(INPUT_ERROR, str(exc))
    print(dsl.serialize(merged), end="")
    for issue in issues:
        if _records(args):
            _emit_record(
                {
                    "name": issue.name,
                    "stores": list(issue.store_ids),
                    "states": [s.value for s in issue.states],
                },
                stream=sys.stderr,
            )
        else:
            print(issue, file=sys.stderr)
    return _verdict(args, len(issues))


def _cmd_patterns(args) -> int:
    model = _load_model(args.file)
    catalog = None
    if args.template is not None:
        try:
            catalog = patterns.templates_from_json(_read_text(args.template))
        except ValueError as exc:
            raise _Failure(INPUT_ERROR, f"{args.template}: {exc}")
    matches = patterns.scan_catalog(model, catalog)
    for m in matches:
        if _records(args):
            _emit_record(
                {
                    "pattern": m.pattern,
                    "polarity": m.polarity.value,
                    "binding": dict(m.binding),
                    "chain": list(m.chain),
                }
            )
        else:
            bound = ", ".join(f"{k}={v}" for k, v in m.binding)
            tail = " -> ".join(m.chain)
            line = f"{m.pattern} [{m.polarity.value}]: {bound}"
            print(line + (f" chain {tail}" if m.chain else ""))
    if not _records(args):
        n = len(matches)
        print(f"{n} match" if n == 1 else f"{n} matches")
    return _verdict(args, len(matches))


def _cmd_cut(args) -> int:
    model = _load_model(args.file)
    try:
        result = derive.integration_cut(model, args.source, args.target)
    except ValueError as exc:
        raise _Failure(USAGE_ERROR, str(exc))
    if _records(args):
        _emit_record(
            {
                "intermediates": sorted(result.intermediates),
                "extra_targets": sorted(result.extra_targets),
                "no_path": result.no_path,
            }
        )
    else:
        print("intermediates:", " ".join(sorted(result.intermediates)) or "-")
        print("extra-targets:", " ".join(sorted(result.extra_targets)) or "-")
        if result.no_path:
            print("no path from the sources to the targets")
    return 0


def _cmd_simulate(args) -> int:
    model = _load_model(args.file)
    rule_errors = [v for v in validate(model) if v.severity is Severity.ERROR]
    if rule_errors:
        raise _Failure(
            INPUT_ERROR,
            f"{args.file}: " + "; ".join(str(v) for v in rule_errors),
        )
    if args.target is not None and args.trials is None:
        raise _Failure(USAGE_ERROR, "--target only applies together with --trials")
    try:
        cfg = quanta.QuantaConfig(
            n_quanta=args.n,
            draws_per_step=args.k,
            steps=args.steps,
            seed=args.seed,
            falsify_prob=args.falsify,
            omit_prob=args.omit,
            retention=args.retention,
        )
    except ValueError as exc:
        raise _Failure(USAGE_ERROR, str(exc))
    try:
        if args.trials is None:
            report = quanta.simulate(model, cfg, args.source)
            print(report.to_jsonl() if _records(args) else report.summary(), end="")
            return 0
        targets = [args.target] if args.target else sorted(model.node_ids())
        rows = [
            (t, quanta.run_trials(model, cfg, args.source, t, trials=args.trials))
            for t in targets
        ]
    except ValueError as exc:
        raise _Failure(USAGE_ERROR, str(exc))
    if _records(args):
        for node, stats in rows:
            _emit_record(
                {
                    "node": node,
                    "trials": stats.trials,
                    "mean": stats.mean,
                    "std_error": stats.std_error,
                }
            )
    else:
        width = max(len(node) for node, _ in rows)
        width = max(width, len("node"))
        print(f"{'node':<{width}}  {'mean':>10}  {'std-error':>10}")
        for node, stats in rows:
            print(f"{node:<{width}}  {stats.mean:>10.4f}  {stats.std_error:>10.4f}")
    return 0


def _cmd_diff(args) -> int:
    soll = _load_model(args.soll)
    ist = _load_model(args.ist)
    try:
        report = analysis.diff_maps(soll, ist, intensity_rel=args.tol)
    except ValueError as exc:
        raise _Failure(INPUT_ERROR, str(exc))
    for d in report.deviations:
        if _records(args):
            _emit_record(
                {
                    "kind": d.kind.value,
                    "subject": list(d.subject),
                    "planned": d.planned,
                    "actual": d.actual,
                }
            )
        else:
            print(d)
    if not _records(args):
        print(_count(len(report.deviations), "deviation"))
    return _verdict(args, len(report.deviations))


def _cmd_select(args) -> int:
    try:
        goal = goals.GoalSpec(
            goals.Intent(args.intent),
            goals.TimeAspect(args.time),
            goals.Scope(args.scope),
        )
        params = _params_from_pairs(args.param)
    except ValueError as exc:
        raise _Failure(USAGE_ERROR, str(exc))
    if args.catalog is not None:
        try:
            catalog = goals.catalog_from_json(_read_text(args.catalog))
        except ValueError as exc:
            raise _Failure(INPUT_ERROR, f"{args.catalog}: {exc}")
    else:
        catalog = goals.builtin_catalog()
    rows = goals.select_techniques(goal, params, catalog)
    complete = rows[0].complete if rows else False
    for row in rows:
        covered = sorted(p.value for p in row.coverage)
        if _records(args):
            _emit_record(
                {
                    "technique": row.technique.name,
                    "coverage": covered,
                    "complete": row.complete,
                }
            )
        else:
            print(f"{row.technique.name}: {', '.join(covered) or '-'}")
    if not _records(args):
        print(
            "all required phases covered"
            if complete
            else "required phases not fully covered"
        )
    return 0


def _params_from_pairs(pairs: Sequence[str]) -> goals.ProjectParams:
    kwargs: dict = {}
    misc: list[str] = []
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise _Failure(USAGE_ERROR, f"--param wants key=value, got {pair!r}")
        if key == "team_size":
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise _Failure(USAGE_ERROR, f"team_size must be an integer, got {value!r}")
        elif key in ("budget", "domain", "process_model"):
            kwargs[key] = value
        elif key == "process_style":
            kwargs[key] = goals.ProcessStyle(value)
        elif key == "distribution":
            kwargs[key] = goals.Distribution(value)
        elif key == "misc":
            misc.append(value)
        else:
            raise _Failure(USAGE_ERROR, f"unknown parameter {key!r}")
    if misc:
        kwargs["misc"] = tuple(misc)
    return goals.ProjectParams(**kwargs)


def _cmd_serve(args) -> int:
    try:
        state = ServerState(
            args.data_dir,
            live_window_minutes=args.live_window,
            grace_minutes=args.grace,
        )
    except (OSError, ValueError) as exc:
        raise _Failure(INPUT_ERROR, f"cannot open {args.data_dir}: {exc}")
    app = create_app(state, token=args.token)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# --- parser ----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowkit", description="Model, analyze, and map information flows."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        choices=("human", "records"),
        default="human",
        help="output style: human text or line-delimited JSON records",
    )
    common.add_argument(
        "--fail-on-findings",
        action="store_true",
        help="exit 1 when violations, findings, matches, or deviations exist",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text, parents=(common,)):
        p = sub.add_parser(name, help=help_text, parents=list(parents))
        p.set_defaults(handler=handler)
        return p

    p = command("validate", _cmd_validate, "check a model against the notation rules")
    p.add_argument("file")

    p = command("fmt", _cmd_fmt, "rewrite a model in canonical form")
    p.add_argument("file")

    p = command("dot", _cmd_dot, "export a model as Graphviz DOT text")
    p.add_argument("file")

    p = command("derive", _cmd_derive, "derive document flows from a process description")
    p.add_argument("file")
    p.add_argument("--roles", action="store_true", help="add role stores and spoken flows")

    p = command("merge", _cmd_merge, "unify several partial models")
    p.add_argument("files", nargs="+")

    p = command("patterns", _cmd_patterns, "scan a model for catalog patterns")
    p.add_argument("file")
    p.add_argument("--template", help="JSON template catalog instead of the built-in one")

    p = command("cut", _cmd_cut, "products to integrate between parts of a model")
    p.add_argument("file")
    p.add_argument("--source", nargs="+", required=True, help="source store ids")
    p.add_argument("--target", nargs="+", required=True, help="target store ids")

    p = command("simulate", _cmd_simulate, "propagate software quanta through a model")
    p.add_argument("file")
    p.add_argument("--source", required=True, help="store the quanta start from")
    p.add_argument("--n", type=int, required=True, help="number of quanta at the source")
    p.add_argument("--k", type=int, required=True, help="draws per flow and step")
    p.add_argument("--steps", type=int, required=True, help="synchronous steps to run")
    p.add_argument("--seed", type=int, required=True, help="PRNG seed (reproducibility)")
    p.add_argument("--falsify", type=float, default=0.0, help="per-draw falsification probability")
    p.add_argument("--omit", type=float, default=0.0, help="per-draw omission probability")
    p.add_argument("--retention", type=float, default=1.0, help="per-step keep probability of liquid stores")
    p.add_argument("--trials", type=int, help="aggregate over this many trials instead of one run")
    p.add_argument("--target", help="report trial statistics for this node only")

    p = command("diff", _cmd_diff, "deviations of an observed map from a planned one")
    p.add_argument("soll")
    p.add_argument("ist")
    p.add_argument("--tol", type=float, default=0.0, help="relative intensity tolerance")

    p = command("select", _cmd_select, "techniques fitting a goal and project context")
    p.add_argument("--intent", choices=[i.value for i in goals.Intent], required=True)
    p.add_argument("--time", choices=[t.value for t in goals.TimeAspect], required=True)
    p.add_argument("--scope", choices=[s.value for s in goals.Scope], required=True)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--catalog", help="JSON technique catalog instead of the built-in one")

    p = command("serve", _cmd_serve, "run the map service", parents=())
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", required=True, help="directory holding the event log")
    p.add_argument("--token", help="bearer token required on all routes but /health")
    p.add_argument("--live-window", type=float, default=60.0, help="live view span in minutes")
    p.add_argument("--grace", type=float, default=15.0, help="conformance grace in minutes")

    return parser


if __name__ == "__main__":
    raise SystemExit(main())
