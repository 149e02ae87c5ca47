"""Command-line front end.

Thin client over the HTTP layer: every command builds a request, sends
it to the in-process app, and renders the response.  Exit codes: 0 all
non-skipped checks pass, 1 at least one identity check failed, 2 for
usage, parse, or evaluation errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import verify


def _client():
    # imported lazily so `rcgeo scenarios list` stays snappy
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app, raise_server_exceptions=False)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _detail_message(resp) -> str:
    try:
        detail = resp.json().get("detail")
    except ValueError:
        return resp.text.strip() or f"HTTP {resp.status_code}"
    if isinstance(detail, dict):
        msg = detail.get("message", str(detail))
        if "position" in detail:
            return f"{msg} [position {detail['position']}]"
        if "line" in detail:
            return f"{msg} [line {detail['line']}]"
        return msg
    return str(detail)


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--param expects k=v, got {pair!r}")
        key, _, val = pair.partition("=")
        params[key.strip()] = val.strip()
    return params


def _parse_at(text: str) -> dict:
    at = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"--at expects k=v pairs, got {part!r}")
        key, _, val = part.partition("=")
        try:
            at[key.strip()] = float(val)
        except ValueError:
            raise ValueError(f"--at value for {key.strip()!r} is not a number: {val!r}")
    if not at:
        raise ValueError("--at is empty")
    return at


def _scene_body(args) -> dict:
    if getattr(args, "scene", None):
        try:
            with open(args.scene, "r", encoding="utf-8") as fh:
                return {"scene_text": fh.read()}
        except OSError as exc:
            raise ValueError(f"cannot read scene file: {exc}")
    if getattr(args, "scenario", None):
        return {"scenario": args.scenario, "params": _parse_params(args.param)}
    raise ValueError("provide --scene PATH or --scenario NAME")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _fmt_nested(value) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(_fmt_nested(v) for v in value) + "]"
    return _fmt(float(value))


def _render_eval_text(body: dict) -> str:
    lines = []
    at = body["at"]
    lines.append(
        "point: " + ", ".join(f"{k} = {_fmt(v)}" for k, v in at.items())
    )
    for name, value in body["quantities"].items():
        if isinstance(value, list) and len(value) == 1 and not isinstance(value[0], list):
            lines.append(f"{name} = {_fmt(float(value[0]))}")
        else:
            lines.append(f"{name} = {_fmt_nested(value)}")
    return "\n".join(lines)


def _render_report_table(report: dict) -> str:
    name_w = max([len(r["name"]) for r in report["checks"]] + [5])
    head = f"{'check':<{name_w}}  {'status':<8}  {'points':>6}  {'max residual':>13}  {'mean residual':>13}  {'tol':>9}"
    lines = [head, "-" * len(head)]
    counts = {"pass": 0, "fail": 0, "skipped": 0, "vacuous": 0}
    for row in report["checks"]:
        counts[row["status"]] = counts.get(row["status"], 0) + 1
        mx = row["max_residual"]
        mean = row["mean_residual"]
        lines.append(
            f"{row['name']:<{name_w}}  {row['status']:<8}  {row['points']:>6}  "
            f"{'-' if mx is None else format(mx, '.3e'):>13}  "
            f"{'-' if mean is None else format(mean, '.3e'):>13}  "
            f"{row['tol']:>9.1e}"
        )
    lines.append("-" * len(head))
    lines.append(
        f"{counts['pass']} passed, {counts['vacuous']} vacuous, "
        f"{counts['skipped']} skipped, {counts['fail']} failed "
        f"(scene {report['scene']}, order {report['jet_order']})"
    )
    if report.get("eval_errors"):
        lines.append(f"evaluation errors: {len(report['eval_errors'])}")
        for err in report["eval_errors"]:
            lines.append(f"  {err}")
    return "\n".join(lines)


def _run_verify(args, body: dict) -> int:
    if args.grid is not None and args.points is not None:
        return _fail("provide at most one of --grid and --points")
    if args.grid is not None:
        if args.grid < 1:
            return _fail(f"--grid must be at least 1, got {args.grid}")
        body["grid"] = args.grid
    if args.points is not None:
        try:
            with open(args.points, "r", encoding="utf-8") as fh:
                body["points"] = json.load(fh)
        except (OSError, ValueError) as exc:
            return _fail(f"cannot read points file: {exc}")
    if args.tol is not None:
        if not args.tol > 0:
            return _fail(f"--tol must be positive, got {args.tol}")
        body["tol"] = args.tol
    if args.checks and args.checks != "all":
        body["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    if args.seed is not None:
        body["seed"] = args.seed
    if getattr(args, "perturb_ii", None) is not None:
        body["perturb_ii"] = args.perturb_ii
    body["order"] = args.order

    resp = _client().post("/verify", json=body)
    if resp.status_code != 200:
        return _fail(_detail_message(resp))
    report = resp.json()
    text = verify.report_to_json(report)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            return _fail(f"cannot write report: {exc}")
    print(_render_report_table(report))
    return 1 if verify.suite_failed(report) else 0


def _cmd_eval(args) -> int:
    try:
        body = _scene_body(args)
        body["at"] = _parse_at(args.at)
    except ValueError as exc:
        return _fail(str(exc))
    body["order"] = args.order
    if args.quantities:
        body["quantities"] = [q.strip() for q in args.quantities.split(",") if q.strip()]
    resp = _client().post("/eval", json=body)
    if resp.status_code != 200:
        return _fail(_detail_message(resp))
    body = resp.json()
    if args.format == "json":
        print(json.dumps(body["quantities"], indent=2))
    else:
        print(_render_eval_text(body))
    return 0


def _cmd_verify(args) -> int:
    try:
        body = _scene_body(args)
    except ValueError as exc:
        return _fail(str(exc))
    return _run_verify(args, body)


def _cmd_scenarios(args) -> int:
    if args.action == "list":
        resp = _client().get("/scenarios")
        if resp.status_code != 200:
            return _fail(_detail_message(resp))
        for entry in resp.json()["scenarios"]:
            print(f"{entry['name']:<16} {entry['summary']}")
            if entry["defaults"]:
                defaults = ", ".join(f"{k}={v}" for k, v in entry["defaults"].items())
                print(f"{'':<16} defaults: {defaults}")
        return 0
    if not args.name:
        return _fail("scenarios run needs a scenario name")
    try:
        body = {"scenario": args.name, "params": _parse_params(args.param)}
    except ValueError as exc:
        return _fail(str(exc))
    return _run_verify(args, body)


def _add_scene_args(p):
    p.add_argument("--scene", help="path to a scene file")
    p.add_argument("--scenario", help="name of a built-in scenario")
    p.add_argument(
        "--param", action="append", default=[], help="scenario parameter k=v"
    )


def _add_verify_args(p):
    p.add_argument("--grid", type=int, default=None, help="samples per domain axis")
    p.add_argument("--points", default=None, help="JSON file with parameter points")
    p.add_argument("--order", type=int, default=verify.DEFAULT_JET_ORDER)
    p.add_argument("--tol", type=float, default=None, help="override every check tolerance")
    p.add_argument("--checks", default="all", help="'all' or comma-separated check names")
    p.add_argument("--seed", type=int, default=None, help="seed for grid jitter")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.add_argument(
        "--perturb-ii",
        dest="perturb_ii",
        type=float,
        default=None,
        help="negative control: offset added to one component of II",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcgeo",
        description="frame geometry engine: evaluate hypersurface data and verify identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate quantities at one parameter point")
    _add_scene_args(p_eval)
    p_eval.add_argument("--at", required=True, help="parameter point, e.g. u=0.3,v=-0.2")
    p_eval.add_argument("--order", type=int, default=verify.DEFAULT_JET_ORDER)
    p_eval.add_argument("--quantities", default=None, help="comma-separated quantity names")
    p_eval.add_argument("--format", choices=("text", "json"), default="text")
    p_eval.set_defaults(fn=_cmd_eval)

    p_verify = sub.add_parser("verify", help="run the identity suite")
    _add_scene_args(p_verify)
    _add_verify_args(p_verify)
    p_verify.set_defaults(fn=_cmd_verify)

    p_scen = sub.add_parser("scenarios", help="list or run built-in scenarios")
    p_scen.add_argument("action", choices=("list", "run"))
    p_scen.add_argument("name", nargs="?", default=None)
    p_scen.add_argument(
        "--param", action="append", default=[], help="scenario parameter k=v"
    )
    _add_verify_args(p_scen)
    p_scen.set_defaults(fn=_cmd_scenarios)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not (2 <= args.order <= 4):
        return _fail(f"--order must be in [2, 4], got {args.order}")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
