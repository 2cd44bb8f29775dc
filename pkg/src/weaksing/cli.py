"""Command-line front end.

    weaksing check --lambda 1/2 --weight 35,-37
    weaksing solve --lambda 1/2 --weight weight.json --out run/ --cross-check
    weaksing trace --lambda 1/2 --weight 36,-36 --beta-target 1.05 --out run/

``--weight`` takes a JSON file, inline JSON, or a comma-separated list of
values on equal pieces of a unit period. ``--config`` reads a JSON run
config whose keys mirror the long flags (``lambda``, ``weight``,
``n_grid``, ``beta_target``, ``cross_check``, ``out``, ``json``, ``force``);
flags given on the command line win.

Exit codes: 0 success or a condition satisfied, 2 configuration error,
3 no existence condition satisfied, 4 solver failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bounds
from .continuation import TraceOptions, classify_termination, solve_equation2, trace_branch
from .errors import ConfigError, EmptyMinSet, NotSignChanging, WeakSingError
from .odeshoot import shoot
from .timemap import from_weight, reconstruct, solve_two_value
from .transform import residual_eq
from .weights import PiecewiseConstant, Weight, decompose, equal_pieces, load_weight

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONE = 3
EXIT_SOLVER = 4

CONFIG_KEYS = ("lambda", "weight", "n_grid", "beta_target", "cross_check", "out", "json", "force")


@dataclass
class RunConfig:
    command: str
    lam: Fraction
    weight: Weight
    n_grid: int = 256
    beta_target: float = math.inf
    cross_check: bool = False
    out: str | None = None
    as_json: bool = False
    force: bool = False


def _parse_lambda(x) -> Fraction:
    try:
        q = Fraction(str(x).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse lambda {x!r}") from exc
    if not 0 < q < 1:
        raise ConfigError("lambda must lie in (0, 1)")
    return q


def _parse_weight(spec) -> Weight:
    if isinstance(spec, dict):
        return load_weight(spec)
    text = str(spec).strip()
    if os.path.isfile(text) or text.startswith("{"):
        return load_weight(text)
    try:
        vals = [Fraction(v.strip()) for v in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse weight {spec!r}") from exc
    if not vals:
        raise ConfigError("empty weight")
    return equal_pieces(vals, 1)


def build_config(args) -> RunConfig:
    cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(cfg) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    pick = lambda name, key: getattr(args, name) if getattr(args, name) is not None else cfg.get(key)
    lam = pick("lam", "lambda")
    wspec = pick("weight", "weight")
    if lam is None or wspec is None:
        raise ConfigError("--lambda and --weight are required")
    rc = RunConfig(args.command, _parse_lambda(lam), _parse_weight(wspec))
    n = pick("n_grid", "n_grid")
    if n is not None:
        if isinstance(n, bool) or int(n) != n or n < 32:
            raise ConfigError("n_grid must be an integer >= 32")
        rc.n_grid = int(n)
    bt = pick("beta_target", "beta_target")
    if bt is not None:
        try:
            rc.beta_target = float(bt)
        except (TypeError, ValueError) as exc:
            raise ConfigError("beta_target must be a number") from exc
    rc.cross_check = bool(args.cross_check or cfg.get("cross_check", False))
    rc.force = bool(args.force or cfg.get("force", False))
    rc.as_json = bool(args.json or cfg.get("json", False))
    rc.out = pick("out", "out")
    return rc


def _emit(rc: RunConfig, payload: dict, table):
    if rc.as_json:
        print(json.dumps(payload, indent=2, default=_default))
    else:
        for row in table:
            print(row)


def _default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def _outdir(rc):
    if rc.out:
        os.makedirs(rc.out, exist_ok=True)
    return rc.out


# ----------------------------------------------------------------- check

def run_checks(lam, h: Weight):
    """All applicable existence checks; returns a list of report dicts."""
    reports = []
    if isinstance(h, PiecewiseConstant):
        hm = h.merged()
        if hm.exact is not None:
            P, B, V = hm.exact
        else:
            P = Fraction(hm.period)
            B = [Fraction(b) for b in hm.breakpoints]
            V = [Fraction(v) for v in hm.values]
        n = len(V)
        widths = [b1 - b0 for b0, b1 in zip(B, list(B[1:]) + [P])]
        if n == 2 and V[0] > 0 > V[1]:
            if 2 * B[1] == P:
                reports.append(bounds.check_cor1(lam, V[0], -V[1]).to_dict())
            reports.append(bounds.check_cor3(lam, V[0], -V[1], B[1], P).to_dict())
        if n >= 2 and all(w == widths[0] for w in widths):
            try:
                reports.append(bounds.check_cor2(lam, V).to_dict())
            except EmptyMinSet as exc:
                reports.append({"name": "cor2", "satisfied": False, "error": type(exc).__name__})
    est, name = bounds.beta_star_lower(lam, h)
    if est is not None:
        try:
            rep = bounds.check_strategy(h, est).to_dict()
            rep["details"]["estimate"] = name
            reports.append(rep)
        except NotSignChanging as exc:
            reports.append({"name": "strategy", "satisfied": False, "error": type(exc).__name__})
    return reports


def cmd_check(rc: RunConfig) -> int:
    reports = run_checks(rc.lam, rc.weight)
    ok = any(r.get("satisfied") for r in reports)
    payload = {"lambda": str(rc.lam), "reports": reports, "any_satisfied": ok}
    table = [f"{'check':<10} {'satisfied':<10} threshold"]
    for r in reports:
        table.append(f"{r['name']:<10} {str(r.get('satisfied')):<10} {r.get('exact', r.get('value', ''))}")
    if not reports:
        table.append("no applicable condition for this weight")
    _emit(rc, payload, table)
    out = _outdir(rc)
    if out:
        with open(os.path.join(out, "check.json"), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, default=_default)
    return EXIT_OK if ok else EXIT_NONE


# ----------------------------------------------------------------- solve

def _two_value(lam, h):
    if not isinstance(h, PiecewiseConstant):
        return None
    try:
        return from_weight(lam, h)
    except WeakSingError:
        return None


def cmd_solve(rc: RunConfig) -> int:
    lam = float(rc.lam)
    h = rc.weight
    if not rc.force:
        if not any(r.get("satisfied") for r in run_checks(rc.lam, h)):
            print("no existence condition satisfied (use --force to attempt anyway)", file=sys.stderr)
            return EXIT_NONE
    pr = _two_value(lam, h)
    if pr is not None:
        sol = reconstruct(solve_two_value(pr), grid_n=4096)
    else:
        mean, w = decompose(h)
        if not mean < 0:
            raise NotSignChanging("mean of the weight must be negative")
        sol = solve_equation2(lam, w, -mean, n=rc.n_grid)
    summary = {"solver": sol.diagnostics.get("solver"), "m_u": sol.m, "M_u": sol.M,
               "residual": residual_eq(sol, forcing=h),
               "periodicity_defect": list(sol.periodicity_defect())}
    if rc.cross_check:
        # cold-start shooting, independent of the primary solver's output
        alt = shoot(lam, h, grid_n=len(sol.t) - 1)
        summary["cross_check_solver"] = alt.diagnostics.get("solver")
        summary["cross_check_discrepancy"] = float(np.max(np.abs(np.interp(sol.t, alt.t, alt.u) - sol.u)))
    out = _outdir(rc)
    if out:
        sol.to_csv(os.path.join(out, "solution.csv"))
        with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, default=_default)
    _emit(rc, summary, [f"{k:<24} {v}" for k, v in summary.items()])
    return EXIT_OK


# ----------------------------------------------------------------- trace

def cmd_trace(rc: RunConfig) -> int:
    lam = float(rc.lam)
    _, w = decompose(rc.weight)
    br = trace_branch(lam, w, TraceOptions(n=rc.n_grid, beta_target=rc.beta_target))
    rep = classify_termination(br)
    est, name = bounds.beta_star_lower(rc.lam, rc.weight)
    rep["lower_bound"] = est
    rep["lower_bound_name"] = name
    out = _outdir(rc)
    if out:
        br.to_jsonl(os.path.join(out, "branch.jsonl"))
        br.to_csv(os.path.join(out, "branch.csv"))
        with open(os.path.join(out, "termination.json"), "w", encoding="utf-8") as fh:
            json.dump(rep, fh, indent=2, default=_default)
    _emit(rc, rep, [f"termination          {rep['termination']}",
                    f"beta* (empirical)    {rep['beta_star_empirical']}",
                    f"beta* lower bound    {est} ({name})",
                    f"points               {rep['points']}",
                    f"reading              {rep['reading']}"])
    return EXIT_OK


COMMANDS = {"check": cmd_check, "solve": cmd_solve, "trace": cmd_trace}


def make_parser():
    ap = argparse.ArgumentParser(prog="weaksing", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--lambda", dest="lam", default=None, help="exponent in (0, 1), e.g. 1/2")
        p.add_argument("--weight", default=None, help="JSON file, inline JSON or v1,v2,...")
        p.add_argument("--n-grid", dest="n_grid", type=int, default=None)
        p.add_argument("--beta-target", dest="beta_target", default=None)
        p.add_argument("--cross-check", action="store_true")
        p.add_argument("--out", default=None)
        p.add_argument("--json", action="store_true")
        p.add_argument("--force", action="store_true")
        p.add_argument("--config", default=None)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        rc = build_config(args)
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[rc.command](rc)
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WeakSingError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
