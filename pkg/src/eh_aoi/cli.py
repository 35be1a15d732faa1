"""Command-line front end: ``eh-aoi analytic|simulate|optimize|sweep``.

Data goes to stdout or ``--out``; diagnostics go to stderr. Every file
written gets a ``<file>.manifest.json`` sidecar.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analytic import evaluate, rc_gap_warning, rc_st_zero_saving_value
from .core import (
    DEFAULT_TAIL_TOL,
    BatteryMode,
    ParameterError,
    Policy,
    PolicyConfig,
    SystemParams,
    parse_policies,
)
from .oracle import renewal_oracle_mds_st, renewal_oracle_rc_st
from .search import mds_st_monotonicity_violations, optimize, sweep
from .sim import simulate_policy
from .stats import ratio_estimate, z_score

OUTPUT_DIR_ENV = "EH_AOI_OUTPUT_DIR"
CSV_COLUMNS = ["p", "delta", "k", "policy", "free_param", "aoi", "mean_q", "mean_t"]

log = logging.getLogger("eh_aoi")


def fmt(x) -> str:
    """12 significant digits, no thousands separators."""
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{x:.12g}"


def num(x):
    if x is None or isinstance(x, (int, str)):
        return x
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def manifest(command: str, args: argparse.Namespace, seed: Optional[int] = None) -> dict:
    skip = {"func", "command"}
    params = {k: (v.value if hasattr(v, "value") else v) for k, v in vars(args).items() if k not in skip}
    return {
        "command": command,
        "parameters": params,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _emit_json(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        _write_file(Path(out), text)
    else:
        sys.stdout.write(text)


def _write_file(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _params(args) -> SystemParams:
    return SystemParams(p=args.p, delta=args.delta, k=args.k)


def _cfg(args) -> PolicyConfig:
    pol = Policy(args.policy)
    n = args.n if pol in (Policy.MDS_ST, Policy.MDS_BE) else None
    m = args.m if pol is Policy.RC_ST else None
    if pol in (Policy.MDS_ST, Policy.MDS_BE) and n is None:
        raise ParameterError(f"{pol} needs --n")
    if pol is Policy.RC_ST and m is None:
        raise ParameterError("RC_ST needs --m")
    return PolicyConfig(policy=pol, n=n, m=m, battery_mode=BatteryMode(args.battery_mode))


def _gap_warnings(params: SystemParams, cfg: PolicyConfig) -> list[str]:
    if cfg.policy is Policy.RC_BE or (cfg.policy is Policy.RC_ST and cfg.m == 0):
        return [rc_gap_warning(params)]
    return []


def _param_doc(params: SystemParams, cfg: Optional[PolicyConfig], tail_tol: float) -> dict:
    doc = {"p": num(params.p), "delta": num(params.delta), "k": params.k, "q": num(params.q),
           "tail_tol": tail_tol}
    if cfg is not None:
        doc["n"] = cfg.n
        doc["m"] = cfg.m
    return doc


def cmd_analytic(args) -> int:
    params = _params(args)
    cfg = _cfg(args)
    if cfg.policy is Policy.RC_ST and params.p >= 1.0:
        raise ParameterError("RC_ST is undefined at p=1: use RC_BE for p=1")
    br = evaluate(params, cfg, args.tail_tol)
    doc = {
        "policy": cfg.policy.value,
        "params": _param_doc(params, cfg, args.tail_tol),
        "aoi": num(br.aoi),
        "mean_q": num(br.mean_q),
        "mean_t": num(br.mean_t),
        "warnings": _gap_warnings(params, cfg),
        "manifest": manifest("analytic", args),
    }
    _emit_json(doc, args.out)
    return 0


def _write_cycle_dump(path: str, q, t) -> None:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q_i", "t_i"])
    for qi, ti in zip(q, t):
        w.writerow([fmt(float(qi)), fmt(int(ti))])
    _write_file(Path(path), buf.getvalue())


def cmd_simulate(args) -> int:
    params = _params(args)
    cfg = _cfg(args)
    cfg.check(params)
    warnings = []
    if cfg.policy is Policy.RC_ST and params.p >= 1.0:
        raise ParameterError("RC_ST is undefined at p=1: use RC_BE for p=1")
    reference = evaluate(params, cfg, args.tail_tol).aoi

    if args.oracle:
        if args.renewals is None:
            raise ParameterError("--oracle needs --renewals")
        if cfg.policy is Policy.MDS_ST:
            res = renewal_oracle_mds_st(params, cfg.n, args.renewals, args.seed)
        elif cfg.policy is Policy.RC_ST:
            res = renewal_oracle_rc_st(params, cfg.m, args.renewals, args.seed)
        else:
            raise ParameterError("renewal oracles exist for MDS_ST and RC_ST only")
        body = {
            "mode": "renewal_oracle",
            "renewals": res.renewals,
            "aoi": num(res.aoi),
            "aoi_se": num(res.aoi_se),
            "mean_q": num(res.mean_q),
            "mean_t": num(res.mean_t),
            "mean_t_se": num(res.mean_t_se),
            "analytic_aoi": num(reference),
            "z_score": num(z_score(res.aoi, res.aoi_se, reference)),
        }
    else:
        if args.horizon is None:
            raise ParameterError("slot simulation needs --horizon (or use --oracle --renewals)")
        stats = simulate_policy(params, cfg, args.horizon, args.seed)
        # drop the first cycle, which carries the start-up transient
        est = ratio_estimate(stats.q_samples[1:], stats.t_samples[1:], batch=args.batch)
        if cfg.policy is Policy.RC_BE:
            reference = rc_st_zero_saving_value(params)
            warnings.append("RC_BE slot simulation is compared with (3k+1-q)/(2q), the continuous-age "
                            "value; " + rc_gap_warning(params))
        if cfg.battery_mode is BatteryMode.PHYSICAL and cfg.policy in (Policy.MDS_ST, Policy.RC_ST):
            warnings.append("physical battery mode: the analytic value is an upper bound, not a target")
        body = {
            "mode": "slot_simulation",
            "battery_mode": cfg.battery_mode.value,
            "horizon": args.horizon,
            "deliveries": stats.deliveries,
            "aoi": num(stats.empirical_aoi),
            "aoi_se": num(est.se),
            "analytic_aoi": num(reference),
            "z_score": num(z_score(stats.empirical_aoi, est.se, reference)),
        }
        if args.dump:
            _write_cycle_dump(args.dump, stats.q_samples, stats.t_samples)
    doc = {
        "policy": cfg.policy.value,
        "params": _param_doc(params, cfg, args.tail_tol),
        **body,
        "warnings": warnings,
        "manifest": manifest("simulate", args, seed=args.seed),
    }
    _emit_json(doc, args.out)
    return 0


def cmd_optimize(args) -> int:
    params = _params(args)
    row = optimize(params, Policy(args.policy), args.bound, args.tail_tol)
    warnings = []
    if row.at_boundary:
        warnings.append(f"optimum {row.free_param} sits on the search bound; raise --bound")
    doc = {
        "policy": row.policy.value,
        "params": _param_doc(params, None, args.tail_tol),
        "free_param": row.free_param,
        "aoi": num(row.aoi),
        "mean_q": num(row.mean_q),
        "mean_t": num(row.mean_t),
        "at_boundary": row.at_boundary,
        "warnings": warnings,
        "manifest": manifest("optimize", args),
    }
    _emit_json(doc, args.out)
    return 0


def parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def parse_int_range(text: str) -> list[int]:
    """'100', '10,20,50', '10..200' (step 10) or '10..200:5'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, rest = part.split("..", 1)
            hi, _, step = rest.partition(":")
            out.extend(range(int(lo), int(hi) + 1, int(step) if step else 10))
        else:
            out.append(int(part))
    return out


def rows_to_csv(rows) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([fmt(r.params.p), fmt(r.params.delta), fmt(r.params.k), r.policy.value,
                    fmt(r.free_param), fmt(r.aoi), fmt(r.mean_q), fmt(r.mean_t)])
    return buf.getvalue()


def rows_to_json(rows) -> list[dict]:
    return [
        {"p": num(r.params.p), "delta": num(r.params.delta), "k": r.params.k, "policy": r.policy.value,
         "free_param": r.free_param, "aoi": num(r.aoi), "mean_q": num(r.mean_q),
         "mean_t": num(r.mean_t), "at_boundary": r.at_boundary}
        for r in rows
    ]


def _sweep_grid(args):
    cfg = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)

    def pick(key, flag, parse):
        if flag is not None:
            return parse(flag)
        if key in cfg:
            v = cfg[key]
            return parse(v) if isinstance(v, str) else list(v) if isinstance(v, list) else [v]
        return None

    p = pick("p", args.p_list, parse_float_list)
    delta = pick("delta", args.delta_list, parse_float_list)
    k = pick("k", args.k_range, parse_int_range)
    pols = pick("policies", args.policies, lambda s: s.split(","))
    if pols is None:
        pols = [x.value for x in Policy]
    return p or [], delta or [], k or [], parse_policies(pols)


def cmd_sweep(args) -> int:
    p, delta, k, pols = _sweep_grid(args)
    notes: list[str] = []
    rows = sweep(p, delta, k, pols, tail_tol=args.tail_tol, workers=args.workers, notes=notes)
    notes.extend(mds_st_monotonicity_violations(rows))
    for note in notes:
        log.warning(note)

    out = args.out
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = str(Path(os.environ[OUTPUT_DIR_ENV]) / f"sweep.{args.format}")
    if args.format == "csv":
        text = rows_to_csv(rows)
    else:
        text = json.dumps(rows_to_json(rows), indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
        return 0
    path = Path(out)
    man = manifest("sweep", args)
    man["resolved_grid"] = {"p": p, "delta": delta, "k": k, "policies": [x.value for x in pols]}
    man["notes"] = notes
    _write_file(path, text)
    _write_file(path.with_name(path.name + ".manifest.json"), json.dumps(man, indent=2, sort_keys=True) + "\n")
    print(str(path), file=sys.stderr)
    return 0


def _common(sp: argparse.ArgumentParser, policy_required=True) -> None:
    sp.add_argument("--policy", required=policy_required, type=str.upper, choices=[x.value for x in Policy])
    sp.add_argument("--p", type=float, required=True, help="energy arrival probability per slot")
    sp.add_argument("--delta", type=float, required=True, help="symbol erasure probability")
    sp.add_argument("--k", type=int, required=True, help="symbols per status update")
    sp.add_argument("--tail-tol", type=float, default=DEFAULT_TAIL_TOL)
    sp.add_argument("--out", default=None, help="write the JSON document here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eh-aoi", description="Average AoI of coded status updates "
                                     "from an energy harvesting transmitter over an erasure channel.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analytic", help="closed-form AoI for one policy")
    _common(sp)
    sp.add_argument("--n", type=int, help="MDS blocklength")
    sp.add_argument("--m", type=int, help="RC_ST saving duration")
    sp.add_argument("--battery-mode", default="analysis_faithful", choices=[x.value for x in BatteryMode])
    sp.set_defaults(func=cmd_analytic)

    sp = sub.add_parser("simulate", help="slot-level simulation or renewal oracle")
    _common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--horizon", type=int, help="slots to simulate")
    sp.add_argument("--renewals", type=int, help="cycles for --oracle")
    sp.add_argument("--oracle", action="store_true", help="sample renewal cycles instead of slots")
    sp.add_argument("--battery-mode", default="analysis_faithful", choices=[x.value for x in BatteryMode])
    sp.add_argument("--batch", type=int, default=100, help="cycles per batch for the standard error")
    sp.add_argument("--dump", default=None, help="CSV file of per-cycle (q_i, t_i)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("optimize", help="optimize n (MDS) or m (RC_ST)")
    _common(sp)
    sp.add_argument("--bound", type=int, default=None, help="n_max or m_max (default per policy)")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("sweep", help="optimize every policy over a parameter grid")
    sp.add_argument("--config", default=None, help="JSON file with p, delta, k, policies")
    sp.add_argument("--p", dest="p_list", default=None, help="comma list, e.g. 1,0.7,0.4,0.2")
    sp.add_argument("--delta", dest="delta_list", default=None, help="comma list")
    sp.add_argument("--k", dest="k_range", default=None, help="e.g. 100 or 10..200 or 10..200:5")
    sp.add_argument("--policy", "--policies", dest="policies", default=None,
                    help="comma list of policies (default: all four)")
    sp.add_argument("--tail-tol", type=float, default=DEFAULT_TAIL_TOL)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", default="csv", choices=["csv", "json"])
    sp.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
