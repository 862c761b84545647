"""Command-line interface: analyze, scan and simulate.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .catalog import CATALOG, Scenario, build
from .dist import DistributionError, ck_lower_bound, conditional_mutual_information, mutual_information
from .files import load_scenario
from .intrinsic import intrinsic_upper_bound, verify_zero_certificate
from .keyproto import repeat_code_analytic, repeat_code_simulate
from .mu import mu_estimate
from .qstate import StateError, is_pure, ppt_min_eigenvalue

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4

CSV_COLUMNS = (
    "scenario",
    "params",
    "eve_frame",
    "I_XY",
    "I_XY_given_Z",
    "ck_lower_bound",
    "intrinsic_upper_bound",
    "intrinsic_nzbar",
    "certificate_residual",
    "certificate_valid",
    "ppt_min_eigenvalue",
    "rho_is_pure",
    "mu_estimate",
    "seed",
)

PARAM_FLAGS = {"D": "D", "a": "a", "alpha": "alpha", "lambda": "lam", "deltaX": "deltaX", "deltaY": "deltaY"}


class NumericFailure(RuntimeError):
    pass


@dataclass
class ReportRecord:
    scenario: str
    params: dict
    eve_frame: str
    I_XY: float
    I_XY_given_Z: float
    ck_lower_bound: float
    intrinsic_upper_bound: float
    intrinsic_nzbar: int
    intrinsic_channel: list
    seed: int
    certificate_residual: float | None = None
    certificate_valid: bool | None = None
    ppt_min_eigenvalue: float | None = None
    rho_is_pure: bool | None = None
    mu_estimate: float | None = None
    elapsed_s: float = 0.0

    def check_finite(self) -> None:
        for k, v in asdict(self).items():
            if isinstance(v, float) and not math.isfinite(v):
                raise NumericFailure(f"report field {k} is not finite ({v})")


def fmt(v) -> str:
    """12 significant digits, locale independent; empty for absent fields."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, dict):
        return ";".join(f"{k}={fmt(float(x))}" for k, x in v.items())
    return str(v)


def analyze(
    scenario: Scenario,
    eve_frame: str = "standard",
    restarts: int = 16,
    seed: int = 0,
    nzbar: int | None = None,
    with_mu: bool = False,
) -> ReportRecord:
    t0 = time.perf_counter()
    P = scenario.measured(eve_frame)
    starts = [scenario.certificate] if (scenario.certificate is not None and eve_frame == "standard") else []
    est = intrinsic_upper_bound(P, nzbar, restarts=restarts, seed=seed, starts=starts)
    rec = ReportRecord(
        scenario=scenario.name,
        params=dict(scenario.params),
        eve_frame=eve_frame,
        I_XY=mutual_information(P.array.sum(axis=2)),
        I_XY_given_Z=conditional_mutual_information(P),
        ck_lower_bound=ck_lower_bound(P),
        intrinsic_upper_bound=est.value,
        intrinsic_nzbar=est.best_channel.n_out,
        intrinsic_channel=est.best_channel.matrix.tolist(),
        seed=seed,
    )
    if scenario.certificate is not None and eve_frame == "standard":
        rec.certificate_residual = verify_zero_certificate(P, scenario.certificate).residual
        rec.certificate_valid = scenario.certificate_valid
    if scenario.state is not None:
        rho = scenario.rho
        rec.ppt_min_eigenvalue = ppt_min_eigenvalue(rho)
        rec.rho_is_pure = is_pure(rho)
        if with_mu:
            rec.mu_estimate = mu_estimate(rho, seed=seed).value
    rec.elapsed_s = time.perf_counter() - t0
    rec.check_finite()
    return rec


def render_table(rec: ReportRecord) -> str:
    rows = [(k, fmt(v)) for k, v in asdict(rec).items() if v is not None and k != "intrinsic_channel"]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"


def render_csv(records: list[ReportRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        d = asdict(rec)
        w.writerow([fmt(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def render_json(rec: ReportRecord) -> str:
    return json.dumps(asdict(rec), sort_keys=True) + "\n"


def write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def grid(start: float, stop: float, step: float) -> list[float]:
    if not (math.isfinite(start) and math.isfinite(stop) and math.isfinite(step)) or step <= 0 or stop < start:
        raise ValueError(f"empty or invalid range from {start} to {stop} step {step}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def _scenario_from_args(args) -> Scenario:
    if args.file:
        return load_scenario(args.file)
    if not args.scenario:
        raise UsageError("give --scenario NAME or --file PATH")
    _, names = CATALOG[args.scenario]
    params = {}
    for n in names:
        v = getattr(args, PARAM_FLAGS[n])
        if v is None:
            raise UsageError(f"scenario {args.scenario} needs --{n}")
        params[n] = v
    return build(args.scenario, params)


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", choices=sorted(CATALOG))
    p.add_argument("--file", help="scenario file (JSON)")
    for flag, dest in PARAM_FLAGS.items():
        p.add_argument(f"--{flag}", dest=dest, type=float)
    p.add_argument("--eve-frame", choices=("standard", "rotated"), default="standard")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nzbar", type=int)
    p.add_argument("--mu", action="store_true", help="also estimate the entanglement measure (slow)")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="keyagree", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="report information and separability diagnostics for one scenario")
    _add_common(pa)
    pa.add_argument("--format", choices=("table", "csv", "json-record"), default="table")

    ps = sub.add_parser("scan", help="sweep one scenario parameter, one CSV row per grid point")
    _add_common(ps)
    ps.add_argument("--param", required=True)
    ps.add_argument("--from", dest="start", type=float, required=True)
    ps.add_argument("--to", dest="stop", type=float, required=True)
    ps.add_argument("--step", type=float, required=True)

    pm = sub.add_parser("simulate", help="Monte Carlo repeat-code protocol vs analytic bounds")
    pm.add_argument("--D", type=float, required=True)
    pm.add_argument("--delta", type=float)
    pm.add_argument("--N", type=int, required=True)
    pm.add_argument("--trials", type=int, default=100000)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--format", choices=("table", "json-record"), default="table")
    pm.add_argument("--out")
    return ap


def cmd_analyze(args) -> str:
    scenario = _scenario_from_args(args)
    rec = analyze(scenario, args.eve_frame, args.restarts, args.seed, args.nzbar, args.mu)
    if args.format == "csv":
        return render_csv([rec])
    if args.format == "json-record":
        return render_json(rec)
    return render_table(rec)


def cmd_scan(args) -> str:
    if not args.scenario:
        raise UsageError("scan needs --scenario")
    _, names = CATALOG[args.scenario]
    if args.param not in names:
        raise UsageError(f"{args.scenario} has parameters {list(names)}, not {args.param!r}")
    points = grid(args.start, args.stop, args.step)
    records = []
    for value in points:
        params = {}
        for n in names:
            params[n] = value if n == args.param else getattr(args, PARAM_FLAGS[n])
            if params[n] is None:
                raise UsageError(f"scenario {args.scenario} needs --{n}")
        rec = analyze(build(args.scenario, params), args.eve_frame, args.restarts, args.seed, args.nzbar, args.mu)
        records.append(rec)
    return render_csv(records)


def cmd_simulate(args) -> str:
    from .catalog import example1_delta

    delta = example1_delta(args.D) if args.delta is None else args.delta
    analytic = repeat_code_analytic(args.D, delta, args.N)
    sim = repeat_code_simulate(args.D, delta, args.N, args.trials, args.seed)
    se_b, se_e = sim.standard_errors

    def z(rate, ref, se):
        if se > 0:
            return (rate - ref) / se
        return 0.0 if rate == ref else math.copysign(math.inf, rate - ref)

    out = {
        "D": args.D,
        "delta": delta,
        "N": args.N,
        "trials": sim.trials,
        "seed": sim.seed,
        "accepted": sim.accepted,
        "p_accept_analytic": analytic.p_accept,
        "p_accept_empirical": sim.accepted / sim.trials,
        "beta_N": analytic.beta_N,
        "bob_error_rate": sim.bob_error_rate,
        "bob_se": se_b,
        "bob_z": z(sim.bob_error_rate, analytic.beta_N, se_b),
        "gamma_N_lower": analytic.gamma_N_lower,
        "eve_error_rate": sim.eve_error_rate,
        "eve_se": se_e,
        "eve_z_vs_lower": z(sim.eve_error_rate, analytic.gamma_N_lower, se_e),
        "eve_error_rate_given_correct": (
            sim.eve_errors_on_correct / sim.correctly_accepted if sim.correctly_accepted else float("nan")
        ),
    }
    if args.format == "json-record":
        return json.dumps(out, sort_keys=True) + "\n"
    width = max(len(k) for k in out)
    return "\n".join(f"{k.ljust(width)}  {fmt(v)}" for k, v in out.items()) + "\n"


COMMANDS = {"analyze": cmd_analyze, "scan": cmd_scan, "simulate": cmd_simulate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        with np.errstate(all="raise"):
            text = COMMANDS[args.command](args)
        write_output(text, getattr(args, "out", None))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailure, FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DistributionError, StateError, ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
