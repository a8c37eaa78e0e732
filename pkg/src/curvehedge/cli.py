"""Command-line front end.

Subcommands: extrapolate, hedge, verify, sensitivity, scan-arbitrage.
Exit codes: 0 success or diagnosis, 1 I/O problems, 2 domain or method
errors, 3 verification tolerance breaches. Verification tolerances can
be overridden with a JSON map in the CURVEHEDGE_TOL_OVERRIDE
environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .curves import DEFAULT_HORIZON, CurveShift, present_value
from .errors import CurveHedgeError, InputFormatError
from .extrapolation import (
    M4,
    M6_SW_CONTINUOUS,
    arbitrage_scan,
    extrapolate,
    resolve_alpha,
)
from .hedging import (
    PLAN_FIRST_ORDER,
    PLAN_PERFECT,
    convexity_gap,
    hedge,
    infeasibility_decomposition,
    verify_first_order,
    verify_perfect,
)
from .io import method_from_arg, read_cash_flow, read_curve, render_csv, render_json, render_table
from .sensitivity import ufr_sensitivity
from .shifts import shift_suite
from .variation import EPS_SCHEDULE, method_variation_report

TOLERANCES = {
    "variation_rel": 1e-6,
    "variation_abs": 1e-9,
    "perfect_gap_rel": 1e-9,
    "first_order_residual_rel": 1e-8,
    "remainder_tail": 4,
    "remainder_floor": 1e-9,
}

ENV_TOL = "CURVEHEDGE_TOL_OVERRIDE"


def _tolerances() -> dict:
    tols = dict(TOLERANCES)
    raw = os.environ.get(ENV_TOL)
    if raw:
        try:
            override = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"bad {ENV_TOL}: {exc}")
        if not isinstance(override, dict):
            raise InputFormatError(f"{ENV_TOL} must be a JSON object")
        unknown = set(override) - set(tols)
        if unknown:
            raise InputFormatError(f"unknown tolerance keys {sorted(unknown)}")
        tols.update(override)
    return tols


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(sub, liabilities=False):
    sub.add_argument("--curve", required=True, help="curve file (csv or json)")
    if liabilities:
        sub.add_argument("--liabilities", required=True, help="cash-flow file (csv or json)")
    sub.add_argument("--method", required=True, help="method spec as JSON or @file")
    sub.add_argument("--shifts", type=int, default=20, help="size of the random shift suite")
    sub.add_argument("--seed", type=int, default=0, help="seed for the shift suite")
    sub.add_argument("--format", choices=("table", "json", "csv"), default="table")
    sub.add_argument("--out", default=None, help="write output here instead of stdout")
    sub.add_argument("--horizon", type=float, default=DEFAULT_HORIZON)


def _load(args, liabilities=False):
    curve = read_curve(args.curve)
    spec = method_from_arg(args.method)
    resolved = resolve_alpha(curve, spec)
    flow = read_cash_flow(args.liabilities) if liabilities else None
    return curve, resolved, flow


def cmd_extrapolate(args) -> int:
    curve, spec, _ = _load(args)
    ec = extrapolate(curve, spec, args.horizon)
    ts = np.arange(0.0, args.horizon + 0.5 * args.step, args.step)
    ts = ts[ts <= args.horizon]
    zbar = np.asarray(ec.zero_yield(ts), dtype=float)
    fbar = np.asarray(ec.forward_rate(ts), dtype=float)
    dbar = np.asarray(ec.discount_factor(ts), dtype=float)
    scan = arbitrage_scan(ec, args.scan_step)

    headers = ["t", "zero_yield", "forward", "discount"]
    rows = [[float(t), z, f, d] for t, z, f, d in zip(ts, zbar, fbar, dbar)]
    if args.format == "json":
        # defective curves have undefined yields in places; strict JSON
        # has no NaN, so emit null there
        clean = lambda x: float(x) if np.isfinite(x) else None
        payload = {
            "method": spec.to_json(),
            "samples": [
                {h: (clean(v) if h != "t" else v) for h, v in zip(headers, row)}
                for row in rows
            ],
            "defects": scan.to_json(),
        }
        _emit(args, render_json(payload))
    elif args.format == "csv":
        _emit(args, render_csv(headers, rows))
    else:
        text = render_table(headers, rows)
        if scan.is_clean:
            text += "no defects found\n"
        else:
            for item in scan.to_json():
                text += f"defect {item['kind']} on [{item['start']}, {item['end']}]\n"
        _emit(args, text)
    if not scan.is_clean:
        print("defective curve: see scan report", file=sys.stderr)
        return 2
    return 0


def cmd_hedge(args) -> int:
    curve, spec, flow = _load(args, liabilities=True)
    if spec.kind in (M4, M6_SW_CONTINUOUS):
        plan = hedge(spec, curve, flow, args.horizon)
        decomp = infeasibility_decomposition(spec, curve, flow, eps=args.fra_eps, horizon=args.horizon)
        payload = {"plan": plan.to_json(), "fra_overlay": decomp.to_json()}
        if args.format == "json":
            _emit(args, render_json(payload))
        else:
            lines = [
                f"kind: {plan.kind}",
                f"matched lump at tau: {decomp.bond_lump_at_tau:.10g}",
                f"unmatched forward coefficient: {decomp.forward_coefficient:.10g}",
                f"fra accrual eps: {decomp.fra.eps:.10g}",
                f"fra quantity: {decomp.fra_quantity:.10g}",
            ]
            _emit(args, "\n".join(lines) + "\n")
        return 0

    plan = hedge(spec, curve, flow, args.horizon)
    ec = extrapolate(curve, spec, args.horizon)
    liability_value = present_value(ec, flow)
    suite = shift_suite(args.shifts, args.seed, args.horizon)
    residuals = [verify_first_order(plan, spec, curve, flow, s, args.horizon) for s in suite]
    gap = convexity_gap(spec, curve, flow, CurveShift.parallel(1.0, args.horizon), plan, args.horizon)
    payload = {
        "plan": plan.to_json(),
        "total_value": plan.value(),
        "liability_value": liability_value,
        "leverage": plan.value() / liability_value,
        "max_first_order_residual": max(residuals),
        "convexity_gap_parallel_unit": gap,
    }
    if args.format == "json":
        _emit(args, render_json(payload))
    elif args.format == "csv":
        rows = [["lump", l["t"], l["amount"]] for l in payload["plan"]["lumps"]]
        rows += [["density", d["a"], d["b"], d["rate"]] for d in payload["plan"]["densities"]]
        _emit(args, render_csv(["kind", "a", "b", "c"], rows))
    else:
        lines = [f"kind: {plan.kind}"]
        for l in plan.lumps:
            lines.append(f"lump  t={l.time:.10g}  amount={l.amount:.10g}")
        for d in plan.to_json()["densities"]:
            lines.append(f"density  [{d['a']:.10g}, {d['b']:.10g}]  rate={d['rate']:.10g}")
        lines += [
            f"total value: {payload['total_value']:.10g}",
            f"liability value: {payload['liability_value']:.10g}",
            f"leverage: {payload['leverage']:.10g}",
            f"max first-order residual over {args.shifts} shifts: {payload['max_first_order_residual']:.3e}",
            f"convexity gap (parallel unit shift): {payload['convexity_gap_parallel_unit']:.10g}",
        ]
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_verify(args) -> int:
    curve, spec, flow = _load(args, liabilities=True)
    tols = _tolerances()
    suite = shift_suite(args.shifts, args.seed, args.horizon)
    corrupt = args.corrupt_analytic or 0.0
    checks = []  # (name, ok, value, bound)

    liability_value = present_value(extrapolate(curve, spec, args.horizon), flow)
    for i, shift in enumerate(suite):
        report = method_variation_report(spec, curve, shift, flow, args.horizon)
        analytic = report.analytic + corrupt
        residual = abs(analytic - report.numeric)
        bound = tols["variation_rel"] * max(abs(analytic), abs(report.numeric)) + tols[
            "variation_abs"
        ] * max(1.0, abs(liability_value))
        checks.append((f"variation[{i}]", residual <= bound, residual, bound))

    if spec.kind not in (M4, M6_SW_CONTINUOUS):
        plan = hedge(spec, curve, flow, args.horizon)
        bound = tols["first_order_residual_rel"] * max(1.0, abs(liability_value))
        for i, shift in enumerate(suite):
            residual = verify_first_order(plan, spec, curve, flow, shift, args.horizon)
            checks.append((f"hedge_equation[{i}]", residual <= bound, residual, bound))
        if plan.kind == PLAN_PERFECT:
            gap = verify_perfect(plan, spec, curve, flow, suite, args.horizon)
            bound = tols["perfect_gap_rel"] * abs(liability_value)
            checks.append(("perfect_revaluation", gap <= bound, gap, bound))
        if plan.kind == PLAN_FIRST_ORDER:
            tail = int(tols["remainder_tail"])
            # ratios already at roundoff level cannot be asked to keep falling
            floor = tols["remainder_floor"] * (1.0 + abs(liability_value))
            for i, shift in enumerate(suite):
                ratios = _remainder_ratios(plan, spec, curve, flow, shift, args.horizon)
                window = ratios[-tail:]
                good = all(b < a or b < floor for a, b in zip(window, window[1:]))
                checks.append(
                    (f"remainder_decay[{i}]", good, ratios[-1], ratios[-tail])
                )

    lines = []
    failed = None
    for name, ok, value, bound in checks:
        lines.append(f"{'PASS' if ok else 'FAIL'} {name} value={value:.3e} bound={bound:.3e}")
        if not ok and failed is None:
            failed = name
    if args.format == "json":
        payload = {
            "checks": [
                {"name": n, "ok": ok, "value": v, "bound": b} for n, ok, v, b in checks
            ],
            "ok": failed is None,
        }
        _emit(args, render_json(payload))
    else:
        _emit(args, "\n".join(lines) + "\n")
    if failed is not None:
        print(f"verification failed: {failed}", file=sys.stderr)
        return 3
    return 0


def _remainder_ratios(plan, spec, curve, flow, shift, horizon):
    base_asset = plan.value()
    base_liab = present_value(extrapolate(curve, spec, horizon), flow)
    ratios = []
    for eps in EPS_SCHEDULE:
        shifted = curve.shifted(shift, eps)
        asset = plan.value_under(shifted, curve)
        liab = present_value(extrapolate(shifted, spec, horizon), flow)
        ratios.append(abs((asset - base_asset) - (liab - base_liab)) / eps)
    return ratios


def cmd_sensitivity(args) -> int:
    curve, spec, flow = _load(args, liabilities=True)
    report = ufr_sensitivity(spec, curve, flow, args.horizon)
    if args.format == "json":
        _emit(args, render_json(report.to_json()))
    else:
        data = report.to_json()
        lines = [f"method: {data['method']}", f"S: {data['S']:.10g}"]
        if data["lower"] is not None:
            lines.append(f"bounds: [{data['lower']:.10g}, {data['upper']:.10g}]")
        lines.append(f"oracle: {data['oracle']:.10g}")
        lines.append(f"rel residual: {data['rel_residual']:.3e}")
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_scan(args) -> int:
    curve, spec, _ = _load(args)
    ec = extrapolate(curve, spec, args.horizon)
    scan = arbitrage_scan(ec, args.step)
    if args.format == "json":
        _emit(args, render_json({"defects": scan.to_json(), "clean": scan.is_clean}))
    else:
        if scan.is_clean:
            _emit(args, "no defects found\n")
        else:
            lines = [
                f"defect {d['kind']} on [{d['start']}, {d['end']}]" for d in scan.to_json()
            ]
            _emit(args, "\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvehedge",
        description="extrapolated yield curves, hedges and sensitivities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extrapolate", help="sample an extrapolated curve")
    _add_common(p)
    p.add_argument("--step", type=float, default=1.0, help="sampling step in years")
    p.add_argument("--scan-step", type=float, default=0.25, help="defect scan step")
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("hedge", help="build and check a hedge plan")
    _add_common(p, liabilities=True)
    p.add_argument("--fra-eps", type=float, default=1.0, help="FRA accrual window")
    p.set_defaults(func=cmd_hedge)

    p = sub.add_parser("verify", help="run analytic-vs-numeric verification checks")
    _add_common(p, liabilities=True)
    p.add_argument("--corrupt-analytic", type=float, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sensitivity", help="sensitivity to the ultimate forward rate")
    _add_common(p, liabilities=True)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("scan-arbitrage", help="scan a curve for arbitrage defects")
    _add_common(p)
    p.add_argument("--step", type=float, default=0.25, help="scan step in years")
    p.set_defaults(func=cmd_scan)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CurveHedgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
