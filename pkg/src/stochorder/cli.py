"""Command-line front end.

Subcommands:

* check-order -- verify one or more stochastic orders between two
  quantile-specified distributions, optionally after distorting both;
* classify    -- shape-classify a distortion, or a system distortion built
  from a minimal signature and an exchangeable copula, with preservation
  advice per order;
* distort     -- emit a distorted quantile table;
* system      -- emit a system distortion table plus its classification;
* reproduce   -- regenerate the reference curves for the worked examples
  and counterexamples as deterministic CSV/JSON;
* sweep       -- run the randomized preservation suites.

Exit codes: 0 success/orders hold; 1 at least one checked order is violated;
2 input or validation error; 3 a preservation sweep recorded a failure;
4 output I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Dict, List, Optional, Sequence

from . import catalog
from . import copulas as cop_mod
from . import distortions as dist_mod
from . import distributions as distrib_mod
from . import funcalc
from . import orders as orders_mod
from . import systems as sys_mod
from . import sweeps as sweeps_mod
from .numerics import Grid, NumericsError, Tolerance, uniform_grid
from .orders import OrderKind

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INPUT = 2
EXIT_SWEEP_FAIL = 3
EXIT_IO = 4

_INPUT_ERRORS = (
    distrib_mod.SpecError,
    distrib_mod.InfiniteMeanError,
    distrib_mod.DegenerateDensityError,
    dist_mod.DistortionValidationError,
    cop_mod.CopulaValidationError,
    sys_mod.SignatureError,
    funcalc.ExprError,
    NumericsError,
    ValueError,
)

REPRO_TARGETS = ("ce02", "ce01", "ex_durante_1", "ex_durante_2",
                 "ex_diag_5comp", "ex_3of4", "ex_qmit")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_csv(path: str, header: Sequence[str], rows, comment: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fp:
        if comment:
            fp.write(f"# {comment}\n")
        fp.write(",".join(header) + "\n")
        for row in rows:
            fp.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Optional[str], doc: dict) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            fp.write(text)


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fp:
        doc = json.load(fp)
    if not isinstance(doc, dict):
        raise ValueError(f"config {path!r} must hold a JSON object")
    return doc


def _pick(args_value, config: dict, key: str, default=None):
    if args_value is not None:
        return args_value
    return config.get(key, default)


def _grid_from(config: dict, count=None, lo=None, hi=None, margin=None) -> Grid:
    grid_cfg = config.get("grid", {}) if isinstance(config.get("grid", {}), dict) else {}
    count = count if count is not None else grid_cfg.get("count", 512)
    lo = lo if lo is not None else grid_cfg.get("lo", 0.0)
    hi = hi if hi is not None else grid_cfg.get("hi", 1.0)
    margin = margin if margin is not None else grid_cfg.get("edge_margin", 1e-3)
    return uniform_grid(int(count), lo=float(lo), hi=float(hi),
                        edge_margin=float(margin))


def _verdict_record(scenario: str, verdict) -> dict:
    return {
        "scenario": scenario,
        "order": verdict.kind.value,
        "holds": verdict.holds,
        "witnesses": [{"p": p, "margin": m} for p, m in verdict.witnesses],
        "grid": verdict.grid.describe(),
        "tolerances": {"abs_tol": verdict.tolerance.abs_tol,
                       "rel_tol": verdict.tolerance.rel_tol},
        "notes": list(verdict.notes),
    }


def _csv_path_for_order(base: str, order: OrderKind, multiple: bool) -> str:
    if not multiple:
        return base
    stem, ext = os.path.splitext(base)
    return f"{stem}_{order.value}{ext or '.csv'}"


def cmd_check_order(args) -> int:
    config = _load_config(args.config)
    x_spec = _pick(args.x, config, "x")
    y_spec = _pick(args.y, config, "y")
    if not x_spec or not y_spec:
        raise ValueError("check-order needs --x and --y distribution specs")
    order_names = args.order or config.get("orders")
    if not order_names:
        raise ValueError("check-order needs at least one --order")
    kinds = [OrderKind(name) for name in order_names]
    distortion_spec = _pick(args.distort, config, "distortion")
    scenario = _pick(args.scenario, config, "name", default="cli")
    grid = _grid_from(config, args.grid_count, args.grid_lo, args.grid_hi,
                      args.grid_margin)

    x = distrib_mod.build(distrib_mod.parse_spec(x_spec))
    y = distrib_mod.build(distrib_mod.parse_spec(y_spec))
    h = None
    if distortion_spec:
        h = dist_mod.parse_distortion_spec(distortion_spec)
        x = distrib_mod.distort(x, h)
        y = distrib_mod.distort(y, h)

    verdicts = [orders_mod.check_order(x, y, kind, grid) for kind in kinds]

    doc = {
        "scenario": scenario,
        "x": x.label,
        "y": y.label,
        "distortion": h.label if h is not None else None,
        "holds": all(v.holds for v in verdicts),
        "results": [_verdict_record(scenario, v) for v in verdicts],
    }
    outputs = config.get("outputs", {}) if isinstance(config.get("outputs", {}), dict) else {}
    json_path = _pick(args.out_json, outputs, "verdict_json")
    csv_path = _pick(args.out_csv, outputs, "curve_csv")
    try:
        if json_path or not csv_path:
            _write_json(json_path, doc)
        if csv_path:
            multiple = len(verdicts) > 1
            for v in verdicts:
                path = _csv_path_for_order(csv_path, v.kind, multiple)
                with open(path, "w", encoding="utf-8", newline="") as fp:
                    orders_mod.write_curve_csv(v, fp)
    except OSError as ex:
        print(f"output error: {ex}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if doc["holds"] else EXIT_VIOLATED


def _summary_verdict(flags: Dict[str, bool]) -> str:
    star = flags["starshaped"]
    anti = flags["antistarshaped"]
    if star and anti:
        return "identity-like"
    if star:
        return "starshaped"
    if anti:
        return "antistarshaped"
    if flags["dual_antistarshaped"]:
        return "dual-antistarshaped"
    return "unclassified"


def _advice_block(report) -> Dict[str, dict]:
    out = {}
    for kind in OrderKind:
        advice = sys_mod.preservation_advice(kind, report)
        out[kind.value] = {"verdict": advice.verdict, "reason": advice.reason}
    return out


def _classification_doc(h: dist_mod.Distortion,
                        sig: Optional[sys_mod.MinimalSignature] = None,
                        handle: Optional[cop_mod.CopulaHandle] = None,
                        closed_form: Optional[str] = None) -> dict:
    report = dist_mod.classify(h)
    doc = {
        "label": h.label,
        "flags": report.flags(),
        "verdict": _summary_verdict(report.flags()),
        "advice": _advice_block(report),
    }
    if closed_form:
        doc["closed_form"] = closed_form
    if sig is None:
        return doc
    doc["signature"] = sig.label()
    if handle is not None:
        doc["copula"] = handle.label
        if handle.kind == "durante":
            if sig.n == 3:
                doc["corollary"] = sys_mod.classify_3component(sig).to_json()
            elif sig.n == 4:
                doc["corollary"] = sys_mod.classify_4component(sig).to_json()
            doc["shape_condition"] = sys_mod.durante_shape_condition(
                sig, handle.generator).to_json()
        elif handle.kind == "jaworski":
            params = sys_mod.diag_system_params(sig)
            doc["diag_params"] = {"alpha": sys_mod.rational_str(params.alpha),
                                  "beta": sys_mod.rational_str(params.beta)}
            doc["diag_classification"] = sys_mod.classify_diag(
                sig, handle.diagonal).to_json()
    return doc


def _build_system(signature_text: str, copula_text: str):
    sig = sys_mod.parse_signature(signature_text)
    handle = cop_mod.parse_copula_spec(copula_text)
    if handle.kind == "durante":
        built = sys_mod.durante_system_distortion(sig, handle.generator)
    elif handle.kind == "jaworski":
        built = sys_mod.diag_system_distortion(sig, handle.diagonal)
    else:
        built = sys_mod.system_distortion(sig, handle)
    return sig, handle, built


def cmd_classify(args) -> int:
    if args.h and args.signature:
        raise ValueError("give either --h or --signature/--copula, not both")
    if args.h:
        h = dist_mod.parse_distortion_spec(args.h)
        doc = _classification_doc(h)
    elif args.signature:
        if not args.copula:
            raise ValueError("--signature needs --copula")
        sig, handle, built = _build_system(args.signature, args.copula)
        doc = _classification_doc(built.h, sig, handle, built.closed_form)
    else:
        raise ValueError("classify needs --h or --signature/--copula")
    try:
        _write_json(args.out_json, doc)
    except OSError as ex:
        print(f"output error: {ex}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_distort(args) -> int:
    x = distrib_mod.build(distrib_mod.parse_spec(args.x))
    h = dist_mod.parse_distortion_spec(args.h)
    xh = distrib_mod.distort(x, h)
    grid = _grid_from({}, args.grid_count, args.grid_lo, args.grid_hi,
                      args.grid_margin)
    rows = [(p, xh.quantile(p)) for p in grid.points]
    try:
        _write_csv(args.out_csv, ("p", "value"), rows,
                   comment=f"distorted quantile of {x.label} under h={h.label}")
    except OSError as ex:
        print(f"output error: {ex}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_system(args) -> int:
    sig, handle, built = _build_system(args.signature, args.copula)
    doc = _classification_doc(built.h, sig, handle, built.closed_form)
    count = args.grid_count if args.grid_count is not None else 257
    pts = [i / (count - 1) for i in range(int(count))]
    rows = [(p, built.h.fn(p)) for p in pts]
    try:
        if args.out_csv:
            _write_csv(args.out_csv, ("p", "value"), rows,
                       comment=f"system distortion h_T for a=({sig.label()}) "
                               f"with {handle.label}")
        _write_json(args.out_json, doc)
    except OSError as ex:
        print(f"output error: {ex}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------------------
# reproduce targets


def _interior_points(lo: float, hi: float, count: int) -> List[float]:
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _repro_ce02(out_dir: str) -> List[str]:
    """Density-ratio turning point, baseline dmrl gap, and the distorted gap
    that dips negative for small p (order not preserved by a convex h)."""
    dd = catalog.distributions()
    x, y = dd["ce02_x"], dd["ce02_y"]
    h = dist_mod.power(5.0)
    files = []

    grid = uniform_grid(512, edge_margin=0.01)
    s_rows = []
    for p in grid.points:
        s = (distrib_mod.density_at_quantile(x, p)
             / distrib_mod.density_at_quantile(y, p))
        s_rows.append((p, s))
    path = os.path.join(out_dir, "s_curve.csv")
    _write_csv(path, ("p", "value"), s_rows,
               comment="density ratio s(p) for the baseline pair; "
                       "decreasing then increasing with turning point 1/8")
    files.append(path)

    gap = orders_mod.dmrl_integral_curve(x, y, grid)
    path = os.path.join(out_dir, "dmrl_gap.csv")
    _write_csv(path, ("p", "value"), zip(gap["p"], gap["value"]),
               comment="baseline dmrl gap I(p) (nonnegative: the order holds)")
    files.append(path)

    xh = distrib_mod.distort(x, h)
    yh = distrib_mod.distort(y, h)
    pts = tuple(_interior_points(0.002, 0.2, 199))
    dist_grid = Grid(points=pts, lo=0.0, hi=1.0, edge_margin=1e-3)
    gap_h = orders_mod.dmrl_integral_curve(xh, yh, dist_grid)
    path = os.path.join(out_dir, "dmrl_gap_distorted.csv")
    _write_csv(path, ("p", "value"), zip(gap_h["p"], gap_h["value"]),
               comment="dmrl gap I_h(p) after distorting both sides by p^5; "
                       "negative for small p, sign change near 0.0263")
    files.append(path)
    return files


def _repro_ce01(out_dir: str) -> List[str]:
    """Quantile-mit gap in x-space for the kinked-hazard pair distorted by
    1-(1-p)^5: negative inside [1.2539, 1.3050], positive elsewhere."""
    dd = catalog.distributions()
    x, y = dd["ce01_x"], dd["exp_1"]
    h = dist_mod.dualpower(5.0)
    xh = distrib_mod.distort(x, h)
    yh = distrib_mod.distort(y, h)
    rows = []
    for i in range(1, 201):
        t = i / 100.0
        rows.append((t, orders_mod.qmit_xspace_integral(xh, yh, t)))
    path = os.path.join(out_dir, "qmit_gap_xspace.csv")
    _write_csv(path, ("t", "value"), rows,
               comment="distorted quantile-mit gap in x-space; sign dips "
                       "negative near t=1.3")
    return [path]


def _repro_durante(sig_name: str, out_dir: str) -> List[str]:
    sig = catalog.signatures()[sig_name]
    gen = cop_mod.validate_generator(catalog.DEFAULT_GENERATOR_TEXT, sig.n)
    built = sys_mod.durante_system_distortion(sig, gen)
    files = []
    pts = _interior_points(0.0, 1.0, 257)
    path = os.path.join(out_dir, "distortion.csv")
    _write_csv(path, ("p", "value"), [(p, built.h.fn(p)) for p in pts],
               comment=f"system distortion h_T, a=({sig.label()}), "
                       f"f(p)={gen.label}")
    files.append(path)
    cond = sys_mod.durante_condition_values(sig, gen, pts)
    path = os.path.join(out_dir, "shape_condition.csv")
    _write_csv(path, ("p", "value"), zip(pts, cond),
               comment="shape condition S(p); >= 0 everywhere means "
                       "starshaped, <= 0 antistarshaped")
    files.append(path)
    handle = cop_mod.CopulaHandle(kind="durante", n=sig.n,
                                  label=f"durante:f={gen.label},n={sig.n}",
                                  generator=gen)
    doc = _classification_doc(built.h, sig, handle, built.closed_form)
    path = os.path.join(out_dir, "classification.json")
    _write_json(path, doc)
    files.append(path)
    return files


def _repro_diag(sig_name: str, diag_name: str, out_dir: str,
                extra_qmit: bool = False) -> List[str]:
    sig = catalog.signatures()[sig_name]
    diag_text, n = catalog.diagonals()[diag_name]
    if n != sig.n:
        raise ValueError(f"diagonal {diag_name} has n={n}, signature needs {sig.n}")
    d = cop_mod.validate_diagonal(diag_text, n)
    built = sys_mod.diag_system_distortion(sig, d)
    files = []
    pts = _interior_points(0.0, 1.0, 257)
    path = os.path.join(out_dir, "distortion.csv")
    _write_csv(path, ("p", "value"), [(p, built.h.fn(p)) for p in pts],
               comment=f"system distortion h_T = {built.closed_form}, "
                       f"a=({sig.label()}), d(p)={d.label}")
    files.append(path)
    handle = cop_mod.CopulaHandle(kind="jaworski", n=n,
                                  label=f"diagonal:d={d.label},n={n}",
                                  diagonal=d)
    doc = _classification_doc(built.h, sig, handle, built.closed_form)
    path = os.path.join(out_dir, "classification.json")
    _write_json(path, doc)
    files.append(path)
    if extra_qmit:
        dual = dist_mod.dual(built.h)
        ratio_pts = _interior_points(1.0 / 512.0, 1.0, 512)
        path = os.path.join(out_dir, "dual_ratio.csv")
        _write_csv(path, ("p", "value"),
                   [(p, dual.fn(p) / p) for p in ratio_pts],
                   comment="dual distortion ratio h*(p)/p; decreasing means "
                           "the dual is antistarshaped")
        files.append(path)
        path = os.path.join(out_dir, "diagonal.csv")
        _write_csv(path, ("p", "value"), [(p, d.fn(p)) for p in pts],
                   comment=f"diagonal d(p)={d.label} against the identity")
        files.append(path)
    return files


def cmd_reproduce(args) -> int:
    target = args.target
    out_dir = args.out_dir or f"repro_{target}"
    try:
        os.makedirs(out_dir, exist_ok=True)
        if target == "ce02":
            files = _repro_ce02(out_dir)
        elif target == "ce01":
            files = _repro_ce01(out_dir)
        elif target == "ex_durante_1":
            files = _repro_durante("two_parallel_pairs", out_dir)
        elif target == "ex_durante_2":
            files = _repro_durante("one_of_two_pairs", out_dir)
        elif target == "ex_diag_5comp":
            files = _repro_diag("five_comp_bridge", "cubic_bend_5", out_dir)
        elif target == "ex_3of4":
            files = _repro_diag("three_of_four", "mixed_bend_4", out_dir)
        elif target == "ex_qmit":
            files = _repro_diag("series_with_parallel_pair", "reflected_cubic_4",
                                out_dir, extra_qmit=True)
        else:
            raise ValueError(f"unknown reproduce target {target!r}")
    except OSError as ex:
        print(f"output error: {ex}", file=sys.stderr)
        return EXIT_IO
    for path in files:
        print(path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    raw = _load_config(args.config)
    tol = Tolerance(abs_tol=float(raw.get("abs_tol", 1e-8)),
                    rel_tol=float(raw.get("rel_tol", 1e-8)))
    suites = tuple(raw.get("suites", sweeps_mod.SUITE_NAMES))
    for name in suites:
        if name not in sweeps_mod.SUITE_NAMES:
            raise ValueError(f"unknown sweep suite {name!r}")
    config = sweeps_mod.SweepConfig(
        seed=int(raw.get("seed", sweeps_mod.DEFAULT_SEED)),
        trials=int(raw.get("trials", sweeps_mod.DEFAULT_TRIALS)),
        grid_count=int(raw.get("grid_count", 48)),
        edge_margin=float(raw.get("edge_margin", 0.01)),
        tolerance=tol,
        suites=suites,
    )
    if config.trials < 0:
        raise ValueError("trials must be >= 0")
    summary = sweeps_mod.run_all(config)
    try:
        _write_json(args.out, summary.to_json())
    except OSError as ex:
        print(f"output error: {ex}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if summary.ok else EXIT_SWEEP_FAIL


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-count", type=int, default=None,
                        help="number of grid points (default 512)")
    parser.add_argument("--grid-lo", type=float, default=None)
    parser.add_argument("--grid-hi", type=float, default=None)
    parser.add_argument("--grid-margin", type=float, default=None,
                        help="edge margin keeping points off the ends")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochorder",
        description="Verify stochastic orders between quantile-defined "
                    "distributions and classify distortion functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-order", help="verify stochastic orders")
    p.add_argument("--order", action="append",
                   choices=[k.value for k in OrderKind],
                   help="order to check (repeatable)")
    p.add_argument("--x", help="distribution spec for the lower side")
    p.add_argument("--y", help="distribution spec for the upper side")
    p.add_argument("--distort", help="distortion spec applied to both sides")
    p.add_argument("--config", help="scenario JSON (flags override)")
    p.add_argument("--scenario", help="scenario name for reports")
    p.add_argument("--out-json", help="verdict JSON path (default stdout)")
    p.add_argument("--out-csv", help="curve CSV path (per order)")
    _add_grid_flags(p)
    p.set_defaults(fn=cmd_check_order)

    p = sub.add_parser("classify", help="shape-classify a distortion or system")
    p.add_argument("--h", help="distortion spec")
    p.add_argument("--signature", help="minimal signature, e.g. 2,0,-2,1")
    p.add_argument("--copula", help="copula spec, e.g. durante:f=p^0.5,n=4")
    p.add_argument("--out-json", help="report path (default stdout)")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("distort", help="emit a distorted quantile table")
    p.add_argument("--x", required=True, help="distribution spec")
    p.add_argument("--h", required=True, help="distortion spec")
    p.add_argument("--out-csv", required=True, help="CSV path")
    _add_grid_flags(p)
    p.set_defaults(fn=cmd_distort)

    p = sub.add_parser("system", help="emit a system distortion and classify it")
    p.add_argument("--signature", required=True)
    p.add_argument("--copula", required=True)
    p.add_argument("--out-csv", help="h_T table CSV path")
    p.add_argument("--out-json", help="classification path (default stdout)")
    p.add_argument("--grid-count", type=int, default=None,
                   help="points in the h_T table (default 257)")
    p.set_defaults(fn=cmd_system)

    p = sub.add_parser("reproduce", help="regenerate reference curves")
    p.add_argument("target", choices=REPRO_TARGETS)
    p.add_argument("--out-dir", help="output directory (default repro_<target>)")
    p.set_defaults(fn=cmd_reproduce)

    p = sub.add_parser("sweep", help="run randomized preservation suites")
    p.add_argument("--config", help="sweep config JSON")
    p.add_argument("--out", help="summary JSON path (default stdout)")
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _INPUT_ERRORS as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as ex:
        print(f"error: bad JSON config: {ex}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
