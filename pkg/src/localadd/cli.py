"""Command line interface: ``localadd {fit,select,simulate,asymptotics}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np
import yaml

from .asymptotics import (
    CurvatureInput,
    DegenerateOptimumError,
    abc,
    bias_uniform,
    optimal_Ch,
    optimal_w,
    rate_summary,
    variance_formula,
)
from .bench.catalog import CATALOG_NAMES, get_function
from .bench.harness import SCENARIOS, plot_rows, run_mase_unconditional, run_mise
from .bench.io import emit_report, load_csv
from .kernels import get_kernel
from .local_additive import SmoothingParams, fit_local_additive_grid
from .sbe import EvalGrid, get_backend
from .selection import CRITERIA, select_params

log = logging.getLogger("localadd")

KERNEL_CHOICES = ("epanechnikov", "quartic", "tgauss")


def parse_ladder(text: str) -> np.ndarray:
    """``a:b:k`` gives k geometrically spaced values from a to b; ``v1,v2,...`` is a list."""
    if ":" in text:
        try:
            a, b, k = text.split(":")
            a, b, k = float(a), float(b), int(k)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a:b:k, got {text!r}") from None
        if a <= 0 or b <= 0 or k < 1:
            raise argparse.ArgumentTypeError("ladder ends must be positive and k >= 1")
        return np.geomspace(a, b, k)
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as numbers") from None


def parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse point {text!r}") from None


def load_config(path) -> dict:
    if path is None:
        return {}
    text = Path(path).read_text()
    if str(path).endswith((".yaml", ".yml")):
        return yaml.safe_load(text) or {}
    return json.loads(text)


def _backend(args, cfg):
    kwargs = {"kernel": args.kernel}
    for key in ("grid_points", "nodes_per_bandwidth", "max_grid_points"):
        if key in cfg:
            kwargs[key] = cfg[key]
    return get_backend(args.backend, **kwargs)


def _write(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_fit(args, cfg) -> int:
    data = load_csv(args.input, rescale=args.rescale)
    backend = _backend(args, cfg)
    params = SmoothingParams(np.broadcast_to(args.h, (data.d,)), np.broadcast_to(args.w, (data.d,)))
    if args.outputs is None or args.outputs == "grid" or args.outputs.isdigit():
        size = int(args.outputs) if args.outputs and args.outputs.isdigit() else cfg.get("grid_points", 21)
        outputs = EvalGrid.regular(data.lo, data.hi, size, data.d)
    else:
        outputs = np.loadtxt(args.outputs, delimiter=",", ndmin=2, skiprows=1)
    res = fit_local_additive_grid(data, params, outputs, backend, cfg.get("n_min"))
    names = [f"x{j + 1}" for j in range(data.d)]
    rows = [",".join(names + ["estimate", "status"])]
    for p, v, s in zip(res.points, res.values, res.status):
        rows.append(",".join([repr(float(c)) for c in p] + [repr(float(v)) if np.isfinite(v) else "", s]))
    _write("\n".join(rows) + "\n", args.out)
    missing = int((~res.ok).sum())
    if missing:
        log.warning("%d of %d output points had too few observations", missing, len(res.status))
    return 0


def cmd_select(args, cfg) -> int:
    data = load_csv(args.input, rescale=args.rescale)
    backend = _backend(args, cfg)
    res = select_params(
        data, args.h_grid, args.w_grid, args.criterion, backend, args.trace, n_min=cfg.get("n_min")
    )
    _write(json.dumps(res.as_dict(), indent=2) + "\n", args.out)
    return 0


def cmd_simulate(args, cfg) -> int:
    if args.scenario == "d10":
        fn = get_function("d10_interact", 10, args.alpha)
        estimators = cfg.get("estimators")
        report = run_mase_unconditional(
            fn, args.n or 2000, args.sigma, cfg.get("runs", 20), cfg.get("eval_points", 50),
            estimators, args.seed, args.kernel,
        )
        _write(json.dumps(report, indent=2) + "\n", args.out)
        return 0
    kw = {"sigma": args.sigma, "n": args.n or 400, "R": args.R, "seed": args.seed, "kernel": args.kernel}
    if args.scenario == "fig3-sweep":
        kw["alpha"] = args.alpha
    if "estimators" in cfg:
        kw["estimators"] = cfg["estimators"]
    if "normalize" in cfg:
        kw["normalize"] = cfg["normalize"]
    scenario = SCENARIOS[args.scenario](**kw)
    report = run_mise(scenario, workers=args.workers)
    text = emit_report(report.as_dict(with_cells=args.cells), fmt=args.format)
    _write(text, args.out)
    if args.plot_data:
        rows = plot_rows(report)
        with open(args.plot_data, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return 0


def asymptotic_table(function, x0, sigma, n, d, alpha=0.0, kernel="epanechnikov") -> dict:
    fn = get_function(function, d, alpha)
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (fn.d,))
    cv = CurvatureInput(fn.d, fn.second_diag(x0), fn.fourth_cross(x0), sigma, get_kernel(kernel).name)
    coef = abc(cv)
    out = {
        "function": fn.name,
        "x0": x0.tolist(),
        "d": fn.d,
        "n": n,
        "sigma": sigma,
        "r(x0)": fn(x0),
        "second_diag": cv.second_diag.tolist(),
        "fourth_cross_sum": cv.cross_sum,
        "a": coef.a,
        "b": coef.b,
        "c": coef.c,
    }
    try:
        c_h = optimal_Ch(coef, fn.d)
        out["C_h_source"] = "optimal"
    except (DegenerateOptimumError, ValueError) as exc:
        c_h = 1.0
        out["C_h_source"] = f"fixed at 1 ({exc})"
    out["C_h"] = c_h
    try:
        w = optimal_w(coef, c_h, fn.d, n)
        h = c_h * w**2
        out.update(
            w_opt=w,
            h_opt=h,
            bias=bias_uniform(cv, np.full(fn.d, h), w),
            variance=variance_formula(cv, n, w, np.full(fn.d, h)),
        )
    except DegenerateOptimumError as exc:
        out["w_opt"] = f"undefined ({exc})"
    out["rates"] = rate_summary(fn.d, n)
    return out


def cmd_asymptotics(args, cfg) -> int:
    table = asymptotic_table(args.function, args.x0, args.sigma, args.n, args.d, args.alpha, args.kernel)
    width = max(len(k) for k in table)
    lines = []
    for key, val in table.items():
        if isinstance(val, float):
            val = f"{val:.6g}"
        elif isinstance(val, dict):
            val = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in val.items())
        lines.append(f"{key:<{width}}  {val}")
    _write("\n".join(lines) + "\n", None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localadd", description="Local additive regression tools")
    parser.add_argument("--config", help="YAML or JSON file with extra settings")
    parser.add_argument("--kernel", default="epanechnikov", choices=KERNEL_CHOICES)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="local additive fit on an output grid")
    p.add_argument("--input", required=True)
    p.add_argument("--h", type=parse_point, required=True, help="bandwidth, or one per coordinate")
    p.add_argument("--w", type=parse_point, required=True, help="window half-width, or one per coordinate")
    p.add_argument("--outputs", help="'grid' (21 per axis), a grid size, or a headed CSV of points")
    p.add_argument("--backend", default="sbe-ll", choices=("sbe-ll", "sbe-lc"))
    p.add_argument("--rescale", action="store_true", help="map each coordinate column onto [-1, 1]")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="grid search of (h, w) by an information criterion")
    p.add_argument("--input", required=True)
    p.add_argument("--criterion", default="aicc", choices=CRITERIA)
    p.add_argument("--h-grid", type=parse_ladder, required=True)
    p.add_argument("--w-grid", type=parse_ladder, required=True)
    p.add_argument("--trace", default="auto", choices=("exact", "plugin", "auto"))
    p.add_argument("--backend", default="sbe-ll", choices=("sbe-ll", "sbe-lc"))
    p.add_argument("--rescale", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="Monte-Carlo MISE / MASE study")
    p.add_argument("--scenario", required=True, choices=sorted(SCENARIOS) + ["d10"])
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--R", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.4, help="interaction strength (fig3-sweep, d10)")
    p.add_argument("--format", default="json", choices=("json", "text"))
    p.add_argument("--cells", action="store_true", help="include every parameter cell in the report")
    p.add_argument("--plot-data", help="long-format CSV of all cells")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("asymptotics", help="leading bias/variance and optimal parameters at a point")
    p.add_argument("--function", required=True, choices=CATALOG_NAMES)
    p.add_argument("--x0", type=parse_point, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.0)
    p.set_defaults(func=cmd_asymptotics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    cfg = load_config(args.config)
    try:
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args, cfg)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
