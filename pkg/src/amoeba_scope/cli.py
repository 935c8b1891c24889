"""``amoeba-scope`` command line.

Exit codes: 0 success, 2 invalid input, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as aio
from .boundary import classify_point, locate_pinch
from .errors import NumericFailure, ValidationError
from .fibers import DEFAULT_TOL_RADIAL, contour_cloud
from .parsing import parse_curve, parse_polynomial
from .regions import basis_gap_report, rasterize_amoeba_2d
from .render import PALETTE, GridLayer, Panel, PointsLayer, SceneSpec
from .scenarios import (
    FIG1_CURVE,
    FIG1_GENERATORS,
    HYPERBOLA_CURVE,
    SCENARIOS,
    TOLERANCE_KEYS,
    OutputDir,
    ScenarioConfig,
    read_config,
    run_scenario,
)
from .voxels import complement_components, parse_window

TOOLS = ("classify", "raster", "contour", "pinch", "basis-gap")


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="amoeba-scope",
        description="Amoebas, coamoebas and contours of plane and space curves.",
        epilog=f"scenarios: {', '.join(SCENARIOS)}",
    )
    p.add_argument("command", help="'scenario', a scenario name, or one of: " + ", ".join(TOOLS))
    p.add_argument("name", nargs="?", help="scenario name after 'scenario'")
    p.add_argument("--config", help="JSON file with scenario config fields")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--res", type=int, help="grid resolution (contour: samples per axis)")
    p.add_argument("--angles", type=int, help="angle samples per fiber")
    p.add_argument("--window", help="lo1,hi1,lo2,hi2[,lo3,hi3]")
    p.add_argument("--poly", help="Laurent polynomial literal, e.g. '1 + z + w'")
    p.add_argument("--curve", help="curve literal, e.g. '2; t; -(t+1/6)/(t+1)'")
    p.add_argument("--generators", help="generator literals separated by ';'")
    p.add_argument("--points", help="CSV file of query points x1,x2")
    p.add_argument("--point", action="append", default=[], help="query point x1,x2 (repeatable)")
    for k in TOLERANCE_KEYS:
        p.add_argument("--" + k.replace("_", "-"), dest=k, type=float)
    return p


def _config(args, scenario: str, registered: bool) -> ScenarioConfig:
    data = read_config(args.config) if args.config else {}
    if scenario:
        data["scenario"] = scenario
    for key in ("out", "seed", "res", "angles", "poly", "curve"):
        v = getattr(args, key)
        if v is not None:
            data[key] = v
    if args.window is not None:
        data["window"] = _floats(args.window)
    if args.generators is not None:
        data["generators"] = [g.strip() for g in args.generators.split(";") if g.strip()]
    pts = [_floats(s) for s in args.point]
    if args.points:
        pts += aio.read_points_csv(args.points).tolist()
    if pts:
        data["points"] = pts
    tols = dict(data.get("tolerances") or {})
    for k in TOLERANCE_KEYS:
        if getattr(args, k) is not None:
            tols[k] = getattr(args, k)
    if tols:
        data["tolerances"] = tols
    data.setdefault("out", "out")
    return ScenarioConfig.from_dict(data, registered)


def _classify(cfg: ScenarioConfig, out: OutputDir) -> dict:
    f = parse_polynomial(cfg.poly or "1 + z + w", 2)
    if not cfg.points:
        raise ValidationError("classify needs --point or --points")
    kw = {k: cfg.tolerances[k] for k in TOLERANCE_KEYS if k in cfg.tolerances}
    results = [classify_point(f, p, cfg.angles or 360, **kw) for p in cfg.points]
    text = aio.classification_csv(results)
    out.text("classification.csv", text)
    sys.stdout.write(text)
    return out.metrics(cfg, {"points": [{"x": r.x, "verdict": r.verdict.value, "normal": r.mean_normal,
                                         "note": r.note} for r in results]})


def _raster(cfg: ScenarioConfig, out: OutputDir) -> dict:
    f = parse_polynomial(cfg.poly or "1 + z + w", 2)
    win = parse_window(cfg.window if cfg.window is not None else [-3, 3, -3, 3], 2)
    grid = rasterize_amoeba_2d(f, win, cfg.res or 101, cfg.angles or 360, cfg.tol("tol_radial", DEFAULT_TOL_RADIAL))
    out.grid("amoeba", grid)
    out.scene("amoeba", SceneSpec((Panel(win, (GridLayer(grid),), "amoeba", ("x1", "x2")),)))
    return out.metrics(cfg, {"occupied": grid.count(), "cells": int(np.prod(grid.resolution)),
                             "complement_components": complement_components(grid)})


def _contour(cfg: ScenarioConfig, out: OutputDir) -> dict:
    f = parse_polynomial(cfg.poly or "1 + z + w", 2)
    win = parse_window(cfg.window if cfg.window is not None else [-3, 3, -3, 3], 2)
    cc = contour_cloud(f, win, cfg.res or 200, cfg.angles)
    out.text("contour.csv", aio.contour_csv(cc))
    out.scene("contour", SceneSpec((Panel(win, (PointsLayer(cc.logs, PALETTE["contour"], 1),), "contour",
                                          ("x1", "x2")),)))
    return out.metrics(cfg, {"contour_count": len(cc), "grid": cc.grid})


def _pinch(cfg: ScenarioConfig, out: OutputDir) -> dict:
    pr = locate_pinch(parse_curve(cfg.curve or HYPERBOLA_CURVE))
    m = out.metrics(cfg, {"r_star": pr.r_star, "osc": pr.osc_star, "x": pr.x_pinch})
    sys.stdout.write(aio.dumps_json({k: m[k] for k in ("r_star", "osc", "x")}))
    return m


def _basis_gap(cfg: ScenarioConfig, out: OutputDir) -> dict:
    curve = parse_curve(cfg.curve or FIG1_CURVE)
    gens = [parse_polynomial(g, curve.ambient_dim) for g in (cfg.generators or FIG1_GENERATORS)]
    n = curve.ambient_dim
    win = parse_window(cfg.window if cfg.window is not None else [-4, 4] * n, n)
    rep = basis_gap_report(curve, gens, win, cfg.res or 64, seed=cfg.seed, M=cfg.angles or 360)
    out.text("report.json", aio.dumps_json(rep.as_json()))
    return out.metrics(cfg, rep.as_json())


TOOL_RUNNERS = {"classify": _classify, "raster": _raster, "contour": _contour, "pinch": _pinch,
                "basis-gap": _basis_gap}


# values that often start with '-' and would otherwise be read as options
_LIST_OPTIONS = ("--window", "--point")


def _join_list_values(argv: list) -> list:
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_list_values(argv))
    if args.command == "scenario":
        cfg = _config(args, args.name, True)
        m = run_scenario(cfg)
    elif args.command in TOOL_RUNNERS:
        if args.name:
            raise ValidationError(f"unexpected argument {args.name!r}")
        cfg = _config(args, args.command, False)
        m = TOOL_RUNNERS[args.command](cfg, OutputDir(cfg.out))
    else:
        if args.name:
            raise ValidationError(f"unexpected argument {args.name!r}")
        cfg = _config(args, args.command, True)
        m = run_scenario(cfg)
    print(f"{cfg.scenario}: wrote {len(m['files'])} files to {cfg.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    try:
        code = run(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    except NumericFailure as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 3
    return code


if __name__ == "__main__":
    sys.exit(main())
