"""provisim command line.

Subcommands:
    simulate        process one image through a config or preset
    batch           process a directory, writing a JSON run report
    charts          emit Landolt C or contrast-sensitivity chart PNGs
    presets         list the named pipeline presets
    trial serve     run the forced-choice trial HTTP service
    trial fixtures  generate the synthetic demo face corpus

Exit codes: 0 success, 1 partial per-file failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import charts, pipeline, tone
from .imagecore import ImageIOError, load_image, save_image
from .landmarks import LandmarkError, load_landmarks


def _parse_curve(text: str):
    """gamma:G or sigmoid:GAIN[:SHIFT]"""
    parts = text.split(":")
    try:
        if parts[0] == "gamma" and len(parts) == 2:
            return tone.GammaCurve(float(parts[1]))
        if parts[0] == "sigmoid" and len(parts) in (2, 3):
            shift = float(parts[2]) if len(parts) == 3 else tone.DEFAULT_SHIFT
            return tone.SigmoidCurve(float(parts[1]), shift)
    except ValueError as exc:
        raise pipeline.ConfigError(f"bad curve spec {text!r}: {exc}") from exc
    raise pipeline.ConfigError(f"bad curve spec {text!r} (gamma:G or sigmoid:GAIN[:SHIFT])")


def _load_config(args) -> pipeline.PipelineConfig:
    if args.config and args.preset:
        raise pipeline.ConfigError("give either --config or --preset, not both")
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise pipeline.ConfigError(f"cannot read config: {exc}") from exc
        return pipeline.PipelineConfig.from_json(text)
    if args.preset:
        curve = _parse_curve(args.curve) if args.curve else None
        return pipeline.preset_config(args.preset, curve=curve)
    raise pipeline.ConfigError("one of --config or --preset is required")


def _add_config_args(p):
    p.add_argument("--config", help="pipeline config JSON file")
    p.add_argument("--preset", help=f"named preset ({', '.join(pipeline.PRESET_NAMES)})")
    p.add_argument("--curve", help="tone curve override: gamma:G or sigmoid:GAIN[:SHIFT]")


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    lm = load_landmarks(args.landmarks) if args.landmarks else None
    color = load_image(args.inp)
    result = pipeline.simulate(color, cfg, lm=lm)
    save_image(result, args.out)
    print(f"wrote {args.out} (config {cfg.config_hash()[:12]})")
    return 0


def cmd_batch(args) -> int:
    cfg = _load_config(args)
    reports = pipeline.run_batch(args.inp, cfg, args.out, landmarks_dir=args.landmarks_dir)
    report_path = Path(args.out) / "report.json"
    report_path.write_text(
        json.dumps(pipeline.report_to_json_dict(reports), indent=2, sort_keys=True),
        encoding="utf-8",
    )
    failures = [r for r in reports if not r.ok]
    for r in reports:
        status = "ok" if r.ok else f"FAILED ({r.error})"
        print(f"{r.input_path}: {status}")
    print(f"{len(reports) - len(failures)}/{len(reports)} processed; report at {report_path}")
    return 1 if failures else 0


def cmd_charts_landolt(args) -> int:
    gaps = [float(g) for g in args.gaps.split(",")]
    if args.sheet:
        image = charts.landolt_sheet(
            gaps, grid_extent=args.grid_extent, raster_size=args.raster_size,
            invert=args.invert,
        )
    else:
        spec = charts.LandoltSpec(gaps[0], args.orientation, args.grid_extent, args.raster_size)
        image = charts.render_landolt(spec, invert=args.invert)
    save_image(image, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_charts_cr(args) -> int:
    fmin, fmax = (float(v) for v in args.freq.split(","))
    cmin, cmax = (float(v) for v in args.contrast.split(","))
    spec = charts.CampbellRobsonSpec(args.size, (fmin, fmax), (cmin, cmax), args.mean)
    save_image(charts.render_campbell_robson(spec), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_presets_list(_args) -> int:
    for name in pipeline.PRESET_NAMES:
        cfg = pipeline.preset_config(name)
        stages = " -> ".join(s.name for s in cfg.stages)
        print(f"{name:20s} {stages}")
    return 0


def cmd_trial_serve(args) -> int:
    import uvicorn

    from .trial.service import create_app

    app = create_app(args.data_dir, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_trial_fixtures(args) -> int:
    from .trial.fixtures import write_fixture_corpus

    manifest = write_fixture_corpus(args.out)
    print(f"wrote fixture corpus with manifest {manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="provisim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="process one image")
    _add_config_args(p)
    p.add_argument("--in", dest="inp", required=True, help="input image (PNG/PGM)")
    p.add_argument("--out", required=True, help="output image (PNG/PGM)")
    p.add_argument("--landmarks", help="landmark JSON for enhancement stages")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("batch", help="process a directory of images")
    _add_config_args(p)
    p.add_argument("--in", dest="inp", required=True, help="input directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--landmarks-dir", help="directory of <stem>.json landmark files")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("charts", help="generate chart stimuli")
    charts_sub = p.add_subparsers(dest="chart", required=True)

    pl = charts_sub.add_parser("landolt", help="Landolt C optotype")
    pl.add_argument("--gaps", default="1.2", help="gap width(s) in implant px, comma separated")
    pl.add_argument("--orientation", default="right", choices=charts.ORIENTATIONS)
    pl.add_argument("--grid-extent", type=float, default=charts.DEFAULT_GRID_EXTENT)
    pl.add_argument("--raster-size", type=int, default=0)
    pl.add_argument("--sheet", action="store_true", help="tile all gaps x orientations")
    pl.add_argument("--invert", action="store_true", help="white letter on black field")
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_charts_landolt)

    pc = charts_sub.add_parser("campbell-robson", help="contrast sensitivity chart")
    pc.add_argument("--size", type=int, default=512)
    pc.add_argument("--freq", default="2,50", help="min,max cycles/image")
    pc.add_argument("--contrast", default="0.01,1", help="min,max contrast")
    pc.add_argument("--mean", type=float, default=0.5)
    pc.add_argument("--out", required=True)
    pc.set_defaults(func=cmd_charts_cr)

    p = sub.add_parser("presets", help="named pipeline presets")
    presets_sub = p.add_subparsers(dest="action", required=True)
    pp = presets_sub.add_parser("list")
    pp.set_defaults(func=cmd_presets_list)

    p = sub.add_parser("trial", help="forced-choice trial service")
    trial_sub = p.add_subparsers(dest="action", required=True)
    ps = trial_sub.add_parser("serve")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8750)
    ps.add_argument("--data-dir", default="trial-data")
    ps.add_argument("--static-dir", help="built frontend to serve under /app")
    ps.set_defaults(func=cmd_trial_serve)
    pf = trial_sub.add_parser("fixtures")
    pf.add_argument("--out", required=True, help="corpus output directory")
    pf.set_defaults(func=cmd_trial_fixtures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except pipeline.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ImageIOError, LandmarkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
