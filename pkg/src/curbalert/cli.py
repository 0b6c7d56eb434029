"""Command-line entry points for every capability.

Subcommands: beep, sonify, simulate, metrics, pipeline, serve. All accept
--config (the shared JSON camera/zone/world document) and --seed.
"""

from __future__ import annotations

import argparse
import asyncio
import dataclasses
import json
import sys
from pathlib import Path

from . import audio, report
from .config import load_config
from .experiment import (
    Condition,
    DimensionMismatch,
    EmptyGroundTruth,
    EmptyUnion,
    ExperimentConfig,
    iou,
    pixel_accuracy,
    results_to_csv,
    run_experiment,
)
from .geometry import classify_distance
from .mask import read_pgm, write_pgm
from .pipeline import OrientationMode, run_offline
from .server import SessionSettings, run_server


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return 2


def _cmd_beep(args) -> int:
    cfg = load_config(args.config)
    level = classify_distance(cfg.zones, args.distance_cm)
    if not level.is_alert:
        return _fail("no alert zone")
    spec = audio.beep_params(level, args.distance_cm)
    clip = audio.synth_beep(spec, args.sample_rate)
    audio.write_wav(clip, args.out)
    print(json.dumps(dataclasses.asdict(spec)))
    return 0


def _cmd_sonify(args) -> int:
    if (args.angle is None) == (args.image is None):
        return _fail("pass exactly one of --angle or --image")
    try:
        if args.angle is not None:
            img = audio.orientation_image(args.angle)
        else:
            img = read_pgm(args.image).pixels
    except (audio.BadAngle, ValueError, OSError) as err:
        return _fail(str(err))
    if args.save_image is not None:
        write_pgm(img, args.save_image)
    clip = audio.sonify_image(img, sample_rate=args.sample_rate)
    if args.pan_sweep is not None:
        try:
            start, end = (float(v) for v in args.pan_sweep.split(":"))
        except ValueError:
            return _fail("--pan-sweep expects START:END, e.g. -1:1")
        clip = audio.spatialize(clip, audio.pan_sweep_gains(clip.samples.size, start, end))
    audio.write_wav(clip, args.out)
    return 0


def _parse_conditions(text: str) -> tuple[Condition, ...]:
    if text == "all":
        return tuple(Condition)
    return tuple(Condition(part.strip()) for part in text.split(","))


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    exp = ExperimentConfig(
        camera=cfg.camera,
        zones=cfg.zones,
        band_width_cm=cfg.world.band_width_cm,
        start_distance_cm=cfg.world.start_distance_cm,
        speed_cm_s=args.speed_cm_s,
        tick_s=args.tick_s,
        sigma_deg=args.sigma_deg,
        cane_reach_cm=args.cane_reach_cm,
        reaction_delay_s=args.reaction_delay_s,
    )
    try:
        conditions = _parse_conditions(args.conditions)
        approaches = tuple(float(a) for a in args.approaches.split(","))
        rows = run_experiment(conditions, approaches, args.trials, args.seed, exp)
    except ValueError as err:
        return _fail(str(err))
    out = Path(args.out)
    out.write_text(results_to_csv(rows))
    failed = sum(1 for r in rows if r.result is None)
    print(f"wrote {len(rows)} trials to {out}" + (f" ({failed} failed)" if failed else ""))
    if args.plot:
        for path in report.save_experiment_figures(rows, out.parent):
            print(f"wrote {path}")
    return 0


def _cmd_metrics(args) -> int:
    try:
        pred = read_pgm(args.pred)
        gt = read_pgm(args.gt)
        result = {"pixel_accuracy": pixel_accuracy(pred, gt), "iou": iou(pred, gt)}
    except (DimensionMismatch, EmptyGroundTruth, EmptyUnion, ValueError, OSError) as err:
        return _fail(str(err))
    print(json.dumps(result))
    return 0


def _cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    try:
        result = run_offline(
            args.mask_dir,
            args.out_wav,
            args.out_log,
            camera=cfg.camera,
            zones=cfg.zones,
            mode=OrientationMode(args.mode),
            tick_hz=args.tick_hz,
            sample_rate=args.sample_rate,
        )
    except (ValueError, OSError) as err:
        return _fail(str(err))
    print(f"{result.n_frames} frames, {len(result.events)} events -> {result.wav_path}, {result.log_path}")
    return 0


def _cmd_serve(args) -> int:
    cfg = load_config(args.config)
    settings = SessionSettings(
        config=cfg,
        mode=OrientationMode(args.mode),
        tick_hz=args.tick_hz,
        sample_rate=args.sample_rate,
        speed_cm_s=args.speed_cm_s,
        manual_clock=args.manual_clock,
        event_log=args.event_log,
        dump_masks=args.dump_masks,
    )
    try:
        asyncio.run(run_server(settings, args.host, args.port))
    except KeyboardInterrupt:
        pass
    except OSError as err:
        return _fail(str(err))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curbalert",
        description="Curb alerting toolkit: beeps, sonification, simulation, metrics, session service.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON camera/zone/world config")
    common.add_argument("--seed", type=int, default=42, help="base random seed")
    common.add_argument("--sample-rate", type=int, default=audio.DEFAULT_SAMPLE_RATE)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("beep", parents=[common], help="classify a distance and render one beep")
    p.add_argument("--distance-cm", type=float, required=True)
    p.add_argument("--out", type=Path, required=True, help="output WAV path")
    p.set_defaults(func=_cmd_beep)

    p = sub.add_parser("sonify", parents=[common], help="sonify an orientation angle or a PGM image")
    p.add_argument("--angle", type=int, default=None, help="multiple of 5 in [0, 175]")
    p.add_argument("--image", type=Path, default=None, help="grayscale PGM to sonify")
    p.add_argument("--out", type=Path, required=True, help="output WAV path")
    p.add_argument(
        "--pan-sweep",
        nargs="?",
        const="-1:1",
        default=None,
        metavar="START:END",
        help="render stereo with a linear pan sweep (default -1:1)",
    )
    p.add_argument("--save-image", type=Path, default=None, help="also save the sonified image as PGM")
    p.set_defaults(func=_cmd_sonify)

    p = sub.add_parser("simulate", parents=[common], help="run the simulated experiment grid")
    p.add_argument("--conditions", default="all", help="'all' or comma list of condition names")
    p.add_argument("--approaches", default="0,30,60", help="comma list of approach angles")
    p.add_argument("--trials", type=int, default=10, help="repetitions per grid cell")
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    p.add_argument("--plot", action="store_true", help="write report figures next to the CSV")
    p.add_argument("--speed-cm-s", type=float, default=50.0)
    p.add_argument("--tick-s", type=float, default=0.05)
    p.add_argument("--sigma-deg", type=float, default=0.0)
    p.add_argument("--cane-reach-cm", type=float, default=100.0)
    p.add_argument("--reaction-delay-s", type=float, default=0.0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("metrics", parents=[common], help="pixel accuracy and IoU of two PGM masks")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--gt", type=Path, required=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("pipeline", parents=[common], help="render a mask directory offline")
    p.add_argument("--mask-dir", type=Path, required=True)
    p.add_argument("--out-wav", type=Path, required=True)
    p.add_argument("--out-log", type=Path, required=True)
    p.add_argument("--mode", choices=[m.value for m in OrientationMode], default="sonification")
    p.add_argument("--tick-hz", type=float, default=20.0)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("serve", parents=[common], help="run the interactive session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--mode", choices=[m.value for m in OrientationMode], default="sonification")
    p.add_argument("--tick-hz", type=float, default=20.0)
    p.add_argument("--speed-cm-s", type=float, default=50.0)
    p.add_argument("--event-log", type=Path, default=None, help="write the session event log here")
    p.add_argument("--dump-masks", type=Path, default=None, help="dump per-tick masks as PGMs")
    p.add_argument("--manual-clock", action="store_true", help="advance ticks on client 'step' messages")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
