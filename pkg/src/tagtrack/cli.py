"""Command-line entry point: simulate, track, evaluate, render, all."""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .io.csvutil import CsvFormatError
from .io.detections import (Prefetcher, load_detections, load_initial_boxes, write_detections,
                            write_initial_boxes)
from .metrics import clear_metrics, load_trajectories, write_trajectories
from .pipeline.config import ConfigError, load_config
from .pipeline.frames import iter_frames, list_frames, write_frame
from .pipeline.overlay import render_overlays, trajectory_plot
from .pipeline.run import run_sequence
from .pipeline.scenario import named_sequence
from .sim import canonical_name, describe

EXIT_CONFIG, EXIT_INPUT, EXIT_IO, EXIT_TRACKING = 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, category: str, message: str):
        super().__init__(message)
        self.code, self.category = code, category


def _common(p: argparse.ArgumentParser, scenario=False):
    p.add_argument("--config", help="INI file with [features] [tracker] [association] ... sections")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--workers", type=int, default=None, help="threads for per-track work")
    if scenario:
        p.add_argument("--scenario", default="clean", help="clean or S1'..S5'")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--frames", type=int, default=None, help="sequence length (default: preset's)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tagtrack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a synthetic scene with ground truth and detections")
    _common(p, scenario=True)
    p.add_argument("--no-frames", action="store_true", help="skip writing frame images")

    p = sub.add_parser("track", help="track a frame sequence from detections and initial boxes")
    _common(p)
    p.add_argument("--frames-dir", help="directory of numbered PNG frames")
    p.add_argument("--detections", help="frame,x,y,w,h,confidence CSV")
    p.add_argument("--init", help="id,x,y,w,h CSV of first-frame boxes")

    p = sub.add_parser("evaluate", help="score trajectories against ground truth")
    _common(p)
    p.add_argument("--gt", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--label", default="")

    p = sub.add_parser("render", help="draw boxes on frames and plot trajectories")
    _common(p)
    p.add_argument("--frames-dir", required=True)
    p.add_argument("--trajectories", required=True)
    p.add_argument("--tagboxes")
    p.add_argument("--plot", action="store_true", help="also write trajectories.png")

    p = sub.add_parser("all", help="simulate, track and evaluate in one go")
    _common(p, scenario=True)
    p.add_argument("--save-frames", action="store_true")
    return parser


def _config(args):
    overrides = list(args.overrides)
    if args.workers is not None:
        overrides.append(f"pipeline.workers={args.workers}")
    return load_config(args.config, overrides)


def _sequence(args, cfg):
    name = canonical_name(args.scenario)
    try:
        return named_sequence(name, args.seed, args.frames, cfg.scene, cfg.noise), name
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, "config", f"scenario {name}: {exc}") from None


def _write_sim(seq, out, with_frames):
    os.makedirs(out, exist_ok=True)
    write_trajectories(seq.ground_truth, os.path.join(out, "gt.csv"), seq.occlusion)
    write_detections(seq.detections, os.path.join(out, "detections.csv"))
    write_initial_boxes(seq.initial_boxes, os.path.join(out, "initial_boxes.csv"))
    with open(os.path.join(out, "scene.json"), "w", encoding="utf-8") as fh:
        json.dump({"scene": dataclasses.asdict(seq.scene), "noise": dataclasses.asdict(seq.noise)},
                  fh, indent=2, sort_keys=True)
    if with_frames:
        for t, frame in enumerate(seq.frames()):
            write_frame(frame, os.path.join(out, "frames"), t)


def _write_run(log, out):
    os.makedirs(out, exist_ok=True)
    write_trajectories(log.trajectories, os.path.join(out, "trajectories.csv"))
    write_trajectories(log.tag_boxes, os.path.join(out, "tagboxes.csv"))
    with open(os.path.join(out, "runlog.json"), "w", encoding="utf-8") as fh:
        fh.write(log.to_json())


def _write_report(report, out, label):
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "metrics.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    with open(os.path.join(out, "metrics.txt"), "w", encoding="utf-8") as fh:
        fh.write(report.table(label) + "\n")
    print(report.table(label))


def cmd_simulate(args):
    cfg = _config(args)
    seq, name = _sequence(args, cfg)
    _write_sim(seq, args.out, not args.no_frames)
    print(f"{name}: {describe(name)}; {len(seq)} frames, {len(seq.initial_boxes)} agents -> {args.out}")


def _run(frames, detections, initial, cfg, out):
    try:
        return run_sequence(frames, detections, initial, cfg)
    except Exception as exc:
        partial = getattr(exc, "run_log", None)
        if partial is not None and partial.timings:
            # flush what was tracked before the failure
            try:
                _write_run(partial, out)
            except OSError:
                pass
        if isinstance(exc, (OSError, CsvFormatError)):
            raise
        raise CliError(EXIT_TRACKING, "tracking", f"{type(exc).__name__}: {exc}") from exc


def cmd_track(args):
    cfg = _config(args)
    frames_dir = args.frames_dir or cfg.frames_dir
    det_path = args.detections or cfg.detections_path
    init_path = args.init or cfg.initial_boxes_path
    missing = [n for n, v in (("--frames-dir", frames_dir), ("--detections", det_path),
                              ("--init", init_path)) if v is None]
    if missing:
        raise CliError(EXIT_CONFIG, "config", f"missing {', '.join(missing)}")
    for path in (frames_dir, det_path, init_path):
        if not os.path.exists(path):
            raise CliError(EXIT_IO, "io", f"{path} does not exist")
    initial = load_initial_boxes(init_path)
    source = Prefetcher(load_detections(det_path))
    try:
        log = _run(iter_frames(frames_dir), source, initial, cfg, args.out)
    finally:
        source.close()
    _write_run(log, args.out)
    print(f"tracked {len(log.timings)} frames, {len(initial)} tracks -> {args.out}")


def cmd_evaluate(args):
    gt = load_trajectories(args.gt)
    hyp = load_trajectories(args.hyp)
    report = clear_metrics(gt, hyp, iou_threshold=args.iou)
    _write_report(report, args.out, args.label or "Sequence")


def cmd_render(args):
    trajectories = load_trajectories(args.trajectories)
    tags = load_trajectories(args.tagboxes) if args.tagboxes else None
    written = render_overlays(args.frames_dir, trajectories, os.path.join(args.out, "overlays"), tags)
    if args.plot:
        files = list_frames(args.frames_dir)
        from PIL import Image
        with Image.open(files[min(files)]) as im:
            size = im.size
        trajectory_plot(trajectories, size, os.path.join(args.out, "trajectories.png"))
    print(f"wrote {len(written)} frames -> {os.path.join(args.out, 'overlays')}")


def cmd_all(args):
    cfg = _config(args)
    seq, name = _sequence(args, cfg)
    _write_sim(seq, args.out, args.save_frames)
    log = _run(seq.frames(), seq.detections, seq.initial_boxes, cfg, args.out)
    _write_run(log, args.out)
    report = clear_metrics(seq.ground_truth, log.trajectories)
    _write_report(report, args.out, name)


COMMANDS = {"simulate": cmd_simulate, "track": cmd_track, "evaluate": cmd_evaluate,
            "render": cmd_render, "all": cmd_all}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, KeyError) as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CsvFormatError as exc:
        print(f"error[input]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, FileNotFoundError) as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error[input]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
