"""Command-line front end: ``gradtac <subcommand> [flags]``.

Exit status is 0 on success, 1 for usage errors and 2 for data errors;
errors go to standard error prefixed with ``error:``.  Every PATH may be
``-`` for standard input or output.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .contour import extract_contours
from .errors import GradtacError
from .geometry import PipelineConfig, default_layout, load_layout
from .pipeline import Pipeline
from .synth import PATH_KINDS, synth_frames, tracking_scenario

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(kind):
    def parse(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if not (x > 0 and math.isfinite(x)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return x

    return parse


def _non_negative_int(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return x


def _grid(text):
    try:
        c, r = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 64x48, got {text!r}") from None
    if c < 8 or r < 8:
        raise argparse.ArgumentTypeError("grid must be at least 8x8")
    return c, r


def _shared():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--layout", metavar="PATH", help="sensor layout JSON (default: $GRADTAC_LAYOUT, else the built-in layout)")
    p.add_argument("--tau", type=_positive(float), default=0.01, help="log-change event threshold")
    p.add_argument("--window-ms", type=_positive(float), default=50.0, help="aggregation window in milliseconds")
    p.add_argument("--grid", type=_grid, default=(64, 48), metavar="CxR", help="surface raster, e.g. 64x48")
    p.add_argument("--levels", type=int, default=10, help="number of contour levels (>= 2)")
    p.add_argument("--min-events", type=_non_negative_int, default=3, help="events a window needs to count as contact")
    p.add_argument("--seed", type=_non_negative_int, default=0)
    p.add_argument("--out", metavar="PATH", default="-", help="output file (default: standard output)")
    return p


def build_parser():
    shared = _shared()
    parser = _Parser(prog="gradtac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[shared], help="synthesize a tracking sweep: taxel CSV (+ ground truth)")
    p.add_argument("--kind", choices=PATH_KINDS, default="left-to-right")
    p.add_argument("--duration", type=_positive(float), default=1.0)
    p.add_argument("--force", type=_positive(float), default=4.0)
    p.add_argument("--radius", type=_positive(float), default=1.0)
    p.add_argument("--snr-db", type=float, default=20.0)
    p.add_argument("--truth", metavar="PATH", help="also write the ground-truth CSV here")

    for name, helptext in (
        ("events", "taxel CSV -> events CSV"),
        ("track", "taxel CSV -> trajectory CSV (+ SVG)"),
    ):
        p = sub.add_parser(name, parents=[shared], help=helptext)
        p.add_argument("input", nargs="?", default="-", metavar="PATH")
        p.add_argument("--carry-over", action="store_true", help="keep sub-threshold log change between packets")
        if name == "track":
            p.add_argument("--svg", metavar="PATH", help="also draw the trajectory")

    p = sub.add_parser("contours", parents=[shared], help="events CSV -> per-window contours CSV (+ trajectory, SVGs)")
    p.add_argument("input", nargs="?", default="-", metavar="PATH")
    p.add_argument("--trajectory", metavar="PATH", help="also write the trajectory CSV")
    p.add_argument("--svg-dir", metavar="DIR", help="write one SVG per non-empty window")

    p = sub.add_parser("slip", parents=[shared], help="classify slip from two trajectory CSVs")
    p.add_argument("traj_a", metavar="TRAJ_A")
    p.add_argument("traj_b", metavar="TRAJ_B")
    p.add_argument("--mount-a", type=float, default=0.0, metavar="DEG", help="in-plane mounting angle of sensor A")
    p.add_argument("--mount-b", type=float, default=0.0, metavar="DEG", help="in-plane mounting angle of sensor B")
    p.add_argument("--flip-a", action="store_true", help="mirror sensor A's u axis")
    p.add_argument("--flip-b", action="store_true", help="mirror sensor B's u axis")
    p.add_argument("--theta", type=float, default=0.5, help="cosine threshold for direction agreement")
    p.add_argument("--v-thresh", type=_positive(float), default=2.0, help="slip speed threshold, mm/s")
    p.add_argument("--k-sustain", type=_positive(int), default=3, help="consecutive fast windows required")

    p = sub.add_parser("force", parents=[shared], help="fit force from contour area; prints MAP")
    p.add_argument("trajectory", metavar="TRAJ")
    p.add_argument("truth", metavar="TRUTH", help="ground-truth CSV with a force column")
    p.add_argument("--method", choices=("poly-ls", "huber", "mlp"), default="huber")
    p.add_argument("--degree", type=_positive(int), default=1)
    p.add_argument("--holdout", type=float, default=0.25, help="fraction of samples kept for testing")

    p = sub.add_parser("servo-sim", parents=[shared], help="edge-following simulation; world trajectory CSV")
    p.add_argument("--shape", choices=("circle", "triangle", "spiral", "zig-zag"), default="circle")
    p.add_argument("--size", type=_positive(float), default=30.0)
    p.add_argument("--steps", type=_positive(int), default=200)
    p.add_argument("--dt", type=_positive(float), default=0.1)
    p.add_argument("--kp", type=float, default=0.5)
    p.add_argument("--vf", type=float, default=10.0)
    p.add_argument("--footprint", type=_positive(float), default=5.0)
    return parser


# -- plumbing ----------------------------------------------------------------


def _read(path):
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _layout(args):
    path = args.layout or os.environ.get("GRADTAC_LAYOUT")
    if not path:
        return default_layout()
    return load_layout(_read(path))


def _config(args, **extra):
    if args.levels < 2:
        raise UsageError("--levels must be at least 2")
    cols, rows = args.grid
    return PipelineConfig(
        tau=args.tau,
        agg_window=args.window_ms / 1000.0,
        grid_cols=cols,
        grid_rows=rows,
        contour_levels=args.levels,
        min_events=args.min_events,
        **extra,
    )


def _csv_time(stream):
    # the exact timestamps an events CSV would carry, so `track` and
    # `events | contours` agree to the last bit
    return io.read_events_csv(io.write_events_csv(stream), tau=stream.tau)


def _events(args, pipeline):
    frames, n = io.read_taxel_csv(_read(args.input))
    if n != pipeline.layout.taxel_count:
        from .errors import CountError

        raise CountError(f"recording has {n} taxels but the layout has {pipeline.layout.taxel_count}")
    return _csv_time(pipeline.events(frames))


# -- subcommands -------------------------------------------------------------


def cmd_synth(args):
    lay = _layout(args)
    snr = None if args.snr_db == float("inf") else args.snr_db
    sc = tracking_scenario(args.kind, lay, duration=args.duration, force=args.force, radius=args.radius, snr_db=snr)
    frames, truth = synth_frames(sc, seed=args.seed)
    _write(args.out, io.write_taxel_csv(frames))
    if args.truth:
        _write(args.truth, io.write_ground_truth_csv(truth))


def cmd_events(args):
    p = Pipeline(_layout(args), _config(args, carry_over=args.carry_over))
    _write(args.out, io.write_events_csv(_events(args, p)))


def cmd_track(args):
    p = Pipeline(_layout(args), _config(args, carry_over=args.carry_over))
    traj = p.track_events(_events(args, p), t0=0.0)
    _write(args.out, io.write_trajectory_csv(traj))
    if args.svg and traj.contact_points():
        _write(args.svg, io.emit_svg(traj, box=p.layout.bounds))


def cmd_contours(args):
    p = Pipeline(_layout(args), _config(args))
    stream = io.read_events_csv(_read(args.input))
    if len(stream) and stream.taxels.max() >= p.layout.taxel_count:
        from .errors import CountError

        raise CountError(f"events reference taxel {stream.taxels.max()} but the layout has {p.layout.taxel_count}")
    frames = p.event_frames(stream, t0=0.0)
    items = []
    for fr, surf in p.surfaces(frames):
        cs = extract_contours(surf, p.config.contour_levels)
        items.append((fr.window_start, cs))
        if args.svg_dir and not cs.empty:
            d = Path(args.svg_dir)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"window_{fr.window_start:012.6f}.svg").write_text(io.emit_svg(cs, box=surf.domain), encoding="utf-8")
    _write(args.out, io.write_contours_csv(items))
    if args.trajectory:
        _write(args.trajectory, io.write_trajectory_csv(p.track_events(stream, t0=0.0)))


def cmd_slip(args):
    from .tasks import MountingTransform, classify_slip

    ta = io.read_trajectory_csv(_read(args.traj_a))
    tb = io.read_trajectory_csv(_read(args.traj_b))
    mounts = (
        MountingTransform.rotation(math.radians(args.mount_a), args.flip_a),
        MountingTransform.rotation(math.radians(args.mount_b), args.flip_b),
    )
    rep = classify_slip(ta, tb, mounts, theta=args.theta, v_thresh=args.v_thresh, k_sustain=args.k_sustain)
    _write(args.out, rep.to_text())


def _read_truth(text):
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != "timestamp,cu,cv,force,contact":
        from .errors import HeaderMismatch

        raise HeaderMismatch("expected ground-truth header 'timestamp,cu,cv,force,contact'")
    rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return rows[:, 0], rows[:, 3]


def cmd_force(args):
    from .tasks import ForceSample, fit_force_model, map_error

    traj = io.read_trajectory_csv(_read(args.trajectory))
    t, f = _read_truth(_read(args.truth))
    half = args.window_ms / 2000.0
    pts = [p for p in traj.contact_points()]
    force = np.interp([p.window_start + half for p in pts], t, f)
    samples = [ForceSample(p.area, y) for p, y in zip(pts, force) if y > 0]
    if not 0.0 <= args.holdout < 1.0:
        raise UsageError("--holdout must lie in [0, 1)")
    rng = np.random.default_rng(args.seed)
    order = rng.permutation(len(samples))
    n_test = int(round(args.holdout * len(samples)))
    test = [samples[i] for i in order[:n_test]]
    train = [samples[i] for i in order[n_test:]]
    model = fit_force_model(train, args.method, degree=args.degree, seed=args.seed)
    lines = [model.summary().rstrip("\n"), f"train_samples={len(train)}"]
    lines.append(f"train_map={map_error([s.force for s in train], model.predict([s.area for s in train])):.6f}")
    if test:
        lines.append(f"test_samples={len(test)}")
        lines.append(f"test_map={map_error([s.force for s in test], model.predict([s.area for s in test])):.6f}")
    _write(args.out, "\n".join(lines) + "\n")


def cmd_servo(args):
    from .tasks import EdgeWorld, simulate_edge_tracking

    world = EdgeWorld.for_shape(
        args.shape, size=args.size, layout=_layout(args), k_p=args.kp, v_f=args.vf, footprint_radius=args.footprint
    )
    rows = simulate_edge_tracking(world, _config(args), steps=args.steps, dt=args.dt, seed=args.seed)
    _write(args.out, io.write_world_csv(rows))


COMMANDS = {
    "synth": cmd_synth,
    "events": cmd_events,
    "track": cmd_track,
    "contours": cmd_contours,
    "slip": cmd_slip,
    "force": cmd_force,
    "servo-sim": cmd_servo,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        print("usage: gradtac {synth,events,contours,track,slip,force,servo-sim} [flags]; see --help", file=sys.stderr)
        return 1
    except (GradtacError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
