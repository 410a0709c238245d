"""Command-line orchestration.

Subcommands: ``generate``, ``solve``, ``split``, ``evaluate``, ``render``.
Exit codes: 0 success, 1 IO/usage error, 2 partial generation failure,
3 solver failure, 4 split-name conflict, 5 prediction/dataset alignment
failure. Every subcommand is deterministic given its flags and seed, and no
subcommand mutates an existing record file.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import fea, metrics, render, sgfio
from .casefile import load_case_file
from .encoding import encode_case
from .errors import (
    NumericalError,
    SplitConflictError,
    StressforgeError,
    UnderConstrainedError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL_GENERATION = 2
EXIT_SOLVER = 3
EXIT_SPLIT_CONFLICT = 4
EXIT_ALIGNMENT = 5

WORKERS_ENV = "STRESSFORGE_WORKERS"

CHANNEL_CHOICES = sgfio.CHANNEL_NAMES + ("all",)


def _default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_generate(args) -> int:
    if args.family == "fine":
        config = ds.GenerationConfig.fine(args.seed, normalization=args.normalize)
    else:
        config = ds.GenerationConfig.coarse(args.seed, normalization=args.normalize)
    workers = args.workers if args.workers else _default_workers()
    started = time.perf_counter()
    manifest, summary = ds.generate_dataset(config, args.out, name=args.name,
                                            limit=args.limit, workers=workers)
    elapsed = time.perf_counter() - started
    print(f"generated {summary.n_written} records "
          f"({summary.n_failed} failures) in {elapsed:.1f}s -> {args.out}")
    for case_id, message in summary.failures:
        print(f"  failed case {case_id}: {message}", file=sys.stderr)
    return EXIT_PARTIAL_GENERATION if summary.failures else EXIT_OK


def cmd_solve(args) -> int:
    case, material = load_case_file(args.case)
    try:
        stress = fea.solve_case(case, material)
    except (UnderConstrainedError, NumericalError) as exc:
        return _fail(f"solver failure: {exc}", EXIT_SOLVER)
    stack = encode_case(case, stress)
    planes = np.stack([
        stack.geom_bc.astype(np.float32),
        stack.load_x.astype(np.float32),
        stack.load_y.astype(np.float32),
        stack.target.astype(np.float32),
    ])
    with sgfio.RecordWriter(args.out, case.mesh.m, sgfio.DATASET_CHANNELS) as writer:
        writer.write(args.case_id, planes)
    print(f"solved case -> {args.out} "
          f"(peak von Mises {float(stack.target.max()):.6g} MPa)")
    if args.render_dir:
        render_dir = Path(args.render_dir)
        render_dir.mkdir(parents=True, exist_ok=True)
        for name, channel in zip(sgfio.CHANNEL_NAMES, planes):
            render.render_channel(channel, render_dir / f"{name}.png",
                                  colormap=args.colormap, scale=args.scale)
        print(f"rendered channels -> {render_dir}")
    return EXIT_OK


def cmd_split(args) -> int:
    _, manifest_path = sgfio.dataset_paths(args.data)
    manifest = sgfio.DatasetManifest.load(manifest_path)
    if args.mode == "random":
        if args.seed is None:
            return _fail("--seed is required for random splits", EXIT_USAGE)
        train, test = ds.split_random(manifest, args.ratio, args.seed)
    else:
        train, test = ds.split_generalization(manifest, args.mode, seed=args.seed)
    name = args.name or args.mode
    try:
        manifest.add_split(name, train, test)
    except SplitConflictError as exc:
        return _fail(str(exc), EXIT_SPLIT_CONFLICT)
    manifest.save(manifest_path)
    print(f"split {name!r}: {len(train)} train / {len(test)} test")
    return EXIT_OK


def _load_truth_fields(directory, split=None, side="test"):
    manifest, records = sgfio.read_dataset(directory)
    vm_index = sgfio.CHANNEL_NAMES.index("von_mises")
    fields = {record.case_id: record.channels[vm_index] for record in records}
    if split is not None:
        wanted = manifest.split_ids(split, side)
        fields = {case_id: fields[case_id] for case_id in wanted}
    return fields


def cmd_evaluate(args) -> int:
    truth = _load_truth_fields(args.data, args.split, args.side)
    header, records = sgfio.read_records(args.pred)
    predictions = {record.case_id: record.channels[-1] for record in records}
    missing = sorted(set(truth) - set(predictions))
    if missing:
        shown = ", ".join(str(i) for i in missing[:20])
        more = "" if len(missing) <= 20 else f" (+{len(missing) - 20} more)"
        return _fail(f"{len(missing)} cases missing from predictions: {shown}{more}",
                     EXIT_ALIGNMENT)
    report = metrics.aggregate([
        metrics.evaluate_case(case_id, truth[case_id], predictions[case_id])
        for case_id in sorted(truth)
    ])
    if args.out_json:
        metrics.report_to_json(report, args.out_json)
    if args.out_csv:
        metrics.report_to_csv(report, args.out_csv)
    print(report.summary_line())
    return EXIT_OK


def cmd_render(args) -> int:
    found = None
    for _, record in sgfio.iter_records(args.records):
        if record.case_id == args.case_id:
            found = record
            break
    if found is None:
        return _fail(f"case id {args.case_id} not found in {args.records}", EXIT_USAGE)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = sgfio.CHANNEL_NAMES[:found.channels.shape[0]]
    wanted = names if args.channel == "all" else (args.channel,)
    for name in wanted:
        if name not in names:
            return _fail(f"record has no channel {name!r}", EXIT_USAGE)
        lo, hi = render.render_channel(found.channels[names.index(name)],
                                       out_dir / f"case{args.case_id}_{name}.png",
                                       colormap=args.colormap, scale=args.scale)
        print(f"{name}: range [{lo:.6g}, {hi:.6g}] -> case{args.case_id}_{name}.png")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stressforge",
        description="Generate, solve, split, evaluate, and render plane-stress "
                    "von Mises datasets on regular grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate and solve a dataset family")
    p.add_argument("--family", choices=("fine", "coarse"), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalize", choices=("unit", "passthrough"), default=None,
                   help="load normalization (default: unit for fine, passthrough for coarse)")
    p.add_argument("--limit", type=int, default=None,
                   help="solve only the first N cases of the enumeration")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or logical cores)")
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve a single case description file")
    p.add_argument("--case", required=True, help="path to a case JSON file")
    p.add_argument("--out", required=True, help="output record file")
    p.add_argument("--case-id", type=int, default=0)
    p.add_argument("--render-dir", default=None)
    p.add_argument("--colormap", default=render.DEFAULT_COLORMAP)
    p.add_argument("--scale", type=int, default=4)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("split", help="add a named split to a dataset manifest")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--mode", choices=("random",) + ds.GENERALIZATION_MODES, required=True)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--name", default=None, help="split name (default: mode)")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", help="score a prediction file against a dataset")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--pred", required=True, help="prediction record file")
    p.add_argument("--split", default=None)
    p.add_argument("--side", choices=("train", "test"), default="test")
    p.add_argument("--out-json", default=None)
    p.add_argument("--out-csv", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="render record channels to PNG heatmaps")
    p.add_argument("--records", required=True)
    p.add_argument("--case-id", type=int, required=True)
    p.add_argument("--channel", choices=CHANNEL_CHOICES, default="all")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--colormap", default=render.DEFAULT_COLORMAP)
    p.add_argument("--scale", type=int, default=4)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    # fill defaults for generate's family-dependent normalization
    if args.command == "generate" and args.normalize is None:
        args.normalize = "unit" if args.family == "fine" else "passthrough"
    try:
        return args.func(args)
    except (UnderConstrainedError, NumericalError) as exc:
        return _fail(f"solver failure: {exc}", EXIT_SOLVER)
    except SplitConflictError as exc:
        return _fail(str(exc), EXIT_SPLIT_CONFLICT)
    except StressforgeError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except OSError as exc:
        return _fail(str(exc), EXIT_USAGE)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
