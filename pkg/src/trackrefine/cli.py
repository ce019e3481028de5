"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error. Errors go to standard
error prefixed with ``error[usage]:`` or ``error[data]:``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import STAGES, ConfigError
from .core import InvalidInputError, NumericalError, validate
from .io import ParseError, load_config, read_track_file, write_trace, write_track_file
from .pipeline import run_pipeline
from .synth import STANDARD_CORRUPTION, CorruptionSpec, corrupt, generate, score

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trackrefine", description="Offline refinement of 3D tracking results.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="refine one scene from one or more tracker outputs")
    run.add_argument("--input", action="append", default=[], metavar="FILE",
                     help="tracker output file; repeat for multiple trackers")
    run.add_argument("--config", metavar="FILE", help="YAML or JSON pipeline config")
    run.add_argument("--output", required=True, metavar="FILE")
    run.add_argument("--trace", metavar="DIR", help="write one JSONL decision log per stage")
    for stage in STAGES:
        run.add_argument(f"--no-{stage.replace('_', '-')}", dest=f"no_{stage}",
                         action="store_true", help=f"disable the {stage} stage")

    syn = sub.add_parser("synth", help="generate a ground-truth scene and corrupted tracker outputs")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--objects", type=int, default=10)
    syn.add_argument("--frames", type=int, default=40)
    syn.add_argument("--trackers", type=int, default=2)
    syn.add_argument("--clean", action="store_true", help="emit uncorrupted copies of the ground truth")
    syn.add_argument("--out-dir", required=True, metavar="DIR")

    sc = sub.add_parser("score", help="score a prediction against ground truth")
    sc.add_argument("--pred", required=True, metavar="FILE")
    sc.add_argument("--gt", required=True, metavar="FILE")
    sc.add_argument("--gate", type=float, default=0.5, help="BEV IoU match gate")

    val = sub.add_parser("validate", help="check track files for contract violations")
    val.add_argument("files", nargs="+", metavar="FILE")
    return parser


def _cmd_run(args) -> int:
    if not args.input:
        raise UsageError("run: at least one --input is required")
    cfg = load_config(args.config)
    disabled = [s for s in STAGES if getattr(args, f"no_{s}")]
    if disabled:
        cfg = cfg.with_stages(*disabled, enabled=False)
    inputs = [read_track_file(p) for p in args.input]
    trace: dict[str, list] | None = {} if args.trace else None
    warnings: list = []
    result = run_pipeline(inputs, cfg, trace=trace, warnings=warnings)
    write_track_file(result, args.output)
    for w in warnings:
        print(f"warning[solver]: tracklet {w['id']} frame {w['frame']}: {w['reason']}",
              file=sys.stderr)
    if trace is not None:
        trace.setdefault("local_refine", []).extend(warnings)
        write_trace(args.trace, {s: trace.get(s, []) for s in cfg.stage_sequence()})
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.objects < 1 or args.frames < 2 or args.trackers < 1:
        raise UsageError("synth: --objects and --trackers must be >= 1, --frames >= 2")
    scene = generate(args.seed, args.objects, args.frames)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_track_file(scene.gt, out / "gt.json")
    spec = CorruptionSpec() if args.clean else STANDARD_CORRUPTION
    for j in range(args.trackers):
        noisy = corrupt(scene, spec, args.seed * 7 + j + 1, f"tracker{j}")
        write_track_file(noisy.output, out / f"tracker{j}.json")
    return EXIT_OK


def _cmd_score(args) -> int:
    if not 0.0 < args.gate <= 1.0:
        raise UsageError("score: --gate must be in (0, 1]")
    pred, gt = read_track_file(args.pred), read_track_file(args.gt)
    try:
        metrics = score(pred, gt, args.gate)
    except ValueError as exc:
        raise InvalidInputError(str(exc)) from None
    print(json.dumps(metrics.as_dict(), sort_keys=True))
    return EXIT_OK


def _cmd_validate(args) -> int:
    bad = 0
    for path in args.files:
        problems = validate(read_track_file(path))
        for p in problems:
            print(f"error[data]: {path}: {p}", file=sys.stderr)
        bad += bool(problems)
    return EXIT_DATA if bad else EXIT_OK


_COMMANDS = {"run": _cmd_run, "synth": _cmd_synth, "score": _cmd_score, "validate": _cmd_validate}


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(_COMMANDS))
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error[data]: config: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ParseError, InvalidInputError, NumericalError, OSError) as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(cli_main())
