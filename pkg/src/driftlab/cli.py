"""Command-line front end: generate, detect, evaluate, sweep.

Exit codes: 0 success, 2 bad flags, 3 I/O failure, 4 malformed input line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from typing import Optional, Sequence

import numpy as np

from .evaluation import (
    DEFAULT_DELTAS,
    TRAIN_INSTANCES,
    DetectorSettings,
    SweepGrid,
    run_experiment,
    sweep,
    write_metrics,
)
from .network import load_network
from .press import PressDetector, Phase, drift_event_dict
from .streamgen import (
    PRESET_NAMES,
    ParseError,
    generate,
    paper_preset,
    read_truth,
    read_values,
    write_truth,
    write_values,
)

EXIT_FLAGS = 2
EXIT_IO = 3
EXIT_PARSE = 4


class FlagError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("DRIFTLAB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise FlagError(f"DRIFTLAB_SEED: not an integer: {raw!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _check(ok: bool, flag: str, message: str) -> None:
    if not ok:
        raise FlagError(f"{flag}: {message}")


def _check_detector_flags(args) -> None:
    _check(0 < args.delta < 1, "--delta", "must lie in (0, 1)")
    _check(0 <= args.beta <= 1, "--beta", "must lie in [0, 1]")
    _check(args.block_size >= 1, "--block-size", "must be >= 1")


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fp:
            yield fp


def _add_detector_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--detector", choices=("seed", "press"), default="press")
    p.add_argument("--delta", type=float, default=0.05, help="confidence level (default 0.05)")
    p.add_argument("--beta", type=float, default=0.4, help="PRESS beta (default 0.4)")
    p.add_argument("--block-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=None,
                   help="random seed (default: $DRIFTLAB_SEED or 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic stream and its ground truth")
    g.add_argument("--preset", choices=PRESET_NAMES, default="abrupt10")
    g.add_argument("--scale", type=float, default=1.0, help="fraction of 1M instances")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True, help="values file (one number per line)")
    g.add_argument("--truth", default=None, help="truth CSV (default: <out>.truth.csv)")
    g.add_argument("--train-instances", type=int, default=0,
                   help="extra leading instances for detector training")
    g.add_argument("--noise-sd", type=float, default=None)
    g.add_argument("--pattern-length", type=int, default=20, help="drifts per pattern stint")
    g.add_argument("--interval-spread", type=float, default=4.0,
                   help="ratio of longest to shortest mean interval")
    g.add_argument("--literal-intervals", action="store_true",
                   help="20-instance mean interval (50k drifts per 1M instances)")

    d = sub.add_parser("detect", help="run a detector over a values file")
    d.add_argument("--input", required=True)
    d.add_argument("--out", default=None, help="JSON-lines event log (default stdout)")
    _add_detector_flags(d)
    d.add_argument("--aggregate", type=int, default=100,
                   help="average non-overlapping windows of this many values first")
    d.add_argument("--train-fraction", type=float, default=0.5,
                   help="leading fraction PRESS learns on before predicting")
    d.add_argument("--network-in", default=None,
                   help="start PRESS predicting with this saved network")
    d.add_argument("--network-out", default=None, help="save the PRESS network here")

    e = sub.add_parser("evaluate", help="score a detector against ground truth")
    e.add_argument("--values", required=True)
    e.add_argument("--truth", required=True)
    _add_detector_flags(e)
    e.add_argument("--train-instances", type=int, default=0,
                   help="leading instances used for training, excluded from metrics")
    e.add_argument("--out-json", default=None, help="metrics JSON (default stdout)")
    e.add_argument("--out-csv", default=None)
    e.add_argument("--log", default=None, help="JSON-lines detection log")

    s = sub.add_parser("sweep", help="multi-seed grid over delta and beta")
    s.add_argument("--preset", choices=PRESET_NAMES, default="abrupt10")
    s.add_argument("--scale", type=float, default=0.1)
    s.add_argument("--detector", choices=("seed", "press"), default="press")
    s.add_argument("--deltas", type=_float_list, default=list(DEFAULT_DELTAS))
    s.add_argument("--betas", type=_float_list, default=[0.4])
    s.add_argument("--runs", type=int, default=10)
    s.add_argument("--seed", type=int, default=None, help="base seed; run r uses seed + r")
    s.add_argument("--train-instances", type=int, default=TRAIN_INSTANCES)
    s.add_argument("--block-size", type=int, default=32)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out-json", default=None, help="report JSON (default stdout)")
    s.add_argument("--out-csv", default=None)
    return parser


def aggregate(values: Sequence[float], window: int) -> list[float]:
    """Means of consecutive non-overlapping windows; a partial tail is dropped."""
    if window == 1:
        return list(values)
    n = len(values) // window
    arr = np.asarray(values[: n * window], dtype=float).reshape(n, window)
    return [float(x) for x in arr.mean(axis=1)]


def cmd_generate(args) -> int:
    _check(0 < args.scale <= 1, "--scale", "must lie in (0, 1]")
    _check(args.train_instances >= 0, "--train-instances", "must be >= 0")
    _check(args.pattern_length >= 1, "--pattern-length", "must be >= 1")
    _check(args.interval_spread >= 1, "--interval-spread", "must be >= 1")
    seed = args.seed if args.seed is not None else _default_seed()
    spec = paper_preset(
        args.preset, args.scale, seed,
        literal_intervals=args.literal_intervals,
        train_instances=args.train_instances,
        interval_spread=args.interval_spread,
        pattern_length=args.pattern_length,
    )
    if args.noise_sd is not None:
        _check(args.noise_sd >= 0, "--noise-sd", "must be >= 0")
        spec.noise_sd = args.noise_sd
    values, truth = generate(spec)
    truth_path = args.truth or args.out + ".truth.csv"
    with _output(args.out) as fp:
        write_values(values, fp)
    with _output(truth_path) as fp:
        write_truth(truth, fp)
    print(f"instances={len(values)} drifts={len(truth)} patterns={spec.num_patterns}")
    return 0


def _read_values(path: str) -> list[float]:
    with open(path, encoding="utf-8") as fp:
        return read_values(fp, path)


def cmd_detect(args) -> int:
    _check_detector_flags(args)
    _check(args.aggregate >= 1, "--aggregate", "must be >= 1")
    _check(0 <= args.train_fraction < 1, "--train-fraction", "must lie in [0, 1)")
    seed = args.seed if args.seed is not None else _default_seed()
    values = aggregate(_read_values(args.input), args.aggregate)
    settings = DetectorSettings(
        kind=args.detector, delta=args.delta, beta=args.beta,
        block_size=args.block_size, random_seed=seed,
    )
    detector = settings.build()
    if args.detector == "seed":
        events = [drift_event_dict(e) for e in detector.feed(values)]
    else:
        assert isinstance(detector, PressDetector)
        raw = []
        if args.network_in:
            with open(args.network_in, encoding="utf-8") as fp:
                net, running_max = load_network(fp, detector.network.rng)
            detector.network = net
            detector.severity.running_max = running_max
            detector.switch_phase(Phase.PREDICTING)
        else:
            split = int(round(args.train_fraction * len(values)))
            if split:
                raw += detector.run(values[:split])
                detector.switch_phase(Phase.PREDICTING)
            values = values[split:]
        raw += detector.run(values)
        events = [e.to_dict() for e in raw]
        if args.network_out:
            with _output(args.network_out) as fp:
                json.dump(detector.export_network(), fp, indent=1)
                fp.write("\n")
    with _output(args.out) as fp:
        for event in events:
            fp.write(json.dumps(event) + "\n")
    return 0


def cmd_evaluate(args) -> int:
    _check_detector_flags(args)
    _check(args.train_instances >= 0, "--train-instances", "must be >= 0")
    seed = args.seed if args.seed is not None else _default_seed()
    values = _read_values(args.values)
    with open(args.truth, encoding="utf-8") as fp:
        truth = read_truth(fp, args.truth)
    _check(args.train_instances < len(values), "--train-instances",
           "must be smaller than the stream length")
    settings = DetectorSettings(
        kind=args.detector, delta=args.delta, beta=args.beta,
        block_size=args.block_size, random_seed=seed,
    )
    result = run_experiment(settings, values, truth, train_instances=args.train_instances)
    with _output(args.out_json) as fp:
        write_metrics(result, fp, None)
    if args.out_csv:
        with _output(args.out_csv) as fp:
            write_metrics(result, None, fp)
    if args.log:
        with _output(args.log) as fp:
            for t in result.detections:
                fp.write(json.dumps({"kind": "drift", "index": t}) + "\n")
    return 0


def cmd_sweep(args) -> int:
    _check(0 < args.scale <= 1, "--scale", "must lie in (0, 1]")
    _check(args.runs >= 1, "--runs", "must be >= 1")
    _check(bool(args.deltas) and all(0 < x < 1 for x in args.deltas), "--deltas",
           "values must lie in (0, 1)")
    _check(bool(args.betas) and all(0 <= x <= 1 for x in args.betas), "--betas",
           "values must lie in [0, 1]")
    _check(args.train_instances >= 0, "--train-instances", "must be >= 0")
    _check(args.workers >= 1, "--workers", "must be >= 1")
    base = args.seed if args.seed is not None else _default_seed()
    grid = SweepGrid(
        preset=args.preset, scale=args.scale, deltas=tuple(args.deltas),
        betas=tuple(args.betas), detector=args.detector, runs=args.runs,
        base_seed=base, train_instances=args.train_instances, block_size=args.block_size,
    )
    report = sweep(grid, workers=args.workers)
    with _output(args.out_json) as fp:
        report.write_json(fp)
    if args.out_csv:
        with _output(args.out_csv) as fp:
            report.write_csv(fp)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "detect": cmd_detect,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FlagError as exc:
        parser.print_usage(sys.stderr)
        print(f"driftlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except ParseError as exc:
        print(f"driftlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"driftlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
