"""Command-line entry point: ``movelets build-dict|classify|evaluate|synth|bench``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 domain validation
failure. Data goes to stdout (or ``--out``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import evaluation as ev
from .errors import InputError, LengthMismatch, MoveletError, SensorMismatch, SeriesTooShort
from .ingest import (
    CANONICAL_ACTIVITIES,
    _int_ms,
    _rows,
    align_labels,
    labels_at,
    load_series,
    parse_annotations,
    training_segments,
    write_annotations,
    write_sensor_csv,
)
from .movelet import Dictionary, MoveletConfig, build_dictionary, classify_series
from .sigcore import ALL_SENSORS, Representation, SensorKind, n_samples
from .synth import (
    boundary_segment,
    generate_session,
    load_models,
    load_script,
    script_segments,
    session_track,
)

CONFIG_KEYS = {
    "window_seconds",
    "train_seconds",
    "vote_seconds",
    "hz",
    "rep",
    "max_gap_ms",
    "activities",
    "format",
    "seed",
    "noise_sd",
    "workers",
    "repeat",
    "boundary_seconds",
}


def _sensor(text):
    try:
        return SensorKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _csv_list(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _add_movelet_flags(p, rep=True):
    p.add_argument("--window-seconds", dest="window_seconds", type=float, default=1.0)
    p.add_argument("--train-seconds", dest="train_seconds", type=float, default=4.0)
    p.add_argument("--vote-seconds", dest="vote_seconds", type=float, default=1.0)
    p.add_argument("--hz", type=float, default=10.0)
    if rep:
        p.add_argument("--rep", choices=[r.value for r in Representation], default="triaxial")
    p.add_argument("--max-gap-ms", dest="max_gap_ms", type=int, default=1000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="movelets",
        description="Movelet activity classification for phone accelerometer and gyroscope CSVs.",
    )
    parser.add_argument("--config", help="JSON file of flag defaults (keys use underscores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dict", help="build a movelet dictionary from labeled training data")
    p.add_argument("--train-csv", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--sensor", type=_sensor, required=True)
    p.add_argument("--activities", type=_csv_list, default=CANONICAL_ACTIVITIES)
    p.add_argument("--out", required=True)
    _add_movelet_flags(p)
    p.set_defaults(func=cmd_build_dict)

    p = sub.add_parser("classify", help="label every sample of a test recording")
    p.add_argument("--dict", dest="dict_path", required=True)
    p.add_argument("--test-csv", required=True)
    p.add_argument("--sensor", type=_sensor, help="defaults to the dictionary's sensor")
    p.add_argument("--max-gap-ms", dest="max_gap_ms", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="confusion report of predictions against ground truth")
    p.add_argument("--predictions", required=True)
    truth = p.add_mutually_exclusive_group(required=True)
    truth.add_argument("--annotations", help="interval annotation CSV")
    truth.add_argument("--truth", help="per-sample t_ms,true_label CSV")
    p.add_argument("--activities", type=_csv_list, default=None, help="trained activities, in table order")
    p.add_argument("--dict", dest="dict_path", help="take trained activities from this dictionary")
    p.add_argument("--format", choices=["csv", "md", "long"], default="md")
    p.add_argument("--exclude-segments", dest="exclude_segments")
    p.add_argument("--include-segments", dest="include_segments")
    p.add_argument("--distribution-segments", dest="distribution_segments")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="write a synthetic session from a protocol script")
    p.add_argument("--script", default="training-protocol", help="path or bundled script name")
    p.add_argument("--models", default=None, help="activity-model JSON (default: bundled)")
    p.add_argument("--sensor", type=_sensor, action="append", dest="sensors")
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-sd", dest="noise_sd", type=float)
    p.add_argument(
        "--boundary-seconds",
        dest="boundary_seconds",
        type=float,
        default=1.0,
        help="half-width of the step-change zones written to boundaries.json",
    )
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="classification throughput")
    p.add_argument("--dict", dest="dict_path", required=True)
    p.add_argument("--test-csv", required=True)
    p.add_argument("--sensor", type=_sensor, help="defaults to the dictionary's sensor")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-gap-ms", dest="max_gap_ms", type=int, default=1000)
    p.set_defaults(func=cmd_bench)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{known.config}: {exc}") from exc
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    if isinstance(cfg.get("activities"), list):
        cfg["activities"] = tuple(cfg["activities"])
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            own = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in cfg.items() if k in own})


def _movelet_config(args) -> MoveletConfig:
    return MoveletConfig(
        window_seconds=args.window_seconds,
        train_seconds=args.train_seconds,
        rep=Representation(args.rep),
        vote_horizon_seconds=args.vote_seconds,
        hz=args.hz,
    )


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_build_dict(args) -> int:
    cfg = _movelet_config(args)
    series = load_series(args.train_csv, args.sensor, cfg.hz, args.max_gap_ms)
    track = parse_annotations(args.annotations)
    segments = training_segments(align_labels(series, track), args.activities, cfg.train_seconds)
    d = build_dictionary(segments, args.sensor, cfg)
    d.save(args.out)
    print("activity,movelets")
    for label, n in d.counts().items():
        print(f"{label},{n}")
    return 0


def _load_test(args, d: Dictionary):
    sensor = args.sensor or d.sensor
    if sensor != d.sensor:
        raise SensorMismatch(f"test data is {sensor}, dictionary {args.dict_path} is {d.sensor}")
    return load_series(args.test_csv, sensor, d.config.hz, args.max_gap_ms)


def cmd_classify(args) -> int:
    d = Dictionary.load(args.dict_path)
    test = _load_test(args, d)
    track = classify_series(test, d, workers=args.workers)
    _emit(ev.predictions_csv(track), args.out)
    return 0


def cmd_evaluate(args) -> int:
    pred = ev.parse_predictions(args.predictions)
    if args.annotations:
        truth = ev.LabelSequence(pred.t_ms, labels_at(pred.t_ms, parse_annotations(args.annotations)))
    else:
        truth = _parse_truth(args.truth)
        if len(truth) != len(pred) or (truth.t_ms != pred.t_ms).any():
            raise LengthMismatch(
                f"truth has {len(truth)} samples, predictions have {len(pred)} "
                "(timestamps must match one to one)"
            )
    if args.activities:
        trained = args.activities
    elif args.dict_path:
        trained = Dictionary.load(args.dict_path).activities
    else:
        trained = CANONICAL_ACTIVITIES

    include = ev.load_segments(args.include_segments) if args.include_segments else None
    exclude = ev.load_segments(args.exclude_segments) if args.exclude_segments else None
    keep = ev.segment_mask(pred.t_ms, include, exclude)
    fp = ev.filter_by_segments(pred, include, exclude)
    ft = ev.filter_by_segments(truth, include, exclude)

    report = ev.confusion(fp, ft, trained)
    if args.format == "csv":
        text = ev.report_csv(report)
    elif args.format == "md":
        text = ev.report_markdown(report)
    else:
        text = ev.long_csv(pred.t_ms[keep], ft, fp)

    if args.distribution_segments:
        dists = {
            seg.name: ev.prediction_distribution(pred, seg, trained)
            for seg in ev.load_segments(args.distribution_segments)
        }
        if args.format == "md":
            text += "\n" + ev.distribution_markdown(dists, trained)
        else:
            print(ev.distribution_markdown(dists, trained), file=sys.stderr)

    _emit(text, args.out)
    summary = sys.stdout if args.out else sys.stderr
    print(f"diagonal_average={ev.diagonal_average(report):.2f}", file=summary)
    print(f"null_rate={ev.null_rate(len(trained)):.2f}", file=summary)
    print(f"samples={int(report.support.sum())}", file=summary)
    return 0


def _parse_truth(path) -> ev.LabelSequence:
    ts, labels = [], []
    for line, row in _rows(path, ("t_ms", "true_label")):
        ts.append(_int_ms(row[0].strip(), line))
        labels.append(row[1].strip() if len(row) > 1 and row[1].strip() else None)
    return ev.LabelSequence(ts, labels)


def cmd_synth(args) -> int:
    script = load_script(args.script)
    if args.seed is not None:
        script = script.with_seed(args.seed)
    models = load_models(args.models)
    sensors = args.sensors or list(ALL_SENSORS)
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    for sensor in sensors:
        ls = generate_session(script, models[sensor.modality], sensor, noise_sd=args.noise_sd)
        path = os.path.join(args.out_dir, f"{sensor.token}.csv")
        write_sensor_csv(ls.series, path)
        written.append(path)
    path = os.path.join(args.out_dir, "annotations.csv")
    write_annotations(session_track(script), path)
    written.append(path)
    margin = n_samples(args.boundary_seconds, script.hz)
    path = os.path.join(args.out_dir, "boundaries.json")
    ev.save_segments([boundary_segment(script, margin)], path)
    written.append(path)
    segments = script_segments(script)
    if segments:
        path = os.path.join(args.out_dir, "segments.json")
        ev.save_segments(segments, path)
        written.append(path)
    for path in written:
        print(path)
    return 0


def cmd_bench(args) -> int:
    d = Dictionary.load(args.dict_path)
    test = _load_test(args, d)
    n_movelets = len(test) - d.f + 1
    if n_movelets < 1:
        raise SeriesTooShort(len(test), d.f)
    best = float("inf")
    digests = set()
    for _ in range(max(args.repeat, 1)):
        t0 = time.perf_counter()
        track = classify_series(test, d, workers=args.workers)
        best = min(best, time.perf_counter() - t0)
        digests.add(hashlib.sha256("\n".join(track.labels).encode()).hexdigest())
    print(f"movelets={n_movelets}")
    print(f"dictionary_movelets={sum(d.counts().values())}")
    print(f"seconds={best:.6f}")
    print(f"movelets_per_second={n_movelets / best:.0f}")
    print(f"deterministic={'yes' if len(digests) == 1 else 'no'}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except MoveletError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
