"""Tri-axial vs. magnitude confusion tables for each of the four phone sensors.

Trains on the bundled ``training-protocol`` session and tests on ``test-course``,
writing one paired markdown table per sensor.

    python scripts/sensor_study.py --out results/sensor_study.md
"""

import argparse
import sys

from _common import REPS, predict, report, train_dictionary
from movelets.evaluation import diagonal_average, null_rate, paired_markdown
from movelets.ingest import CANONICAL_ACTIVITIES
from movelets.sigcore import ALL_SENSORS
from movelets.synth import load_models, load_script


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--train-seed", type=int, default=None)
    ap.add_argument("--test-seed", type=int, default=None)
    ap.add_argument("--boundary-samples", type=int, default=0,
                    help="exclude this many samples either side of each step change")
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    models = load_models()
    train, test = load_script("training-protocol"), load_script("test-course")
    if args.train_seed is not None:
        train = train.with_seed(args.train_seed)
    if args.test_seed is not None:
        test = test.with_seed(args.test_seed)

    parts = [f"Null rate: {null_rate(len(CANONICAL_ACTIVITIES)):.2f}\n"]
    summary = []
    for sensor in ALL_SENSORS:
        reps = []
        for rep in REPS:
            d = train_dictionary(sensor, rep, models, train)
            track = predict(d, test, models, sensor)
            reps.append(report(track, test, d.activities, args.boundary_samples))
        parts.append(paired_markdown(*reps, title=sensor.token))
        summary.append((sensor.token, *(diagonal_average(r) for r in reps)))

    text = "\n".join(parts)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for token, tri, mag in summary:
        print(f"{token}: tri-axial {tri:.2f}, magnitude {mag:.2f}", file=sys.stderr)


if __name__ == "__main__":
    main()
