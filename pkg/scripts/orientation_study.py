"""Accuracy when the phone sits in the pocket in each of four orientations.

The dictionary comes from a canonically oriented training session; the test
course repeats the same circuit once per orientation. Tri-axial matching
degrades under sign flips while magnitude matching is unchanged.

    python scripts/orientation_study.py
"""

import argparse

from _common import REPS, predict, report, train_dictionary
from movelets.evaluation import diagonal_average
from movelets.sigcore import SensorKind
from movelets.synth import load_models, load_script, script_segments


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sensor", type=SensorKind.parse, default=SensorKind.parse("front-acc"))
    ap.add_argument("--boundary-samples", type=int, default=10)
    args = ap.parse_args(argv)

    models = load_models()
    train, test = load_script("training-protocol"), load_script("orientation-course")
    segments = script_segments(test)

    print(f"| orientation | {' | '.join(r.value for r in REPS)} |")
    print("|---|" + "---|" * len(REPS))
    tracks = {}
    for rep in REPS:
        d = train_dictionary(args.sensor, rep, models, train)
        tracks[rep] = (d, predict(d, test, models, args.sensor))
    for seg in segments:
        cells = []
        for rep in REPS:
            d, track = tracks[rep]
            r = report(track, test, d.activities, args.boundary_samples, include=[seg])
            cells.append(f"{diagonal_average(r):.2f}")
        print(f"| {seg.meta.get('orientation', seg.name)} | {' | '.join(cells)} |")


if __name__ == "__main__":
    main()
