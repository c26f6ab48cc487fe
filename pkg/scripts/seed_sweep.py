"""Diagonal average over many synthetic seeds, boundaries excluded.

Shows how much the end-to-end score on separable synthetic data moves with
the noise draw.

    python scripts/seed_sweep.py --seeds 30
"""

import argparse

import numpy as np

from _common import predict, report, train_dictionary
from movelets.evaluation import diagonal_average
from movelets.sigcore import Representation, SensorKind
from movelets.synth import load_models, load_script


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--sensor", type=SensorKind.parse, default=SensorKind.parse("front-acc"))
    ap.add_argument("--rep", type=Representation, default=Representation.TRIAXIAL)
    ap.add_argument("--boundary-samples", type=int, default=10)
    args = ap.parse_args(argv)

    models = load_models()
    scores = []
    for seed in range(args.seeds):
        train = load_script("training-protocol").with_seed(1000 + seed)
        test = load_script("test-course").with_seed(2000 + seed)
        d = train_dictionary(args.sensor, args.rep, models, train)
        track = predict(d, test, models, args.sensor)
        scores.append(diagonal_average(report(track, test, d.activities, args.boundary_samples)))
    s = np.array(scores)
    print(f"{args.sensor.token} {args.rep.value}: n={len(s)} mean={s.mean():.3f} "
          f"min={s.min():.3f} max={s.max():.3f}")


if __name__ == "__main__":
    main()
