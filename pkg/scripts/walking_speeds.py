"""Where walking at unusual speeds ends up: predicted-label shares per speed.

The dictionary only knows walking at normal pace; the test session walks at
normal, fast and slow pace in turn.

    python scripts/walking_speeds.py --rep magnitude
"""

import argparse

from _common import predict, train_dictionary
from movelets.evaluation import distribution_markdown, prediction_distribution
from movelets.sigcore import Representation, SensorKind
from movelets.synth import load_models, load_script, script_segments


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sensor", type=SensorKind.parse, default=SensorKind.parse("front-acc"))
    ap.add_argument("--rep", type=Representation, default=Representation.TRIAXIAL)
    args = ap.parse_args(argv)

    models = load_models()
    train, test = load_script("training-protocol"), load_script("walking-speeds")
    d = train_dictionary(args.sensor, args.rep, models, train)
    track = predict(d, test, models, args.sensor)
    dists = {seg.name: prediction_distribution(track, seg, d.activities) for seg in script_segments(test)}
    print(distribution_markdown(dists, d.activities), end="")


if __name__ == "__main__":
    main()
