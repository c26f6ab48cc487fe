"""Shared helpers for the experiment scripts."""

from movelets.evaluation import LabelSequence, confusion, filter_by_segments
from movelets.ingest import CANONICAL_ACTIVITIES, labels_at, training_segments
from movelets.movelet import MoveletConfig, build_dictionary, classify_series
from movelets.sigcore import Representation
from movelets.synth import boundary_segment, generate_session, session_track


def train_dictionary(sensor, rep, models, train_script, activities=CANONICAL_ACTIVITIES):
    cfg = MoveletConfig(rep=rep)
    ls = generate_session(train_script, models[sensor.modality], sensor)
    return build_dictionary(training_segments(ls, activities, cfg.train_seconds), sensor, cfg)


def predict(d, test_script, models, sensor):
    series = generate_session(test_script, models[sensor.modality], sensor).series
    return classify_series(series, d)


def truth_for(track, script):
    return LabelSequence(track.t_ms, labels_at(track.t_ms, session_track(script)))


def report(track, script, trained, exclude_boundaries=0, include=None):
    exclude = [boundary_segment(script, exclude_boundaries)] if exclude_boundaries else None
    pred = filter_by_segments(track, include, exclude)
    truth = filter_by_segments(truth_for(track, script), include, exclude)
    return confusion(pred, truth, trained)


REPS = (Representation.TRIAXIAL, Representation.MAGNITUDE)
