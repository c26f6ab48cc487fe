"""Movelet activity classification for smartphone accelerometer and gyroscope data."""

from .errors import InputError, MoveletError
from .evaluation import (
    ConfusionReport,
    LabelSequence,
    SegmentSpec,
    confusion,
    diagonal_average,
    filter_by_segments,
    null_rate,
    prediction_distribution,
)
from .ingest import (
    CANONICAL_ACTIVITIES,
    LabeledSeries,
    LabelTrack,
    align_labels,
    extract_training_segment,
    parse_annotations,
    parse_sensor_csv,
    resample,
)
from .movelet import (
    Dictionary,
    MatchResult,
    MoveletConfig,
    PredictionTrack,
    build_dictionary,
    classify_movelets,
    classify_series,
    movelet_distance,
    smooth_predictions,
)
from .sigcore import (
    Movelet,
    Representation,
    Sample,
    SensorKind,
    UniformSeries,
    extract_movelets,
    magnitude,
    to_magnitude_series,
)
from .synth import (
    ActivityModel,
    Orientation,
    ProtocolScript,
    generate_activity,
    generate_session,
    reorient,
)

__version__ = "0.1.0"

__all__ = [
    "ActivityModel",
    "CANONICAL_ACTIVITIES",
    "ConfusionReport",
    "Dictionary",
    "InputError",
    "LabelSequence",
    "LabelTrack",
    "LabeledSeries",
    "MatchResult",
    "Movelet",
    "MoveletConfig",
    "MoveletError",
    "Orientation",
    "PredictionTrack",
    "ProtocolScript",
    "Representation",
    "Sample",
    "SegmentSpec",
    "SensorKind",
    "UniformSeries",
    "align_labels",
    "build_dictionary",
    "classify_movelets",
    "classify_series",
    "confusion",
    "diagonal_average",
    "extract_movelets",
    "extract_training_segment",
    "filter_by_segments",
    "generate_activity",
    "generate_session",
    "magnitude",
    "movelet_distance",
    "null_rate",
    "parse_annotations",
    "parse_sensor_csv",
    "prediction_distribution",
    "reorient",
    "resample",
    "smooth_predictions",
    "to_magnitude_series",
]
