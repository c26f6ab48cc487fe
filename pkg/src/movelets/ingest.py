"""Sensor/annotation CSV parsing, resampling, label alignment and training segments."""

from __future__ import annotations

import csv
import io
import math
import os
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    GapTooLarge,
    InsufficientTraining,
    LengthMismatch,
    OverlapError,
    ParseError,
    TooFewRows,
)
from .sigcore import DEFAULT_HZ, SensorKind, UniformSeries, grid_ms, n_samples

SENSOR_HEADER = ("t_ms", "x", "y", "z")
ANNOTATION_HEADER = ("start_ms", "end_ms", "label")
LABEL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")

# Default row/column order for reports.
CANONICAL_ACTIVITIES = (
    "stand",
    "walk",
    "stairUp",
    "stairDown",
    "standToSit",
    "sit",
    "sitToStand",
)


@dataclass(frozen=True, eq=False)
class RawStream:
    sensor: SensorKind
    t_ms: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.t_ms)


@dataclass(frozen=True, order=True)
class Interval:
    start_ms: int
    end_ms: int
    label: str

    def contains(self, t: int) -> bool:
        return self.start_ms <= t < self.end_ms


@dataclass(frozen=True)
class LabelTrack:
    intervals: tuple = ()

    def __post_init__(self):
        ivs = tuple(self.intervals)
        object.__setattr__(self, "intervals", ivs)
        for iv in ivs:
            if iv.end_ms <= iv.start_ms:
                raise ValueError(f"interval {iv} has end <= start")
        for a, b in zip(ivs, ivs[1:]):
            if b.start_ms < a.start_ms:
                raise ValueError("intervals must be sorted by start_ms")
            if b.start_ms < a.end_ms:
                raise OverlapError(a, b)

    def __len__(self):
        return len(self.intervals)

    @property
    def labels(self) -> tuple:
        """Distinct labels in order of first appearance."""
        return tuple(dict.fromkeys(iv.label for iv in self.intervals))


@dataclass(frozen=True, eq=False)
class LabeledSeries:
    series: UniformSeries
    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) != len(self.series):
            raise LengthMismatch(
                f"{len(labels)} labels for a series of {len(self.series)} samples"
            )
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    @property
    def t_ms(self) -> np.ndarray:
        return self.series.t_ms


def _open_text(source):
    """Return (text stream, should_close) for a path, bytes, or text/binary stream."""
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline=""), True
    if isinstance(source, io.TextIOBase):
        return source, False
    if hasattr(source, "read"):
        return io.TextIOWrapper(source, encoding="utf-8", newline=""), False
    raise TypeError(f"cannot read CSV from {type(source).__name__}")


def _rows(source, header):
    fh, close = _open_text(source)
    try:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            raise ParseError("empty input, expected header " + ",".join(header), line=1)
        if tuple(c.strip() for c in first) != header:
            raise ParseError(
                f"expected header {','.join(header)!r}, got {','.join(first)!r}", line=1
            )
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            yield reader.line_num, row
    finally:
        if close:
            fh.close()


def _int_ms(text, line):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"bad timestamp {text!r}", line) from None
    if not math.isfinite(v) or v != int(v):
        raise ParseError(f"timestamp {text!r} is not an integer millisecond", line)
    return int(v)


def _finite(text, line):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"bad number {text!r}", line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", line)
    return v


def parse_sensor_csv(source, sensor: SensorKind) -> RawStream:
    """Parse a ``t_ms,x,y,z`` file. Rows are sorted by time; duplicate
    timestamps keep the last row seen."""
    by_t = {}
    for line, row in _rows(source, SENSOR_HEADER):
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, got {len(row)}", line)
        t = _int_ms(row[0].strip(), line)
        by_t[t] = [_finite(c.strip(), line) for c in row[1:]]
    ts = np.array(sorted(by_t), dtype=np.int64)
    values = np.array([by_t[t] for t in ts.tolist()], dtype=np.float64).reshape(-1, 3)
    return RawStream(sensor, ts, values)


def resample(raw: RawStream, hz: float = DEFAULT_HZ, max_gap_ms: int = 1000) -> UniformSeries:
    """Linearly interpolate onto the grid ``t0 + round(1000 i / hz)`` up to the
    last raw timestamp (no extrapolation)."""
    if not hz > 0:
        raise ValueError(f"hz must be positive, got {hz}")
    if len(raw) < 2:
        raise TooFewRows(f"need at least 2 rows to resample, got {len(raw)}")
    t = raw.t_ms
    gaps = np.diff(t)
    bad = np.flatnonzero(gaps > max_gap_ms)
    if bad.size:
        i = int(bad[0])
        raise GapTooLarge(i, int(gaps[i]), max_gap_ms)
    t0, t1 = int(t[0]), int(t[-1])
    n = int(math.floor((t1 - t0) * hz / 1000.0)) + 1
    grid = grid_ms(t0, n, hz)
    grid = grid[grid <= t1]
    tf = t.astype(np.float64)
    gf = grid.astype(np.float64)
    values = np.column_stack([np.interp(gf, tf, raw.values[:, c]) for c in range(3)])
    return UniformSeries(raw.sensor, values, hz, t0)


def load_series(path, sensor: SensorKind, hz: float = DEFAULT_HZ, max_gap_ms: int = 1000):
    return resample(parse_sensor_csv(path, sensor), hz, max_gap_ms)


def parse_annotations(source) -> LabelTrack:
    intervals = []
    for line, row in _rows(source, ANNOTATION_HEADER):
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", line)
        start = _int_ms(row[0].strip(), line)
        end = _int_ms(row[1].strip(), line)
        label = row[2].strip()
        if not LABEL_RE.match(label):
            raise ParseError(f"bad label token {label!r}", line)
        if end <= start:
            raise ParseError(f"end_ms {end} <= start_ms {start}", line)
        intervals.append(Interval(start, end, label))
    intervals.sort(key=lambda iv: (iv.start_ms, iv.end_ms))
    return LabelTrack(tuple(intervals))


def write_annotations(track: LabelTrack, dest=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ANNOTATION_HEADER)
    for iv in track.intervals:
        w.writerow([iv.start_ms, iv.end_ms, iv.label])
    return _emit(buf.getvalue(), dest)


def write_sensor_csv(series: UniformSeries, dest=None) -> str:
    if series.n_channels != 3:
        raise ValueError("sensor CSV needs a tri-axial series")
    lines = ["t_ms,x,y,z"]
    for t, (x, y, z) in zip(series.t_ms.tolist(), series.values.tolist()):
        lines.append(f"{t},{x!r},{y!r},{z!r}")
    return _emit("\n".join(lines) + "\n", dest)


def _emit(text, dest):
    if dest is not None:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def labels_at(t_ms, track: LabelTrack) -> tuple:
    """Label of the interval containing each timestamp, half-open [start, end);
    None outside every interval."""
    t = np.asarray(t_ms, dtype=np.int64)
    labels: list[Optional[str]] = [None] * len(t)
    if track.intervals and len(t):
        starts = np.array([iv.start_ms for iv in track.intervals], dtype=np.int64)
        # last interval starting at or before t
        idx = np.searchsorted(starts, t, side="right") - 1
        for i, k in enumerate(idx.tolist()):
            if k >= 0 and track.intervals[k].contains(int(t[i])):
                labels[i] = track.intervals[k].label
    return tuple(labels)


def align_labels(series: UniformSeries, track: LabelTrack) -> LabeledSeries:
    return LabeledSeries(series, labels_at(series.t_ms, track))


def label_runs(labels: Sequence) -> list[tuple[int, int, object]]:
    """Maximal runs of equal labels as (start, stop, label), stop exclusive."""
    runs = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            runs.append((start, i, labels[start]))
            start = i
    return runs


def extract_training_segment(
    ls: LabeledSeries, activity: str, train_seconds: float = 4.0
) -> UniformSeries:
    """Centered ``train_seconds`` of the longest run labeled ``activity``
    (earliest run on ties)."""
    hz = ls.series.hz
    need = n_samples(train_seconds, hz)
    best = None
    for start, stop, label in label_runs(ls.labels):
        if label == activity and (best is None or stop - start > best[1] - best[0]):
            best = (start, stop)
    have = 0 if best is None else best[1] - best[0]
    if have < need:
        raise InsufficientTraining(activity, have / hz, need / hz)
    offset = best[0] + (have - need) // 2
    return ls.series.slice(offset, offset + need)


def training_segments(
    ls: LabeledSeries, activities: Iterable[str], train_seconds: float = 4.0
) -> dict:
    return {a: extract_training_segment(ls, a, train_seconds) for a in activities}
