"""Confusion matrices, diagonal averages and per-segment prediction distributions.

Columns are true labels and rows are predicted labels; every column with
support is normalized to sum to one. Truth labels missing from the trained set
(e.g. ``revolveDoor``) appear as columns only.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    EmptySegment,
    LengthMismatch,
    NoSupportedColumns,
    ParseError,
    UnknownLabel,
)
from .ingest import _int_ms, _rows


@dataclass(frozen=True, eq=False)
class LabelSequence:
    """Timestamped labels that need not lie on a uniform grid."""

    t_ms: np.ndarray
    labels: tuple

    def __post_init__(self):
        t = np.asarray(self.t_ms, dtype=np.int64)
        labels = tuple(self.labels)
        if len(t) != len(labels):
            raise LengthMismatch(f"{len(t)} timestamps for {len(labels)} labels")
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class SegmentSpec:
    name: str
    intervals: tuple
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        ivs = tuple(sorted((int(a), int(b)) for a, b in self.intervals))
        for a, b in ivs:
            if b <= a:
                raise ValueError(f"segment {self.name!r}: interval end <= start")
        for (a0, b0), (a1, b1) in zip(ivs, ivs[1:]):
            if a1 < b0:
                raise ValueError(f"segment {self.name!r}: intervals overlap")
        object.__setattr__(self, "intervals", ivs)

    def mask(self, t_ms) -> np.ndarray:
        t = np.asarray(t_ms, dtype=np.int64)
        m = np.zeros(len(t), dtype=bool)
        for a, b in self.intervals:
            m |= (t >= a) & (t < b)
        return m

    def to_json(self) -> dict:
        return {"name": self.name, "intervals": [list(iv) for iv in self.intervals], "meta": dict(self.meta)}


def load_segments(path) -> list[SegmentSpec]:
    """Segment file: JSON list of ``{name, intervals: [[start_ms, end_ms], ...], meta}``."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    try:
        return [SegmentSpec(d["name"], tuple(map(tuple, d["intervals"])), d.get("meta", {})) for d in doc]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid segment file {path}: {exc}") from exc


def save_segments(segments: Iterable[SegmentSpec], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([s.to_json() for s in segments], fh, indent=2)
        fh.write("\n")


def segment_mask(t_ms, include=None, exclude=None) -> np.ndarray:
    t = np.asarray(t_ms, dtype=np.int64)
    if include:
        keep = np.zeros(len(t), dtype=bool)
        for seg in include:
            keep |= seg.mask(t)
    else:
        keep = np.ones(len(t), dtype=bool)
    for seg in exclude or ():
        keep &= ~seg.mask(t)
    return keep


def filter_by_segments(track, include=None, exclude=None) -> LabelSequence:
    """Keep samples inside an include segment (all, if none given) and outside
    every exclude segment."""
    keep = segment_mask(track.t_ms, include, exclude)
    labels = [l for l, k in zip(track.labels, keep.tolist()) if k]
    return LabelSequence(np.asarray(track.t_ms)[keep], tuple(labels))


def _labels(obj) -> tuple:
    return tuple(obj.labels) if hasattr(obj, "labels") else tuple(obj)


@dataclass(frozen=True, eq=False)
class ConfusionReport:
    true_labels: tuple
    predicted_labels: tuple
    counts: np.ndarray
    n_unpredicted: int = 0

    @property
    def support(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def matrix(self) -> np.ndarray:
        """Proportions ``p[pred, true]``; zero-support columns are all zero."""
        sup = self.support
        out = np.zeros(self.counts.shape, dtype=np.float64)
        nz = sup > 0
        out[:, nz] = self.counts[:, nz] / sup[nz]
        return out

    def proportion(self, predicted: str, true: str) -> float:
        return float(
            self.matrix[self.predicted_labels.index(predicted), self.true_labels.index(true)]
        )

    def diagonal(self) -> dict:
        """Matched-label proportion for every trained label with support."""
        m, sup = self.matrix, self.support
        out = {}
        for r, lab in enumerate(self.predicted_labels):
            if lab in self.true_labels:
                c = self.true_labels.index(lab)
                if sup[c] > 0:
                    out[lab] = float(m[r, c])
        return out


def confusion(pred, truth, trained: Sequence[str]) -> ConfusionReport:
    """Column-normalized truth-vs-prediction counts.

    Samples with no truth label are skipped; samples with a truth label but no
    prediction are counted in ``n_unpredicted``.
    """
    p, t = _labels(pred), _labels(truth)
    if len(p) != len(t):
        raise LengthMismatch(f"{len(p)} predictions vs {len(t)} truth labels")
    rows = {lab: i for i, lab in enumerate(trained)}
    cols = dict(rows)
    for lab in t:
        if lab is not None and lab not in cols:
            cols[lab] = len(cols)
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    unpredicted = 0
    for pl, tl in zip(p, t):
        if tl is None:
            continue
        if pl is None:
            unpredicted += 1
            continue
        if pl not in rows:
            raise UnknownLabel(f"predicted label {pl!r} is not a trained activity")
        counts[rows[pl], cols[tl]] += 1
    return ConfusionReport(tuple(cols), tuple(trained), counts, unpredicted)


def diagonal_average(report: ConfusionReport) -> float:
    diag = report.diagonal()
    if not diag:
        raise NoSupportedColumns("no trained activity has any truth samples")
    return float(np.mean(list(diag.values())))


def null_rate(n_trained: int) -> float:
    """Accuracy of uniform random guessing among ``n_trained`` activities."""
    if n_trained < 1:
        raise ValueError("need at least one trained activity")
    return 1.0 / n_trained


def prediction_distribution(pred, segment: SegmentSpec, trained: Sequence[str]) -> dict:
    keep = segment.mask(pred.t_ms)
    labels = [l for l, k in zip(pred.labels, keep.tolist()) if k and l is not None]
    if not labels:
        raise EmptySegment(f"segment {segment.name!r} contains no predicted samples")
    out = {lab: 0 for lab in trained}
    for lab in labels:
        if lab not in out:
            raise UnknownLabel(f"predicted label {lab!r} is not a trained activity")
        out[lab] += 1
    return {lab: c / len(labels) for lab, c in out.items()}


# -- report emission ---------------------------------------------------------


def report_csv(report: ConfusionReport) -> str:
    """Full-precision matrix: one row per predicted label, then a support row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["predicted", *report.true_labels])
    for lab, row in zip(report.predicted_labels, report.matrix.tolist()):
        w.writerow([lab, *(repr(v) for v in row)])
    w.writerow(["support", *report.support.tolist()])
    return buf.getvalue()


def _md_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def report_markdown(report: ConfusionReport, title: Optional[str] = None) -> str:
    """Two-decimal table with true labels as columns; matched cells in bold."""
    m = report.matrix
    rows = []
    for r, lab in enumerate(report.predicted_labels):
        cells = [lab]
        for c, tl in enumerate(report.true_labels):
            v = f"{m[r, c]:.2f}"
            cells.append(f"**{v}**" if tl == lab else v)
        rows.append(cells)
    out = f"**{title}**\n\n" if title else ""
    return out + _md_table(["", *report.true_labels], rows)


def paired_markdown(tri: ConfusionReport, mag: ConfusionReport, title: Optional[str] = None) -> str:
    """Tri-axial and magnitude proportions side by side as ``tri / mag``."""
    if tri.true_labels != mag.true_labels or tri.predicted_labels != mag.predicted_labels:
        raise ValueError("reports must share row and column labels")
    a, b = tri.matrix, mag.matrix
    rows = []
    for r, lab in enumerate(tri.predicted_labels):
        cells = [lab]
        for c, tl in enumerate(tri.true_labels):
            v = f"{a[r, c]:.2f} / {b[r, c]:.2f}"
            cells.append(f"**{v}**" if tl == lab else v)
        rows.append(cells)
    out = f"**{title}**\n\n" if title else ""
    out += _md_table(["", *tri.true_labels], rows)
    out += (
        f"\nDiagonal average (tri-axial vs. magnitude): "
        f"{diagonal_average(tri):.2f} vs. {diagonal_average(mag):.2f}\n"
    )
    return out


def distribution_markdown(dists: Mapping[str, Mapping[str, float]], trained: Sequence[str]) -> str:
    """Per-segment prediction distributions, one column per segment."""
    names = list(dists)
    rows = [[lab, *(f"{dists[n].get(lab, 0.0):.2f}" for n in names)] for lab in trained]
    return _md_table(["", *names], rows)


def long_csv(t_ms, truth, pred) -> str:
    """Plot-ready ``t_ms,true_label,predicted_label`` rows; unlabeled cells are empty."""
    t_lab, p_lab = _labels(truth), _labels(pred)
    t = np.asarray(t_ms).tolist()
    if not (len(t) == len(t_lab) == len(p_lab)):
        raise LengthMismatch("timestamps, truth and predictions differ in length")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_ms", "true_label", "predicted_label"])
    for row in zip(t, t_lab, p_lab):
        w.writerow([row[0], row[1] or "", row[2] or ""])
    return buf.getvalue()


def parse_predictions(source) -> LabelSequence:
    """Read a ``t_ms,predicted_label`` file written by the classify command."""
    ts, labels = [], []
    for line, row in _rows(source, ("t_ms", "predicted_label")):
        if len(row) != 2:
            raise ParseError(f"expected 2 columns, got {len(row)}", line)
        ts.append(_int_ms(row[0].strip(), line))
        labels.append(row[1].strip() or None)
    return LabelSequence(np.array(ts, dtype=np.int64), tuple(labels))


def predictions_csv(track) -> str:
    lines = ["t_ms,predicted_label"]
    for t, lab in zip(np.asarray(track.t_ms).tolist(), track.labels):
        lines.append(f"{t},{lab or ''}")
    return "\n".join(lines) + "\n"
