"""Movelet dictionaries, nearest-movelet matching and majority-vote smoothing."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from typing import Mapping, Optional

import numpy as np

from .errors import LengthMismatch, ParseError, RepMismatch, SensorMismatch, SeriesTooShort
from .sigcore import (
    DEFAULT_HZ,
    Movelet,
    Representation,
    SensorKind,
    UniformSeries,
    as_representation,
    grid_ms,
    n_samples,
    sliding_windows,
    window_samples,
)

FORMAT_NAME = "movelet-dictionary"
FORMAT_VERSION = 1

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class MoveletConfig:
    window_seconds: float = 1.0
    train_seconds: float = 4.0
    rep: Representation = Representation.TRIAXIAL
    vote_horizon_seconds: float = 1.0
    hz: float = DEFAULT_HZ

    def __post_init__(self):
        for name in ("window_seconds", "train_seconds", "vote_horizon_seconds", "hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if isinstance(self.rep, str):
            object.__setattr__(self, "rep", Representation(self.rep))
        window_samples(self.window_seconds, self.hz)

    @property
    def f(self) -> int:
        """Movelet length in samples."""
        return window_samples(self.window_seconds, self.hz)

    @property
    def train_samples(self) -> int:
        return n_samples(self.train_seconds, self.hz)

    @property
    def vote_samples(self) -> int:
        # votes come from movelets starting at offsets 0..vote_samples inclusive
        return n_samples(self.vote_horizon_seconds, self.hz)

    def to_json(self) -> dict:
        d = asdict(self)
        d["rep"] = self.rep.value
        return d


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Per-(sensor, representation) map from activity to its training movelets.

    ``entries[label]`` is an array of shape (m, f, C); movelet ``k`` of an entry
    starts at sample ``k`` of that activity's training segment.
    """

    sensor: SensorKind
    config: MoveletConfig
    entries: Mapping[str, np.ndarray]

    def __post_init__(self):
        entries = {}
        for label, arr in self.entries.items():
            arr = np.array(arr, dtype=np.float64, copy=True)
            if arr.ndim != 3 or arr.shape[0] == 0:
                raise ValueError(f"entry {label!r} must be a non-empty (m, f, C) array")
            if arr.shape[1:] != (self.config.f, self.rep.n_channels):
                raise ValueError(
                    f"entry {label!r} has movelets of shape {arr.shape[1:]}, "
                    f"expected {(self.config.f, self.rep.n_channels)}"
                )
            arr.setflags(write=False)
            entries[label] = arr
        if not entries:
            raise ValueError("dictionary needs at least one activity")
        object.__setattr__(self, "entries", entries)

    @property
    def rep(self) -> Representation:
        return self.config.rep

    @property
    def activities(self) -> tuple:
        return tuple(self.entries)

    @property
    def f(self) -> int:
        return self.config.f

    def movelets(self, label: str) -> list[Movelet]:
        return [Movelet(k, self.rep, w) for k, w in enumerate(self.entries[label])]

    def counts(self) -> dict:
        return {a: len(v) for a, v in self.entries.items()}

    @cached_property
    def _bank(self):
        flat = np.concatenate([v.reshape(len(v), -1) for v in self.entries.values()])
        owner = np.concatenate(
            [np.full(len(v), i, dtype=np.intp) for i, v in enumerate(self.entries.values())]
        )
        starts = np.cumsum([0] + [len(v) for v in self.entries.values()])[:-1]
        return flat, np.einsum("ij,ij->i", flat, flat), owner, starts

    # -- serialization -------------------------------------------------

    def to_json(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "format_version": FORMAT_VERSION,
            "sensor": self.sensor.token,
            "rep": self.rep.value,
            "config": self.config.to_json(),
            "activities": list(self.activities),
            "entries": {
                label: [
                    {"start_index": k, "values": w.T.tolist()}
                    for k, w in enumerate(arr)
                ]
                for label, arr in self.entries.items()
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Dictionary":
        try:
            if doc.get("format") != FORMAT_NAME:
                raise ParseError(f"not a {FORMAT_NAME} document")
            if doc.get("format_version") != FORMAT_VERSION:
                raise ParseError(f"unsupported format_version {doc.get('format_version')!r}")
            cfg = MoveletConfig(**doc["config"])
            if cfg.rep.value != doc["rep"]:
                raise ParseError("header rep does not match config rep")
            entries = {}
            for label in doc["activities"]:
                movelets = sorted(doc["entries"][label], key=lambda m: m["start_index"])
                entries[label] = np.array(
                    [np.array(m["values"], dtype=np.float64).T for m in movelets]
                )
            return cls(SensorKind.parse(doc["sensor"]), cfg, entries)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"invalid dictionary document: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Dictionary":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"dictionary is not valid JSON: {exc}") from exc
        return cls.from_json(doc)


@dataclass(frozen=True)
class MatchResult:
    start_index: int
    best_label: str
    best_distance: float
    runner_up_distance: Optional[float] = None


@dataclass(frozen=True, eq=False)
class PredictionTrack:
    """Per-sample predictions for a test series plus the raw per-movelet matches."""

    activities: tuple
    t_ms: np.ndarray
    label_index: np.ndarray
    match_index: np.ndarray = field(repr=False)
    match_distance: np.ndarray = field(repr=False)
    match_runner_up: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.label_index)

    @cached_property
    def labels(self) -> tuple:
        names = np.array(self.activities, dtype=object)
        return tuple(names[self.label_index].tolist())

    @cached_property
    def matches(self) -> list[MatchResult]:
        return match_results(
            self.activities, self.match_index, self.match_distance, self.match_runner_up
        )


def match_results(activities, index, distance, runner_up) -> list[MatchResult]:
    names = list(activities)
    ru = [None if math.isnan(r) else r for r in runner_up.tolist()]
    return [
        MatchResult(k, names[i], d, r)
        for k, (i, d, r) in enumerate(zip(index.tolist(), distance.tolist(), ru))
    ]


def build_dictionary(
    training: Mapping[str, UniformSeries], sensor: SensorKind, cfg: MoveletConfig
) -> Dictionary:
    """One entry per activity, holding every movelet of its training series."""
    f = cfg.f
    entries = {}
    for label, series in training.items():
        if series.sensor != sensor:
            raise SensorMismatch(
                f"training series for {label!r} is {series.sensor}, dictionary is {sensor}"
            )
        if series.hz != cfg.hz:
            raise ValueError(f"training series for {label!r} is {series.hz} Hz, config is {cfg.hz} Hz")
        s = as_representation(series, cfg.rep)
        if len(s) < f:
            raise SeriesTooShort(len(s), f, activity=label)
        entries[label] = sliding_windows(s.values, f)
    return Dictionary(sensor, cfg, entries)


def movelet_distance(a: Movelet, b: Movelet) -> float:
    if a.rep is not b.rep:
        raise RepMismatch(f"{a.rep.value} vs {b.rep.value}")
    if a.values.shape != b.values.shape:
        raise LengthMismatch(f"movelet shapes {a.values.shape} vs {b.values.shape}")
    d = a.values - b.values
    return math.sqrt(float(np.sum(d * d)))


def _test_windows(test: UniformSeries, d: Dictionary) -> np.ndarray:
    if test.sensor != d.sensor:
        raise SensorMismatch(f"test series is {test.sensor}, dictionary is {d.sensor}")
    if test.hz != d.config.hz:
        raise ValueError(f"test series is {test.hz} Hz, dictionary expects {d.config.hz} Hz")
    s = as_representation(test, d.rep)
    if len(s) < d.f:
        raise SeriesTooShort(len(s), d.f)
    return sliding_windows(s.values, d.f).reshape(len(s) - d.f + 1, -1)


def _exact_sq(T, B, rows, cols):
    diff = T[rows] - B[cols]
    return np.einsum("ij,ij->i", diff, diff)


def _first_min_per_row(rows, vals, cols, n):
    """Per row: smallest value, ties to smallest column. Rows absent get NaN/-1."""
    order = np.lexsort((cols, vals, rows))
    r = rows[order]
    first = np.ones(len(r), dtype=bool)
    first[1:] = r[1:] != r[:-1]
    best_val = np.full(n, np.nan)
    best_col = np.full(n, -1, dtype=np.intp)
    best_val[r[first]] = vals[order][first]
    best_col[r[first]] = cols[order][first]
    return best_val, best_col


def _nearest_chunk(T, bank):
    """Exact nearest dictionary movelet and runner-up (best other activity).

    Squared distances are ranked with the Gram expansion, and every pair that
    the expansion's rounding error could place at the minimum is recomputed
    directly, so results equal a direct all-pairs scan.
    """
    B, bn, owner, starts = bank
    n, dim = T.shape
    tn = np.einsum("ij,ij->i", T, T)
    A = tn[:, None] + bn[None, :] - 2.0 * (T @ B.T)
    tol = 8.0 * (dim + 4) * _EPS * (tn + bn.max())

    m1 = A.min(axis=1)
    rows, cols = np.nonzero(A <= (m1 + 2.0 * tol)[:, None])
    e = _exact_sq(T, B, rows, cols)
    best_sq, best_col = _first_min_per_row(rows, e, cols, n)
    best_lab = owner[best_col]

    runner_sq = np.full(n, np.nan)
    if len(starts) > 1:
        lab_min = np.minimum.reduceat(A, starts, axis=1)
        lab_min[np.arange(n), best_lab] = np.inf
        m2 = lab_min.min(axis=1)
        mask = A <= (m2 + 2.0 * tol)[:, None]
        mask &= owner[None, :] != best_lab[:, None]
        rows, cols = np.nonzero(mask)
        e = _exact_sq(T, B, rows, cols)
        runner_sq, _ = _first_min_per_row(rows, e, cols, n)
    return best_lab, best_col, np.sqrt(best_sq), np.sqrt(runner_sq)


def nearest_movelets(
    test: UniformSeries, d: Dictionary, chunk_size: int = 4096, workers: int = 1
):
    """Array form of :func:`classify_movelets`.

    Returns (label index, global dictionary movelet index, best distance,
    runner-up distance) arrays of length N - f + 1; runner-up is NaN when the
    dictionary has a single activity.
    """
    T = _test_windows(test, d)
    n = T.shape[0]
    bank = d._bank
    out_lab = np.empty(n, dtype=np.intp)
    out_col = np.empty(n, dtype=np.intp)
    out_d = np.empty(n)
    out_r = np.empty(n)

    def run(lo):
        hi = min(lo + chunk_size, n)
        lab, col, dist, ru = _nearest_chunk(T[lo:hi], bank)
        out_lab[lo:hi], out_col[lo:hi], out_d[lo:hi], out_r[lo:hi] = lab, col, dist, ru

    starts = range(0, n, chunk_size)
    if workers > 1 and n > chunk_size:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    else:
        for lo in starts:
            run(lo)
    return out_lab, out_col, out_d, out_r


def classify_movelets(test: UniformSeries, d: Dictionary, workers: int = 1) -> list[MatchResult]:
    lab, _, dist, ru = nearest_movelets(test, d, workers=workers)
    return match_results(d.activities, lab, dist, ru)


def vote_bounds(n_movelets: int, test_len: int, horizon: int):
    """Inclusive movelet index range [lo, hi] voting for each sample."""
    i = np.arange(test_len)
    last = n_movelets - 1
    return np.minimum(i, last), np.minimum(i + horizon, last)


def smooth_indices(
    match_index: np.ndarray,
    match_distance: np.ndarray,
    test_len: int,
    horizon: int,
    n_labels: int,
) -> np.ndarray:
    """Majority vote over movelets starting at offsets 0..horizon of each sample.

    Ties go to the label with the smallest summed match distance, then to the
    earliest label.
    """
    n_m = len(match_index)
    if n_m == 0:
        raise ValueError("no matches to smooth")
    lo, hi = vote_bounds(n_m, test_len, horizon)
    onehot = np.eye(n_labels)[match_index]
    counts = np.zeros((test_len, n_labels))
    sums = np.zeros((test_len, n_labels))
    for k in range(horizon + 1):
        j = np.minimum(lo + k, hi)
        valid = ((lo + k) <= hi)[:, None]
        counts += np.where(valid, onehot[j], 0.0)
        sums += np.where(valid, onehot[j] * match_distance[j][:, None], 0.0)
    top = counts.max(axis=1, keepdims=True)
    key = np.where(counts == top, sums, np.inf)
    return np.argmin(key, axis=1)


def smooth_predictions(
    matches: list[MatchResult],
    test_len: int,
    cfg: MoveletConfig,
    d: Dictionary,
    start_ms: int = 0,
) -> PredictionTrack:
    """Per-sample labels from a list of per-movelet matches."""
    pos = {a: i for i, a in enumerate(d.activities)}
    ordered = sorted(matches, key=lambda m: m.start_index)
    if [m.start_index for m in ordered] != list(range(len(ordered))):
        raise ValueError("matches must cover start indices 0..N-f")
    idx = np.array([pos[m.best_label] for m in ordered], dtype=np.intp)
    dist = np.array([m.best_distance for m in ordered])
    ru = np.array([np.nan if m.runner_up_distance is None else m.runner_up_distance for m in ordered])
    out = smooth_indices(idx, dist, test_len, cfg.vote_samples, len(pos))
    return PredictionTrack(d.activities, grid_ms(start_ms, test_len, cfg.hz), out, idx, dist, ru)


def classify_series(test: UniformSeries, d: Dictionary, workers: int = 1) -> PredictionTrack:
    lab, _, dist, ru = nearest_movelets(test, d, workers=workers)
    idx = smooth_indices(lab, dist, len(test), d.config.vote_samples, len(d.activities))
    return PredictionTrack(d.activities, test.t_ms, idx, lab, dist, ru)


def with_rep(cfg: MoveletConfig, rep: Representation) -> MoveletConfig:
    return replace(cfg, rep=rep)
