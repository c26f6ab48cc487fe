"""Seeded synthetic sessions with known ground truth.

Noise is drawn from numpy's PCG64 generator. Each step of a session gets its
own stream from ``SeedSequence([seed, position, modality]).spawn(n_steps)``,
so a session is reproducible from (script, models, sensor) alone.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Mapping, Optional

import numpy as np

from .errors import ParseError, UnknownLabel
from .evaluation import SegmentSpec
from .ingest import LABEL_RE, Interval, LabeledSeries, LabelTrack, label_runs
from .sigcore import (
    DEFAULT_HZ,
    FRONT_ACC,
    Modality,
    Position,
    SensorKind,
    UniformSeries,
    grid_ms,
    n_samples,
)


class Orientation(enum.Enum):
    CANONICAL = "canonical"
    SCREEN_IN = "screenIn"
    UPSIDE_DOWN = "upsideDown"
    SCREEN_IN_UPSIDE_DOWN = "screenInUpsideDown"

    @property
    def signs(self) -> np.ndarray:
        return np.array(_SIGNS[self], dtype=np.float64)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.signs)

    def compose(self, other: "Orientation") -> "Orientation":
        prod = tuple(self.signs * other.signs)
        return next(o for o, s in _SIGNS.items() if s == prod)


# pi rotations about the phone's y axis (screen toward leg) and z axis (upside down)
_SIGNS = {
    Orientation.CANONICAL: (1.0, 1.0, 1.0),
    Orientation.SCREEN_IN: (-1.0, 1.0, -1.0),
    Orientation.UPSIDE_DOWN: (-1.0, -1.0, 1.0),
    Orientation.SCREEN_IN_UPSIDE_DOWN: (1.0, -1.0, -1.0),
}


def reorient(s: UniformSeries, o: Orientation) -> UniformSeries:
    if s.n_channels != 3:
        raise ValueError("reorient needs a tri-axial series")
    if o is Orientation.CANONICAL:
        return s
    return s.with_values(s.values * o.signs)


def _vec3(v, name):
    a = np.broadcast_to(np.asarray(v, dtype=np.float64), (3,)).copy()
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


@dataclass(frozen=True, eq=False)
class ActivityModel:
    """Per-axis signal model: base + one sinusoid + Gaussian noise.

    ``oscillation`` rows are (amplitude, frequency Hz, phase rad) for x, y, z.
    A ``ramp`` profile moves the base linearly from ``base`` to ``base_end``
    over the step, for posture transitions.
    """

    label: str
    base: np.ndarray
    oscillation: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    noise_sd: np.ndarray = field(default_factory=lambda: np.zeros(3))
    profile: str = "steady"
    base_end: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "base", _vec3(self.base, "base"))
        osc = np.asarray(self.oscillation, dtype=np.float64).reshape(3, 3)
        if np.any(osc[:, 1] < 0):
            raise ValueError(f"{self.label}: oscillation frequencies must be >= 0")
        object.__setattr__(self, "oscillation", osc)
        sd = _vec3(self.noise_sd, "noise_sd")
        if np.any(sd < 0):
            raise ValueError(f"{self.label}: noise_sd must be >= 0")
        object.__setattr__(self, "noise_sd", sd)
        if self.profile not in ("steady", "ramp"):
            raise ValueError(f"{self.label}: unknown profile {self.profile!r}")
        if self.profile == "ramp":
            if self.base_end is None:
                raise ValueError(f"{self.label}: ramp profile needs base_end")
            object.__setattr__(self, "base_end", _vec3(self.base_end, "base_end"))

    def with_noise(self, sd) -> "ActivityModel":
        return replace(self, noise_sd=_vec3(sd, "noise_sd"))

    @classmethod
    def from_json(cls, label, doc) -> "ActivityModel":
        return cls(
            label=label,
            base=doc["base"],
            oscillation=doc.get("oscillation", np.zeros((3, 3))),
            noise_sd=doc.get("noise_sd", 0.0),
            profile=doc.get("profile", "steady"),
            base_end=doc.get("base_end"),
        )

    def to_json(self) -> dict:
        doc = {
            "base": self.base.tolist(),
            "oscillation": self.oscillation.tolist(),
            "noise_sd": self.noise_sd.tolist(),
            "profile": self.profile,
        }
        if self.base_end is not None:
            doc["base_end"] = self.base_end.tolist()
        return doc

    def signal(self, n: int, hz: float, rng: np.random.Generator) -> np.ndarray:
        t = np.arange(n, dtype=np.float64) / hz
        if self.profile == "ramp" and n > 1:
            frac = (np.arange(n, dtype=np.float64) / (n - 1))[:, None]
            base = self.base + frac * (self.base_end - self.base)
        else:
            base = np.broadcast_to(self.base, (n, 3))
        amp, freq, phase = self.oscillation.T
        wave = amp * np.sin(2.0 * np.pi * freq * t[:, None] + phase)
        noise = rng.standard_normal((n, 3)) * self.noise_sd
        return base + wave + noise


def generate_activity(
    model: ActivityModel,
    duration_s: float,
    hz: float = DEFAULT_HZ,
    seed=0,
    sensor: SensorKind = FRONT_ACC,
    start_ms: int = 0,
):
    """One steady bout of ``model``; returns (series, label track)."""
    n = n_samples(duration_s, hz)
    if n < 1:
        raise ValueError(f"{duration_s} s at {hz} Hz is less than one sample")
    rng = np.random.default_rng(seed)
    series = UniformSeries(sensor, model.signal(n, hz, rng), hz, start_ms)
    end_ms = int(grid_ms(start_ms, n + 1, hz)[-1])
    return series, LabelTrack((Interval(start_ms, end_ms, model.label),))


@dataclass(frozen=True)
class Step:
    label: str
    seconds: float
    orientation: Orientation = Orientation.CANONICAL
    model: Optional[str] = None
    segment: Optional[str] = None

    def __post_init__(self):
        if not self.seconds > 0:
            raise ValueError(f"step {self.label!r}: seconds must be positive")
        if isinstance(self.orientation, str):
            object.__setattr__(self, "orientation", Orientation(self.orientation))

    @property
    def model_key(self) -> str:
        return self.model or self.label


@dataclass(frozen=True)
class ProtocolScript:
    steps: tuple
    seed: int = 0
    hz: float = DEFAULT_HZ

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.hz > 0:
            raise ValueError("hz must be positive")

    @property
    def labels(self) -> tuple:
        return tuple(dict.fromkeys(s.label for s in self.steps))

    def with_seed(self, seed: int) -> "ProtocolScript":
        return replace(self, seed=seed)

    def step_bounds(self) -> list[tuple[int, int]]:
        """Sample [start, stop) of every step in the generated session."""
        out, pos = [], 0
        for st in self.steps:
            n = n_samples(st.seconds, self.hz)
            out.append((pos, pos + n))
            pos += n
        return out

    @classmethod
    def from_json(cls, doc) -> "ProtocolScript":
        try:
            steps = []
            for s in doc["steps"]:
                if not LABEL_RE.match(str(s["label"])):
                    raise ParseError(f"bad label token {s['label']!r}")
                steps.append(
                    Step(
                        label=s["label"],
                        seconds=float(s["seconds"]),
                        orientation=s.get("orientation", "canonical"),
                        model=s.get("model"),
                        segment=s.get("segment"),
                    )
                )
            return cls(tuple(steps), int(doc.get("seed", 0)), float(doc.get("hz", DEFAULT_HZ)))
        except ParseError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid protocol script: {exc}") from exc

    def to_json(self) -> dict:
        steps = []
        for s in self.steps:
            d = {"label": s.label, "seconds": s.seconds, "orientation": s.orientation.value}
            if s.model:
                d["model"] = s.model
            if s.segment:
                d["segment"] = s.segment
            steps.append(d)
        return {"hz": self.hz, "seed": self.seed, "steps": steps}


def load_script(path=None) -> ProtocolScript:
    """Load a protocol script from ``path`` or a bundled name such as
    ``training-protocol``."""
    return ProtocolScript.from_json(_load_json(path, "training-protocol"))


def load_models(path=None) -> dict:
    """Activity-model file as ``{modality: {label: ActivityModel}}``."""
    doc = _load_json(path, "activity-models")
    out = {m: {} for m in Modality}
    try:
        for label, per_mod in doc.items():
            for key, mdoc in per_mod.items():
                mod = _MODALITY_KEYS[key]
                out[mod][label] = ActivityModel.from_json(label, mdoc)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"invalid activity-model file: {exc}") from exc
    return out


_MODALITY_KEYS = {
    "accelerometer": Modality.ACCELEROMETER,
    "acc": Modality.ACCELEROMETER,
    "gyroscope": Modality.GYROSCOPE,
    "gyro": Modality.GYROSCOPE,
}

BUNDLED = ("training-protocol", "test-course", "orientation-course", "walking-speeds", "activity-models")


def _load_json(path, default):
    if path is None:
        path = default
    if str(path) in BUNDLED:
        text = resources.files("movelets.data").joinpath(f"{path}.json").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _entropy(seed, sensor):
    pos = list(Position).index(sensor.position)
    mod = list(Modality).index(sensor.modality)
    return np.random.SeedSequence([int(seed), pos, mod])


def generate_session(
    script: ProtocolScript,
    models: Mapping[str, ActivityModel],
    sensor: SensorKind = FRONT_ACC,
    noise_sd=None,
) -> LabeledSeries:
    """Concatenate one reoriented bout per step on a continuous time grid."""
    missing = [s.model_key for s in script.steps if s.model_key not in models]
    if missing:
        raise UnknownLabel(f"no activity model for {sorted(set(missing))}")
    children = _entropy(script.seed, sensor).spawn(len(script.steps))
    chunks, labels = [], []
    bounds = script.step_bounds()
    for st, (lo, hi), ss in zip(script.steps, bounds, children):
        model = models[st.model_key]
        if noise_sd is not None:
            model = model.with_noise(noise_sd)
        values = model.signal(hi - lo, script.hz, np.random.default_rng(ss))
        chunks.append(values * st.orientation.signs)
        labels.extend([st.label] * (hi - lo))
    values = np.concatenate(chunks) if chunks else np.zeros((0, 3))
    series = UniformSeries(sensor, values, script.hz, 0)
    return LabeledSeries(series, tuple(labels))


def session_track(script: ProtocolScript) -> LabelTrack:
    """Ground-truth annotation track for a generated session."""
    bounds = script.step_bounds()
    total = bounds[-1][1] if bounds else 0
    grid = grid_ms(0, total + 1, script.hz)
    merged = []
    for st, (lo, hi) in zip(script.steps, bounds):
        if merged and merged[-1].label == st.label and merged[-1].end_ms == int(grid[lo]):
            merged[-1] = Interval(merged[-1].start_ms, int(grid[hi]), st.label)
        else:
            merged.append(Interval(int(grid[lo]), int(grid[hi]), st.label))
    return LabelTrack(tuple(merged))


def boundary_mask(script: ProtocolScript, margin: int) -> np.ndarray:
    """True for samples at least ``margin`` samples away from every step change."""
    bounds = script.step_bounds()
    total = bounds[-1][1] if bounds else 0
    keep = np.ones(total, dtype=bool)
    for lo, _ in bounds[1:]:
        keep[max(lo - margin, 0) : lo + margin] = False
    return keep


def boundary_segment(script: ProtocolScript, margin: int) -> SegmentSpec:
    """The samples :func:`boundary_mask` drops, as a time segment for exclusion."""
    keep = boundary_mask(script, margin)
    grid = grid_ms(0, len(keep) + 1, script.hz)
    ivs = []
    for lo, hi, k in label_runs(keep.tolist()):
        if not k:
            ivs.append((int(grid[lo]), int(grid[hi])))
    return SegmentSpec("step-boundaries", tuple(ivs), {"margin_samples": margin})


def script_segments(script: ProtocolScript) -> list[SegmentSpec]:
    """One segment per distinct ``segment`` tag, covering the tagged steps."""
    bounds = script.step_bounds()
    total = bounds[-1][1] if bounds else 0
    grid = grid_ms(0, total + 1, script.hz)
    spans: dict = {}
    for st, (lo, hi) in zip(script.steps, bounds):
        if st.segment:
            ivs = spans.setdefault(st.segment, [])
            if ivs and ivs[-1][1] == int(grid[lo]):
                ivs[-1] = (ivs[-1][0], int(grid[hi]))
            else:
                ivs.append((int(grid[lo]), int(grid[hi])))
    out = []
    for name, ivs in spans.items():
        key, _, value = name.partition(":")
        out.append(SegmentSpec(name, tuple(ivs), {key: value} if value else {}))
    return out
