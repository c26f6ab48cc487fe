"""Core sensor-stream types, the magnitude transform and movelet extraction."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SeriesTooShort

DEFAULT_HZ = 10.0


class Position(enum.Enum):
    FRONT_POCKET = "front"
    BACK_POCKET = "back"


class Modality(enum.Enum):
    ACCELEROMETER = "acc"
    GYROSCOPE = "gyro"


class Representation(enum.Enum):
    TRIAXIAL = "triaxial"
    MAGNITUDE = "magnitude"

    @property
    def n_channels(self) -> int:
        return 3 if self is Representation.TRIAXIAL else 1


@dataclass(frozen=True)
class SensorKind:
    position: Position
    modality: Modality

    @property
    def token(self) -> str:
        """CLI token such as ``front-gyro``."""
        return f"{self.position.value}-{self.modality.value}"

    @classmethod
    def parse(cls, token: str) -> "SensorKind":
        try:
            pos, mod = token.strip().lower().split("-")
            return cls(Position(pos), Modality(mod))
        except ValueError:
            raise ValueError(
                f"unknown sensor {token!r}; expected one of "
                + ", ".join(s.token for s in ALL_SENSORS)
            ) from None

    def __str__(self) -> str:
        return self.token


ALL_SENSORS = tuple(SensorKind(p, m) for p in Position for m in Modality)
FRONT_ACC = SensorKind(Position.FRONT_POCKET, Modality.ACCELEROMETER)
FRONT_GYRO = SensorKind(Position.FRONT_POCKET, Modality.GYROSCOPE)
BACK_ACC = SensorKind(Position.BACK_POCKET, Modality.ACCELEROMETER)
BACK_GYRO = SensorKind(Position.BACK_POCKET, Modality.GYROSCOPE)


def n_samples(seconds: float, hz: float) -> int:
    """Number of samples spanned by ``seconds`` at ``hz``, rounded half up."""
    return int(math.floor(seconds * hz + 0.5))


def grid_ms(start_ms: int, n: int, hz: float) -> np.ndarray:
    i = np.arange(n, dtype=np.float64)
    return start_ms + np.floor(1000.0 * i / hz + 0.5).astype(np.int64)


@dataclass(frozen=True)
class Sample:
    t: int
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite sample {self}")


@dataclass(frozen=True, eq=False)
class UniformSeries:
    """Samples on a uniform time grid.

    ``values`` has shape (N, C) with C = 3 for raw tri-axial data and C = 1 for
    a magnitude series. Sample ``i`` sits at ``start_ms + round(1000 * i / hz)``.
    """

    sensor: SensorKind
    values: np.ndarray
    hz: float = DEFAULT_HZ
    start_ms: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[1] not in (1, 3):
            raise ValueError(f"values must have shape (N, 3) or (N, 1), got {values.shape}")
        if not self.hz > 0:
            raise ValueError(f"hz must be positive, got {self.hz}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start_ms", int(self.start_ms))

    @classmethod
    def from_channels(cls, sensor, x, y, z, hz=DEFAULT_HZ, start_ms=0):
        return cls(sensor, np.column_stack([x, y, z]), hz, start_ms)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    @property
    def rep(self) -> Representation:
        return Representation.TRIAXIAL if self.n_channels == 3 else Representation.MAGNITUDE

    @property
    def channels(self) -> tuple:
        return tuple(self.values[:, c] for c in range(self.n_channels))

    @property
    def t_ms(self) -> np.ndarray:
        return grid_ms(self.start_ms, len(self), self.hz)

    @property
    def duration_s(self) -> float:
        return len(self) / self.hz

    def sample(self, i: int) -> Sample:
        if self.n_channels != 3:
            raise ValueError("sample() needs a tri-axial series")
        x, y, z = self.values[i]
        return Sample(int(self.t_ms[i]), float(x), float(y), float(z))

    def slice(self, start: int, stop: int) -> "UniformSeries":
        start_ms = int(self.t_ms[start]) if start < len(self) else self.start_ms
        return UniformSeries(self.sensor, self.values[start:stop], self.hz, start_ms)

    def with_values(self, values) -> "UniformSeries":
        return UniformSeries(self.sensor, values, self.hz, self.start_ms)


@dataclass(frozen=True, eq=False)
class Movelet:
    start_index: int
    rep: Representation
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValueError(f"movelet values must be (f, C) with f >= 1, got {values.shape}")
        if values.shape[1] != self.rep.n_channels:
            raise ValueError(
                f"{self.rep.value} movelet needs {self.rep.n_channels} channels, "
                f"got {values.shape[1]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def f(self) -> int:
        return self.values.shape[0]


def magnitude(s: Sample) -> float:
    return math.sqrt(s.x * s.x + s.y * s.y + s.z * s.z)


def magnitude_values(values: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean norm of an (N, 3) array as an (N, 1) array."""
    v = np.asarray(values, dtype=np.float64)
    # explicit sum of squares keeps sign flips bit-exact
    return np.sqrt(v[:, 0] * v[:, 0] + v[:, 1] * v[:, 1] + v[:, 2] * v[:, 2]).reshape(-1, 1)


def to_magnitude_series(s: UniformSeries) -> UniformSeries:
    if s.n_channels == 1:
        return s
    return s.with_values(magnitude_values(s.values))


def as_representation(s: UniformSeries, rep: Representation) -> UniformSeries:
    if rep is Representation.MAGNITUDE:
        return to_magnitude_series(s)
    if s.n_channels != 3:
        raise ValueError("cannot recover tri-axial data from a magnitude series")
    return s


def window_samples(window_seconds: float, hz: float) -> int:
    f = n_samples(window_seconds, hz)
    if f < 1:
        raise ValueError(f"window of {window_seconds} s at {hz} Hz spans {f} samples")
    return f


def sliding_windows(values: np.ndarray, f: int) -> np.ndarray:
    """All length-``f`` windows of an (N, C) array, copied, shape (N - f + 1, f, C)."""
    n = values.shape[0]
    if n < f:
        raise SeriesTooShort(n, f)
    w = np.lib.stride_tricks.sliding_window_view(values, f, axis=0)
    # sliding_window_view puts the window axis last: (N-f+1, C, f)
    return np.ascontiguousarray(w.transpose(0, 2, 1))


def extract_movelets(s: UniformSeries, window_seconds: float = 1.0) -> list[Movelet]:
    """Slide a window one sample at a time from the first to the last sample."""
    f = window_samples(window_seconds, s.hz)
    windows = sliding_windows(s.values, f)
    rep = s.rep
    return [Movelet(k, rep, w) for k, w in enumerate(windows)]
