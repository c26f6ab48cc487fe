import math

import numpy as np
import pytest

from movelets.movelet import Dictionary, MoveletConfig
from movelets.sigcore import FRONT_ACC, Representation, UniformSeries


def brute_nearest(test_values, entries, f):
    """Plain-Python all-pairs scan.

    Returns, per test window, (label, best distance, runner-up distance), where
    the runner-up is the best distance to any other label. Ties go to the
    earliest label, then the earliest movelet.
    """
    out = []
    n = len(test_values) - f + 1
    for i in range(n):
        win = test_values[i : i + f].ravel().tolist()
        per_label = {}
        best = None
        for label, arr in entries.items():
            for m in arr:
                flat = m.ravel().tolist()
                d = math.sqrt(sum((a - b) ** 2 for a, b in zip(win, flat)))
                if label not in per_label or d < per_label[label]:
                    per_label[label] = d
                if best is None or d < best[1]:
                    best = (label, d)
        others = [v for k, v in per_label.items() if k != best[0]]
        out.append((best[0], best[1], min(others) if others else None))
    return out


def brute_smooth(match_labels, match_dists, test_len, horizon, order):
    """Per-sample vote over matches starting at i..i+horizon, clamped to the last
    movelet; ties by smaller summed distance, then by ``order``."""
    last = len(match_labels) - 1
    out = []
    for i in range(test_len):
        lo, hi = min(i, last), min(i + horizon, last)
        counts, sums = {}, {}
        for j in range(lo, hi + 1):
            lab = match_labels[j]
            counts[lab] = counts.get(lab, 0) + 1
            sums[lab] = sums.get(lab, 0.0) + match_dists[j]
        top = max(counts.values())
        tied = [l for l in order if counts.get(l) == top]
        out.append(min(tied, key=lambda l: (sums[l], order.index(l))))
    return out


def random_dictionary(rng, n_labels, n_per, f, rep=Representation.TRIAXIAL, sensor=FRONT_ACC):
    cfg = MoveletConfig(window_seconds=f / 10.0, rep=rep)
    c = rep.n_channels
    labels = ["stand", "walk", "stairUp", "stairDown", "standToSit", "sit", "sitToStand"][:n_labels]
    entries = {l: rng.normal(size=(n_per, f, c)) + k for k, l in enumerate(labels)}
    return Dictionary(sensor, cfg, entries)


def series(values, sensor=FRONT_ACC, hz=10.0, start_ms=0):
    return UniformSeries(sensor, np.asarray(values, dtype=float), hz, start_ms)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = {}


@pytest.fixture
def accept():
    """Record a criterion outcome; the terminal summary lists them all."""

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
