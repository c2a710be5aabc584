"""Replay memory: reservoir behavior, deduplicated storage, relabeling
protocol, and replay sampling."""

import numpy as np
import pytest

from mlcil.data import build_schedule
from mlcil.errors import EmptyBufferError, ProtocolError
from mlcil.losses import MISSING
from mlcil.memory import MemoryBuffer


class StubModel:
    """Forward pass that returns pre-set per-class probabilities."""

    def __init__(self, probs_per_class):
        self.probs = np.asarray(probs_per_class, dtype=np.float64)

    def forward(self, features):
        return np.tile(self.probs, (len(features), 1))


def _labels(num_classes, positives, task_classes):
    full = np.zeros(num_classes, dtype=np.int8)
    full[list(positives)] = 1
    out = np.full(num_classes, MISSING, dtype=np.int8)
    out[list(task_classes)] = full[list(task_classes)]
    return out


def test_capacity_never_exceeded():
    rng = np.random.default_rng(0)
    buf = MemoryBuffer(per_class=3)
    for i in range(200):
        labels = _labels(4, [i % 2], [0, 1])
        buf.reservoir_update(np.array([float(i)]), labels, 0, [0, 1], rng)
    for res in buf._reservoirs.values():
        assert len(res) <= 3
    assert len(buf) <= 6


def test_multi_positive_sample_is_stored_once():
    rng = np.random.default_rng(1)
    buf = MemoryBuffer(per_class=5)
    labels = _labels(4, [0, 1], [0, 1])
    buf.reservoir_update(np.array([1.0]), labels, 0, [0, 1], rng)
    assert len(buf) == 1
    assert buf._reservoirs[0] == buf._reservoirs[1]


def test_zero_capacity_buffer_is_inert():
    rng = np.random.default_rng(2)
    buf = MemoryBuffer(per_class=0)
    buf.reservoir_update(np.array([1.0]), _labels(2, [0], [0, 1]),
                         0, [0, 1], rng)
    assert len(buf) == 0
    with pytest.raises(ValueError):
        MemoryBuffer(per_class=-1)


def test_reservoir_inclusion_probability_is_uniform():
    # every stream item should survive with probability capacity / length
    capacity, stream_len, trials = 3, 30, 4000
    counts = np.zeros(stream_len)
    rng = np.random.default_rng(3)
    for _ in range(trials):
        buf = MemoryBuffer(per_class=capacity)
        for i in range(stream_len):
            buf.reservoir_update(np.array([float(i)]),
                                 _labels(2, [0], [0]), 0, [0], rng)
        for s in buf.samples():
            counts[int(s.features[0])] += 1
    p = capacity / stream_len
    sigma = np.sqrt(p * (1 - p) / trials)
    assert np.all(np.abs(counts / trials - p) <= 4 * sigma)


def test_eviction_keeps_samples_still_referenced_elsewhere():
    rng = np.random.default_rng(4)
    buf = MemoryBuffer(per_class=1)
    # one sample positive for both classes fills both reservoirs
    buf.reservoir_update(np.array([0.0]), _labels(2, [0, 1], [0, 1]),
                         0, [0, 1], rng)
    # flood class 0 until its slot is replaced; the sample must survive
    # through its class-1 reservoir reference
    for i in range(1, 200):
        buf.reservoir_update(np.array([float(i)]), _labels(2, [0], [0, 1]),
                             0, [0, 1], rng)
    assert buf._reservoirs[1] == [0]
    assert 0 in buf._store


def test_sample_replay_uniform_with_replacement():
    rng = np.random.default_rng(5)
    buf = MemoryBuffer(per_class=4)
    for i in range(4):
        buf.reservoir_update(np.array([float(i)]), _labels(2, [0], [0]),
                             0, [0], rng)
    draws = buf.sample_replay(2000, rng)
    assert len(draws) == 2000
    seen = np.array([s.features[0] for s in draws])
    frac = [np.mean(seen == float(i)) for i in range(4)]
    assert all(0.18 < f < 0.32 for f in frac)


def test_sample_replay_empty_buffer_raises():
    with pytest.raises(EmptyBufferError):
        MemoryBuffer(per_class=2).sample_replay(4, np.random.default_rng(0))


# -- relabeling ------------------------------------------------------------------

def _filled_buffer(rng, schedule):
    buf = MemoryBuffer(per_class=2)
    # two samples from task 0 (classes 0,1 annotated), two from task 1
    buf.reservoir_update(np.array([0.0]), _labels(4, [0], [0, 1]), 0, [0, 1], rng)
    buf.reservoir_update(np.array([1.0]), _labels(4, [1], [0, 1]), 0, [0, 1], rng)
    buf.reservoir_update(np.array([2.0]), _labels(4, [2], [2, 3]), 1, [2, 3], rng)
    buf.reservoir_update(np.array([3.0]), _labels(4, [3], [2, 3]), 1, [2, 3], rng)
    return buf


def test_relabel_fills_only_missing_entries():
    rng = np.random.default_rng(6)
    schedule = build_schedule(2, 2, [f"c{i}" for i in range(4)])
    buf = _filled_buffer(rng, schedule)
    before = {s.seq: s.labels.copy() for s in buf.samples()}

    current = StubModel([0.1, 0.1, 0.9, 0.2])  # fills new classes of old samples
    past = StubModel([0.8, 0.3, 0.1, 0.1])     # fills old classes of new samples
    buf.relabel(past, current, schedule, task_index=1, threshold=0.5)

    for s in buf.samples():
        # every entry is now definite
        assert np.all(s.labels != MISSING)
        # insertion-time annotations never change
        was = before[s.seq]
        definite = was != MISSING
        np.testing.assert_array_equal(s.labels[definite], was[definite])
        if s.source_task == 0:
            # current model said class 2 yes, class 3 no
            assert s.labels[2] == 1 and s.labels[3] == 0
        else:
            # past model said class 0 yes, class 1 no
            assert s.labels[0] == 1 and s.labels[1] == 0


def test_relabel_threshold_is_strict():
    rng = np.random.default_rng(7)
    schedule = build_schedule(2, 2, [f"c{i}" for i in range(4)])
    buf = MemoryBuffer(per_class=2)
    buf.reservoir_update(np.array([0.0]), _labels(4, [0], [0, 1]), 0, [0, 1], rng)
    current = StubModel([0.0, 0.0, 0.5, 0.5001])
    buf.relabel(StubModel([0.0] * 4), current, schedule, 1, threshold=0.5)
    sample = buf.samples()[0]
    assert sample.labels[2] == 0   # exactly at threshold: negative
    assert sample.labels[3] == 1   # strictly above: positive


def test_relabel_requires_past_model_for_new_task_samples():
    rng = np.random.default_rng(8)
    schedule = build_schedule(2, 2, [f"c{i}" for i in range(4)])
    buf = MemoryBuffer(per_class=2)
    buf.reservoir_update(np.array([2.0]), _labels(4, [2], [2, 3]), 1, [2, 3], rng)
    with pytest.raises(ProtocolError):
        buf.relabel(None, StubModel([0.5] * 4), schedule, 1, 0.5)


def test_relabel_coverage_grows_task_by_task():
    rng = np.random.default_rng(9)
    schedule = build_schedule(2, 2, [f"c{i}" for i in range(6)])
    buf = MemoryBuffer(per_class=2)
    model = StubModel([0.9] * 6)
    buf.reservoir_update(np.array([0.0]), _labels(6, [0], [0, 1]), 0, [0, 1], rng)
    buf.relabel(None, model, schedule, 0, 0.5)  # nothing to do at task 0
    buf.reservoir_update(np.array([1.0]), _labels(6, [2], [2, 3]), 1, [2, 3], rng)
    buf.relabel(model, model, schedule, 1, 0.5)
    for s in buf.samples():
        annotated = np.flatnonzero(s.labels != MISSING)
        assert list(annotated) == [0, 1, 2, 3]
    buf.reservoir_update(np.array([2.0]), _labels(6, [4], [4, 5]), 2, [4, 5], rng)
    buf.relabel(model, model, schedule, 2, 0.5)
    for s in buf.samples():
        assert np.all(s.labels != MISSING)


def test_dump_csv_marks_missing_labels(tmp_path):
    rng = np.random.default_rng(10)
    buf = MemoryBuffer(per_class=2)
    buf.reservoir_update(np.array([1.5]), _labels(3, [0], [0]), 0, [0], rng)
    path = tmp_path / "dump.csv"
    buf.dump_csv(path, ["a", "b", "c"])
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "f0,class:a,class:b,class:c,source_task"
    assert lines[1] == "1.5,1,?,?,0"
