"""Replay memory: per-class reservoir sampling, online relabeling of the
missing label blocks, and replay-batch sampling.

A sample positive for several current-task classes is offered to each of
those per-class reservoirs but stored once; replay sampling deduplicates
through the shared store.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import TaskSchedule
from .errors import EmptyBufferError, ProtocolError
from .losses import MISSING


@dataclass
class MemorySample:
    features: np.ndarray
    labels: np.ndarray          # tri-state int8; grows from C^t to C^{1:t}
    source_task: int
    seq: int                    # insertion sequence number


class MemoryBuffer:
    """Per-class reservoirs over a shared sample store."""

    def __init__(self, per_class: int):
        if per_class < 0:
            raise ValueError("per_class must be >= 0")
        self.per_class = per_class
        self._store: dict[int, MemorySample] = {}
        self._reservoirs: dict[int, list[int]] = {}
        self._stream_counts: dict[int, int] = {}
        self._next_seq = 0

    def __len__(self) -> int:
        return len(self._store)

    def samples(self) -> list[MemorySample]:
        return [self._store[i] for i in sorted(self._store)]

    def reservoir_update(self, features: np.ndarray, labels: np.ndarray,
                         source_task: int, task_classes,
                         rng: np.random.Generator) -> None:
        """Offer one stream sample to the reservoir of every current-task
        class it is positive for. Classic reservoir rule per class: insert
        while below capacity, then replace a uniform slot with probability
        capacity / stream_count."""
        positive = [int(c) for c in np.asarray(task_classes)
                    if labels[int(c)] == 1]
        if self.per_class == 0 or not positive:
            return
        sample_id = self._next_seq
        sample = MemorySample(features=np.asarray(features, dtype=np.float64).copy(),
                              labels=np.asarray(labels, dtype=np.int8).copy(),
                              source_task=source_task, seq=sample_id)
        self._next_seq += 1
        stored = False
        for c in positive:
            res = self._reservoirs.setdefault(c, [])
            count = self._stream_counts.get(c, 0) + 1
            self._stream_counts[c] = count
            if len(res) < self.per_class:
                res.append(sample_id)
                stored = True
            else:
                j = int(rng.integers(count))
                if j < self.per_class:
                    self._evict(res[j])
                    res[j] = sample_id
                    stored = True
        if stored:
            self._store[sample_id] = sample
        # else: rejected by every reservoir, never entered the store

    def _evict(self, sample_id: int) -> None:
        # the caller is about to overwrite one slot; drop from the store only
        # if no other reservoir still references the sample
        refs = sum(res.count(sample_id) for res in self._reservoirs.values())
        if refs <= 1 and sample_id in self._store:
            del self._store[sample_id]

    def relabel(self, past_model, current_model, schedule: TaskSchedule,
                task_index: int, threshold: float) -> None:
        """Complete the missing label blocks after training task ``task_index``.

        Samples stored before this task get the new classes filled in by the
        freshly trained model; samples stored during this task get all old
        classes filled in by the previous model's snapshot. A model
        probability strictly above ``threshold`` becomes a positive label.
        Only missing entries are written; ground truth is never overwritten.
        """
        new_classes = schedule.classes_for(task_index)
        old_classes = schedule.classes_through(task_index - 1)

        older = [s for s in self._store.values() if s.source_task < task_index]
        current = [s for s in self._store.values() if s.source_task == task_index]

        if older:
            self._fill(older, new_classes, current_model, threshold)
        if current and old_classes.size:
            if past_model is None:
                raise ProtocolError(
                    "relabeling task-{} memory over old classes requires the "
                    "previous model snapshot".format(task_index))
            self._fill(current, old_classes, past_model, threshold)

    @staticmethod
    def _fill(samples, class_indices, model, threshold: float) -> None:
        feats = np.stack([s.features for s in samples])
        probs = model.forward(feats)[:, class_indices]
        pseudo = (probs > threshold).astype(np.int8)
        for row, sample in enumerate(samples):
            missing = sample.labels[class_indices] == MISSING
            sample.labels[class_indices[missing]] = pseudo[row, missing]

    def sample_replay(self, batch_size: int,
                      rng: np.random.Generator) -> list[MemorySample]:
        """Uniform with-replacement draw over the deduplicated store."""
        if not self._store:
            raise EmptyBufferError("memory buffer is empty")
        ids = sorted(self._store)
        picks = rng.integers(len(ids), size=batch_size)
        return [self._store[ids[i]] for i in picks]

    def dump_csv(self, path, class_names) -> None:
        """Audit dump; missing labels are written as '?'."""
        path = Path(path)
        with path.open("w") as fh:
            d = 0 if not self._store else next(iter(self._store.values())).features.size
            header = [f"f{i}" for i in range(d)]
            header += [f"class:{n}" for n in class_names]
            header += ["source_task"]
            fh.write(",".join(header) + "\n")
            for sample in self.samples():
                cells = [repr(float(v)) for v in sample.features]
                cells += ["?" if v == MISSING else str(int(v)) for v in sample.labels]
                cells += [str(sample.source_task)]
                fh.write(",".join(cells) + "\n")
