"""Datasets, task schedules, partial-label masking, synthetic generation,
and the CSV on-disk format.

Labels are tri-state throughout: 1 positive, 0 negative, -1 missing. The
full (unmasked) label matrix of a dataset is always definite; masking to a
task's class set is what introduces the missing entries.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetError, ScheduleError
from .losses import MISSING


@dataclass(frozen=True)
class Dataset:
    """Immutable feature/label matrices for one split."""

    features: np.ndarray   # (N, d) float64
    labels: np.ndarray     # (N, C) int8 in {0, 1}
    class_names: tuple[str, ...]
    split: str = "train"

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        l = np.asarray(self.labels, dtype=np.int8)
        if f.ndim != 2 or l.ndim != 2 or f.shape[0] != l.shape[0]:
            raise DatasetError("features and labels must be 2-D with equal row count")
        if l.shape[1] != len(self.class_names):
            raise DatasetError("label columns do not match class names")
        if len(set(self.class_names)) != len(self.class_names):
            raise DatasetError("duplicate class names")
        if not np.all((l == 0) | (l == 1)):
            raise DatasetError("full label matrix must be strictly {0,1}")
        empty = np.flatnonzero(l.sum(axis=1) == 0)
        if empty.size:
            raise DatasetError(f"rows with zero positive labels: {empty.tolist()}")
        f.flags.writeable = False
        l.flags.writeable = False
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", l)

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class TaskSchedule:
    """Ordered partition of class indices into tasks (a {Bx-Cy} split)."""

    tasks: tuple[tuple[int, ...], ...]
    class_names: tuple[str, ...]
    base: int
    increment: int

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)

    def classes_for(self, t: int) -> np.ndarray:
        """Class indices introduced at task t (0-based)."""
        return np.array(self.tasks[t], dtype=np.intp)

    def classes_through(self, t: int) -> np.ndarray:
        """Cumulative class indices over tasks 0..t inclusive; empty for t < 0."""
        if t < 0:
            return np.array([], dtype=np.intp)
        out: list[int] = []
        for task in self.tasks[:t + 1]:
            out.extend(task)
        return np.array(out, dtype=np.intp)


def build_schedule(base: int, increment: int, class_names) -> TaskSchedule:
    """Assign lexicographically sorted classes to tasks: ``base`` classes in
    the first task and ``increment`` per task after that. base == 0 means
    the first task also takes ``increment`` classes."""
    names = list(class_names)
    n = len(names)
    if base < 0 or increment < 1:
        raise ScheduleError(f"invalid schedule spec B{base}-C{increment}")
    first = base if base > 0 else increment
    if first > n or (n - first) % increment != 0:
        raise ScheduleError(
            f"B{base}-C{increment} does not divide {n} classes evenly")
    order = sorted(range(n), key=lambda i: names[i])
    tasks = [tuple(order[:first])]
    for start in range(first, n, increment):
        tasks.append(tuple(order[start:start + increment]))
    return TaskSchedule(tasks=tuple(tasks), class_names=tuple(names),
                        base=base, increment=increment)


def mask_labels(full_labels: np.ndarray, task_classes) -> np.ndarray:
    """Task-level partial labels: keep 0/1 values for the task's classes,
    mark every other class missing. Works on a row or a matrix."""
    full = np.asarray(full_labels)
    out = np.full(full.shape, MISSING, dtype=np.int8)
    idx = np.asarray(task_classes, dtype=np.intp)
    out[..., idx] = full[..., idx]
    return out


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic multi-label generator settings.

    Each class owns Gaussian prototype vectors; a sample's features are the
    sum of one prototype per positive class plus isotropic noise. Positives
    come from one uniformly drawn primary class, an optional co-occurring
    partner, and independent background draws tuned so the mean positive
    count lands near ``target_positives``.
    """

    num_classes: int = 12
    feature_dim: int = 16
    prototypes_per_class: int = 1
    cooccurrence: float = 0.35
    noise_scale: float = 0.3
    train_samples: int = 600
    test_samples: int = 400
    target_positives: float = 2.5
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2 or self.feature_dim < 2:
            raise DatasetError("need num_classes >= 2 and feature_dim >= 2")
        if self.noise_scale < 0:
            raise DatasetError("noise_scale must be >= 0")
        if not 0.0 <= self.cooccurrence <= 1.0:
            raise DatasetError("cooccurrence must be in [0, 1]")
        if self.prototypes_per_class < 1:
            raise DatasetError("prototypes_per_class must be >= 1")


def synth_dataset(spec: SynthSpec) -> tuple[Dataset, Dataset]:
    """Deterministic (train, test) pair from a SynthSpec."""
    rng = np.random.default_rng(spec.seed)
    C, d = spec.num_classes, spec.feature_dim
    protos = rng.normal(0.0, 1.0, size=(C, spec.prototypes_per_class, d))
    names = tuple(f"class{i:02d}" for i in range(C))
    base_rate = max(0.0, (spec.target_positives - 1.0 - spec.cooccurrence)) / max(C - 2, 1)
    base_rate = min(base_rate, 1.0)

    def make_split(n: int, split: str) -> Dataset:
        labels = np.zeros((n, C), dtype=np.int8)
        features = np.zeros((n, d))
        for i in range(n):
            primary = int(rng.integers(C))
            labels[i, primary] = 1
            partner = (primary + 1) % C
            if rng.random() < spec.cooccurrence:
                labels[i, partner] = 1
            for c in range(C):
                if c in (primary, partner):
                    continue
                if rng.random() < base_rate:
                    labels[i, c] = 1
            for c in np.flatnonzero(labels[i]):
                k = int(rng.integers(spec.prototypes_per_class))
                features[i] += protos[c, k]
            if spec.noise_scale > 0:
                features[i] += rng.normal(0.0, spec.noise_scale, size=d)
        return Dataset(features=features, labels=labels,
                       class_names=names, split=split)

    return make_split(spec.train_samples, "train"), make_split(spec.test_samples, "test")


# -- CSV format ---------------------------------------------------------------
# header: f0,...,f{d-1},class:<name>,... ; features decimal text, labels 0/1.

def save_dataset(dataset: Dataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"f{i}" for i in range(dataset.feature_dim)]
        header += [f"class:{name}" for name in dataset.class_names]
        writer.writerow(header)
        for x, y in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in x] + [str(int(v)) for v in y])


def load_dataset(path, split: str = "train") -> Dataset:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        d = 0
        while d < len(header) and header[d] == f"f{d}":
            d += 1
        if d == 0:
            raise DatasetError(f"{path}: header must start with f0,f1,...")
        class_names = []
        for col in header[d:]:
            if not col.startswith("class:"):
                raise DatasetError(f"{path}: malformed header column {col!r}")
            class_names.append(col[len("class:"):])
        if not class_names:
            raise DatasetError(f"{path}: no class columns")
        features, labels = [], []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DatasetError(f"{path}:{rownum}: expected {len(header)} cells")
            try:
                features.append([float(v) for v in row[:d]])
            except ValueError as exc:
                raise DatasetError(f"{path}:{rownum}: bad feature cell ({exc})") from None
            lab = []
            for j, cell in enumerate(row[d:]):
                if cell not in ("0", "1"):
                    raise DatasetError(
                        f"{path}:{rownum}: label cell for class "
                        f"{class_names[j]!r} must be 0 or 1, got {cell!r}")
                lab.append(int(cell))
            labels.append(lab)
        if not features:
            raise DatasetError(f"{path}: no data rows")
    return Dataset(features=np.array(features, dtype=np.float64),
                   labels=np.array(labels, dtype=np.int8),
                   class_names=tuple(class_names), split=split)
