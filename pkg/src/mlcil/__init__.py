"""Multi-label class-incremental learning experiments: asymmetric
distillation, online relabeling of replay memory, and the surrounding
benchmark harness."""

from .benchmark import DESK_SEEDS, desk_config
from .data import Dataset, SynthSpec, TaskSchedule, build_schedule, mask_labels, synth_dataset
from .memory import MemoryBuffer, MemorySample
from .metrics import MetricsReport, MetricsRow, aggregate, average_precision, evaluate
from .net import Classifier, ModelSnapshot, OptimizerState, grad_check, optimizer_step, snapshot
from .trainer import (METHOD_VARIANTS, RunConfig, TrainState, ablation_ladder,
                      run_experiment, train_task)

__all__ = [
    "Classifier", "DESK_SEEDS", "Dataset", "desk_config", "MemoryBuffer", "MemorySample", "MetricsReport",
    "MetricsRow", "METHOD_VARIANTS", "ModelSnapshot", "OptimizerState",
    "RunConfig", "SynthSpec", "TaskSchedule", "TrainState", "aggregate",
    "average_precision", "ablation_ladder", "build_schedule", "evaluate",
    "grad_check", "mask_labels", "optimizer_step", "run_experiment",
    "snapshot", "synth_dataset", "train_task",
]

__version__ = "0.1.0"
