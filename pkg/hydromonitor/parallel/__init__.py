# This file makes the parallel directory a Python package
from hydromonitor.parallel.training import TrainingResult, TrainRunConfig, derive_seeds, run_training
