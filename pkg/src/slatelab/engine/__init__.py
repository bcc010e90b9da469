from .bench import run_fixtures, run_opt_bench, submodularity_gap
from .suite import evaluate_checkpoint, run_suite
from .training_engine import TrainingEngine, TrainingResult

__all__ = [
    'TrainingEngine',
    'TrainingResult',
    'evaluate_checkpoint',
    'run_fixtures',
    'run_opt_bench',
    'run_suite',
    'submodularity_gap',
]
