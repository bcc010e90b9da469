from .config import ExperimentConfig, load_config
from .engine import TrainingEngine, run_suite
from .environment.simulator import SessionSimulator

__all__ = ['ExperimentConfig', 'SessionSimulator', 'TrainingEngine', 'load_config', 'run_suite']
