"""
Experiment suites: train every configured agent, evaluate it against the
Random baseline and persist metrics, curves, timings, checkpoints and a
Markdown report
"""

import dataclasses
import logging
import os
import zlib
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from jinja2 import Environment, FileSystemLoader

from ..agents.policies import build_agent
from ..config import ExperimentConfig, config_hash, save_config
from ..environment.simulator import SessionSimulator
from ..models import Metrics, MetricsRow, TrainingCurve, percent_improvement
from ..qmodel.network import load_checkpoint
from ..utils.error_handling import ConfigError
from .training_engine import ProgressCallback, TrainingEngine

logger = logging.getLogger(__name__)

METRICS_COLUMNS = [
    'agent_name', 'avg_return', 'avg_quality', 'pct_return_vs_baseline', 'pct_quality_vs_baseline',
    'train_steps', 'grad_steps', 'seed', 'config_hash',
]
TIMING_COLUMNS = ['agent_name', 'wall_clock_s', 'train_step_wall_us', 'seed', 'config_hash']
CURVE_COLUMNS = ['step', 'raw_return', 'smoothed_return', 'avg_quality', 'high_quality_share', 'seed', 'config_hash']
FLOAT_FORMAT = '%.12g'

# Final evaluations of every agent share one set of user streams
EVAL_STREAM = 7919

template_dir = os.path.join(os.path.dirname(__file__), 'templates')


def agent_rng(seed: int, agent_name: str) -> np.random.Generator:
    """
    Training stream keyed by seed and variant, independent of suite order
    """
    return np.random.default_rng([seed, zlib.crc32(agent_name.encode('utf-8'))])


def final_eval_seed(seed: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, EVAL_STREAM])


def write_metrics(rows: List[MetricsRow], path: Path) -> Path:
    frame = pd.DataFrame([dataclasses.asdict(row) for row in rows], columns=[f.name for f in dataclasses.fields(MetricsRow)])
    frame[METRICS_COLUMNS].to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def write_timings(rows: List[MetricsRow], path: Path) -> Path:
    frame = pd.DataFrame([dataclasses.asdict(row) for row in rows], columns=[f.name for f in dataclasses.fields(MetricsRow)])
    frame[TIMING_COLUMNS].to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def write_curve(curve: TrainingCurve, path: Path, seed: int, digest: str) -> Path:
    frame = pd.DataFrame({
        'step': curve.steps,
        'raw_return': curve.raw_returns,
        'smoothed_return': curve.smoothed_returns,
        'avg_quality': curve.avg_qualities,
        'high_quality_share': curve.high_quality_shares,
    })
    frame['seed'] = seed
    frame['config_hash'] = digest
    frame[CURVE_COLUMNS].to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def relative_to_myopic(rows: List[MetricsRow]) -> Dict[str, Optional[float]]:
    """
    For each LTV agent, how much larger its return improvement over Random
    is than the myopic agent's, in percent
    """
    myopic = [row for row in rows if row.agent_name.startswith('MYOP-')]
    result: Dict[str, Optional[float]] = {}
    for row in rows:
        if row.agent_name == 'RANDOM' or row.agent_name.startswith('MYOP-') or not myopic:
            result[row.agent_name] = None
            continue
        # Prefer the myopic agent with the same serving optimizer
        serve = row.agent_name[-2:]
        reference = next((m for m in myopic if m.agent_name.endswith(serve)), myopic[0])
        result[row.agent_name] = percent_improvement(row.pct_return_vs_baseline, reference.pct_return_vs_baseline)
    return result


def render_report(rows: List[MetricsRow], config: ExperimentConfig, curves: Dict[str, TrainingCurve]) -> str:
    env = Environment(loader=FileSystemLoader(template_dir), trim_blocks=True, lstrip_blocks=True)
    template = env.get_template('report.md.j2')
    final_smoothed = {name: (curve.smoothed_returns[-1] if len(curve) else None) for name, curve in curves.items()}
    return template.render(
        rows=rows,
        seed=config.seed,
        config_hash=config_hash(config),
        env=config.env,
        schedule=config.schedule,
        vs_myopic=relative_to_myopic(rows),
        final_smoothed=final_smoothed,
    )


def run_suite(
    config: ExperimentConfig,
    out_dir: Union[str, Path],
    progress_callback: Optional[ProgressCallback] = None,
) -> List[MetricsRow]:
    """
    Train and evaluate each agent of the suite, Random first

    Files are rewritten after every completed agent so an interrupted suite
    keeps its finished rows.

    Args:
        config: Experiment config
        out_dir: Output directory, created if missing
        progress_callback: Forwarded to the training engine

    Returns:
        One metrics row per agent, in run order
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config)
    save_config(config, out / 'config.env')

    simulator = SessionSimulator.from_config(config.env)
    engine = TrainingEngine(simulator, config.qmodel, config.schedule)
    logger.info("Running suite %s with seed %d into %s", digest, config.seed, out)

    rows: List[MetricsRow] = []
    curves: Dict[str, TrainingCurve] = {}
    baseline: Optional[Metrics] = None

    for agent_config in config.agent_configs():
        rng = agent_rng(config.seed, agent_config.name)
        agent = build_agent(agent_config, simulator, config.qmodel, rng)
        result = engine.run_training(agent, rng, progress_callback)
        metrics = engine.evaluate(agent, config.schedule.final_eval_users, final_eval_seed(config.seed))
        if baseline is None:
            baseline = metrics
        pct_return, pct_quality = metrics.pct_vs(baseline)

        row = MetricsRow(
            agent_name=agent.name,
            avg_return=metrics.avg_return,
            avg_quality=metrics.avg_quality,
            pct_return_vs_baseline=pct_return,
            pct_quality_vs_baseline=pct_quality,
            train_steps=result.train_steps,
            grad_steps=result.grad_steps,
            seed=config.seed,
            config_hash=digest,
            wall_clock_s=result.wall_clock_s,
            train_step_wall_us=result.train_step_wall_us,
        )
        rows.append(row)
        curves[agent.name] = result.curve
        logger.info(
            "%s: avg return %.3f (%+.2f%%), avg quality %.4f (%+.2f%%)",
            row.agent_name, row.avg_return, pct_return, row.avg_quality, pct_quality,
        )

        write_curve(result.curve, out / f"curve_{agent.name}.csv", config.seed, digest)
        if agent_config.learns:
            agent.save(out / f"{agent.name}.npz", seed=config.seed, config_hash=digest)
        write_metrics(rows, out / 'metrics.csv')
        write_timings(rows, out / 'timings.csv')

    (out / 'report.md').write_text(render_report(rows, config, curves), encoding='utf-8')
    logger.info("Suite %s completed, results in %s", digest, out)
    return rows


def evaluate_checkpoint(
    config: ExperimentConfig,
    checkpoint: Union[str, Path],
    n_users: Optional[int] = None,
) -> Metrics:
    """
    Evaluate a saved network on the config's environment

    The variant is read from the checkpoint metadata.
    """
    _, meta = load_checkpoint(checkpoint)
    variant = meta.get('variant')
    if not variant:
        raise ConfigError(f"checkpoint {checkpoint} does not name its variant", key="agents")

    agent_config = config.agent_config(variant)
    simulator = SessionSimulator.from_config(config.env)
    engine = TrainingEngine(simulator, config.qmodel, config.schedule)
    agent = build_agent(agent_config, simulator, config.qmodel, np.random.default_rng(config.seed), checkpoint=checkpoint)
    users = n_users or config.schedule.final_eval_users
    logger.info("Evaluating %s from %s on %d users", variant, checkpoint, users)
    return engine.evaluate(agent, users, final_eval_seed(config.seed))
