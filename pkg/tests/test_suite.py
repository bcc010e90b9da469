import dataclasses

import pandas as pd
import pytest

from slatelab.config import config_hash, load_config
from slatelab.engine.suite import evaluate_checkpoint, relative_to_myopic, run_suite
from slatelab.models import MetricsRow, percent_improvement
from slatelab.qmodel.network import load_checkpoint


def test_suite_writes_every_file(tiny_config, tmp_path):
    rows = run_suite(tiny_config, tmp_path)
    assert [row.agent_name for row in rows] == ['RANDOM', 'MYOP-TS', 'SARSA-TS']
    names = {path.name for path in tmp_path.iterdir()}
    assert {'metrics.csv', 'timings.csv', 'report.md', 'config.env'} <= names
    assert {'curve_RANDOM.csv', 'curve_MYOP-TS.csv', 'curve_SARSA-TS.csv'} <= names
    assert {'MYOP-TS.npz', 'SARSA-TS.npz'} <= names
    assert 'RANDOM.npz' not in names
    for variant in ('MYOP-TS', 'SARSA-TS'):
        _, meta = load_checkpoint(tmp_path / f"{variant}.npz")
        assert meta['variant'] == variant
        assert meta['seed'] == tiny_config.seed
        assert meta['config_hash'] == config_hash(tiny_config)


def test_metrics_columns_and_percentages(tiny_config, tmp_path):
    run_suite(tiny_config, tmp_path)
    metrics = pd.read_csv(tmp_path / 'metrics.csv')
    assert list(metrics.columns) == [
        'agent_name', 'avg_return', 'avg_quality', 'pct_return_vs_baseline', 'pct_quality_vs_baseline',
        'train_steps', 'grad_steps', 'seed', 'config_hash',
    ]
    baseline = metrics.iloc[0]
    assert baseline['pct_return_vs_baseline'] == 0.0
    for _, row in metrics.iterrows():
        assert row['pct_return_vs_baseline'] == pytest.approx(
            percent_improvement(row['avg_return'], baseline['avg_return']), abs=1e-9)
        assert row['pct_quality_vs_baseline'] == pytest.approx(
            percent_improvement(row['avg_quality'], baseline['avg_quality']), abs=1e-9)
    assert set(metrics['seed']) == {tiny_config.seed}
    assert set(metrics['config_hash']) == {config_hash(tiny_config)}

    timings = pd.read_csv(tmp_path / 'timings.csv')
    assert list(timings.columns) == ['agent_name', 'wall_clock_s', 'train_step_wall_us', 'seed', 'config_hash']

    curve = pd.read_csv(tmp_path / 'curve_SARSA-TS.csv')
    assert list(curve.columns) == [
        'step', 'raw_return', 'smoothed_return', 'avg_quality', 'high_quality_share', 'seed', 'config_hash',
    ]
    assert curve['step'].tolist() == [100, 200, 300]


def test_rerun_is_byte_identical(tiny_config, tmp_path):
    run_suite(tiny_config, tmp_path / 'a')
    run_suite(tiny_config, tmp_path / 'b')
    assert (tmp_path / 'a' / 'metrics.csv').read_bytes() == (tmp_path / 'b' / 'metrics.csv').read_bytes()
    assert (tmp_path / 'a' / 'curve_SARSA-TS.csv').read_bytes() == (tmp_path / 'b' / 'curve_SARSA-TS.csv').read_bytes()


def test_saved_config_replays(tiny_config, tmp_path):
    run_suite(tiny_config, tmp_path)
    assert load_config(tmp_path / 'config.env') == tiny_config


def test_random_baseline_added(tiny_config, tmp_path):
    config = dataclasses.replace(tiny_config, agents=('MYOP-TS',))
    rows = run_suite(config, tmp_path)
    assert [row.agent_name for row in rows] == ['RANDOM', 'MYOP-TS']


def test_report_mentions_every_agent(tiny_config, tmp_path):
    run_suite(tiny_config, tmp_path)
    report = (tmp_path / 'report.md').read_text()
    for name in ('RANDOM', 'MYOP-TS', 'SARSA-TS'):
        assert f"| {name} |" in report
    assert config_hash(tiny_config) in report


def test_cascade_suite_runs(tiny_config, tmp_path):
    env = dataclasses.replace(tiny_config.env, choice_model='cascade')
    rows = run_suite(dataclasses.replace(tiny_config, env=env), tmp_path)
    assert len(rows) == 3


def test_checkpoint_evaluation_matches_suite(tiny_config, tmp_path):
    rows = run_suite(tiny_config, tmp_path)
    metrics = evaluate_checkpoint(tiny_config, tmp_path / 'SARSA-TS.npz')
    assert metrics.avg_return == pytest.approx(rows[-1].avg_return)
    assert metrics.avg_quality == pytest.approx(rows[-1].avg_quality)


def row(name, pct):
    return MetricsRow(name, 0.0, 0.0, pct, 0.0, 0, 0, 0, 'x')


def test_improvement_relative_to_myopic():
    rows = [row('RANDOM', 0.0), row('MYOP-TS', 4.0), row('SARSA-TS', 6.0), row('QL-OT-GS', 5.0)]
    result = relative_to_myopic(rows)
    assert result['RANDOM'] is None
    assert result['MYOP-TS'] is None
    assert result['SARSA-TS'] == pytest.approx(50.0)
    assert result['QL-OT-GS'] == pytest.approx(25.0)
