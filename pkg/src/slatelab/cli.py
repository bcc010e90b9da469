"""
Command line front end

    slatelab run <config> [--out DIR] [--seed N] [--paper-scale]
    slatelab eval <config> <checkpoint> [--users N]
    slatelab opt-bench [--instances N] [--seed N]
    slatelab fixtures [--epsilon E]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from tqdm import tqdm

from .config import load_config
from .engine.bench import exact_mismatches, run_fixtures, run_opt_bench, submodularity_gap
from .engine.suite import evaluate_checkpoint, run_suite
from .utils.error_handling import handle_cli_errors, setup_logging

logger = logging.getLogger(__name__)


class ProgressBar:
    """
    Adapts a tqdm bar to the engine's (current, total, description) callback
    """

    def __init__(self, disable: bool = False):
        self.disable = disable
        self._bar: Optional[tqdm] = None

    def __call__(self, current: float, total: float, description: str) -> None:
        if self._bar is None or self._bar.total != total or current < self._bar.n:
            self.close()
            self._bar = tqdm(total=total, disable=self.disable, file=sys.stderr, leave=False)
        self._bar.set_description(description)
        self._bar.update(current - self._bar.n)

    def close(self) -> None:
        if self._bar is not None:
            self._bar.close()
            self._bar = None


@handle_cli_errors
def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config).with_overrides(seed=args.seed, paper_scale=args.paper_scale)
    progress = ProgressBar(disable=args.quiet)
    try:
        rows = run_suite(config, args.out, progress_callback=progress)
    finally:
        progress.close()
    for row in rows:
        print(
            f"{row.agent_name:<12} return {row.avg_return:9.3f} ({row.pct_return_vs_baseline:+7.2f}%)  "
            f"quality {row.avg_quality:8.4f} ({row.pct_quality_vs_baseline:+7.2f}%)"
        )
    print(f"results written to {Path(args.out).resolve()}")
    return 0


@handle_cli_errors
def cmd_eval(args: argparse.Namespace) -> int:
    config = load_config(args.config).with_overrides(seed=args.seed)
    if not Path(args.checkpoint).is_file():
        raise FileNotFoundError(2, "checkpoint not found", args.checkpoint)
    metrics = evaluate_checkpoint(config, args.checkpoint, n_users=args.users)
    print(f"users {metrics.n_users}  clicks {metrics.n_clicks}")
    print(f"avg_return {metrics.avg_return:.4f}")
    print(f"avg_quality {metrics.avg_quality:.4f}")
    print(f"high_quality_share {metrics.high_quality_share:.4f}")
    return 0


@handle_cli_errors
def cmd_opt_bench(args: argparse.Namespace) -> int:
    report = run_opt_bench(n_instances=args.instances, seed=args.seed)
    print(report.to_string(index=False))
    mismatches = exact_mismatches(report)
    print(f"exact-method mismatches: {mismatches}")
    return 0 if mismatches == 0 else 1


@handle_cli_errors
def cmd_fixtures(args: argparse.Namespace) -> int:
    verdicts = run_fixtures(args.epsilon)
    for verdict in verdicts:
        status = 'ok' if verdict.ok else 'FAIL'
        print(
            f"{verdict.fixture:<16} {verdict.optimizer:<12} {verdict.slate:<10} "
            f"value {verdict.value:.12f} expected {verdict.expected:.12f} {status}"
        )
    on_empty, on_b = submodularity_gap(args.epsilon)
    violated = on_empty < on_b
    print(f"submodularity    gain of a: {on_empty:.12f} on empty, {on_b:.12f} on {{b}} -> "
          f"{'violated' if violated else 'holds'}")
    return 0 if violated and all(v.ok for v in verdicts) else 1


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    'run': cmd_run,
    'eval': cmd_eval,
    'opt-bench': cmd_opt_bench,
    'fixtures': cmd_fixtures,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='slatelab',
        description="Slate recommendation RL experiments with SlateQ decomposition",
    )
    parser.add_argument('-v', '--verbose', action='store_true', help="Debug logging")
    parser.add_argument('--log-file', help="Also write logs to this file")
    parser.add_argument('-q', '--quiet', action='store_true', help="No progress bars")
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help="Train and evaluate every agent of a suite")
    run.add_argument('config', help="Experiment config file")
    run.add_argument('--out', default='results', help="Output directory (default: results)")
    run.add_argument('--seed', type=int, default=None, help="Override the config seed")
    run.add_argument('--paper-scale', action='store_true', help="300K training steps and 5000 evaluation users")

    evaluate = sub.add_parser('eval', help="Evaluate a saved checkpoint")
    evaluate.add_argument('config', help="Experiment config file")
    evaluate.add_argument('checkpoint', help="Network checkpoint (.npz)")
    evaluate.add_argument('--users', type=int, default=None, help="Evaluation users (default: schedule.final_eval_users)")
    evaluate.add_argument('--seed', type=int, default=None, help="Override the config seed")

    bench = sub.add_parser('opt-bench', help="Slate optimizer correctness and latency")
    bench.add_argument('--instances', type=int, default=1000, help="Random instances (default: 1000)")
    bench.add_argument('--seed', type=int, default=0, help="Instance seed (default: 0)")

    fixtures = sub.add_parser('fixtures', help="Counterexamples for the heuristic optimizers")
    fixtures.add_argument('--epsilon', type=float, default=0.01, help="Small score in the gap fixtures (default: 0.01)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_file, logging.DEBUG if args.verbose else logging.WARNING)
    logger.debug("Running %s", args.command)
    return COMMANDS[args.command](args)
