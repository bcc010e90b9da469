"""
Slate optimizer checks: hand-built counterexamples where the heuristics
fall short, and a seeded correctness/latency micro-benchmark against
exhaustive enumeration
"""

import logging
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..models import ScoredItem
from ..optimizers.slate import brute_force_slate, get_optimizer, slate_value

logger = logging.getLogger(__name__)

VALUE_TOLERANCE = 1e-9
FIXTURE_TOLERANCE = 1e-12
EXACT_OPTIMIZERS = ('exact', 'lp')


@dataclass(frozen=True)
class SlateFixture:
    """
    Named optimizer instance with the expected value per optimizer
    """
    name: str
    labels: Tuple[str, ...]
    items: Tuple[ScoredItem, ...]
    k: int
    null_v: float
    null_q: float
    expected: Dict[str, float]

    def label(self, ids: Sequence[int]) -> str:
        return '{' + ', '.join(self.labels[i] for i in ids) + '}'


@dataclass(frozen=True)
class FixtureVerdict:
    fixture: str
    optimizer: str
    slate: str
    value: float
    expected: float

    @property
    def ok(self) -> bool:
        return abs(self.value - self.expected) <= FIXTURE_TOLERANCE


def heuristic_trap() -> SlateFixture:
    """
    One high-product item a and two moderate items b1, b2: score-ordered
    heuristics commit to a, the best pair is {b1, b2}
    """
    items = (ScoredItem(0, 2.0, 0.8), ScoredItem(1, 1.0, 1.0), ScoredItem(2, 1.0, 1.0))
    return SlateFixture(
        name='heuristic_trap',
        labels=('a', 'b1', 'b2'),
        items=items,
        k=2,
        null_v=1.0,
        null_q=0.0,
        expected={'top_k': 2.6 / 4, 'greedy': 2.6 / 4, 'exact': 2 / 3, 'lp': 2 / 3, 'brute_force': 2 / 3},
    )


def unbounded_gap(epsilon: float = 0.01) -> SlateFixture:
    """
    Null item and a both have score epsilon; top-k's value ratio to the
    optimum vanishes as epsilon goes to zero. b carries the smaller id so
    it wins the product tie.
    """
    items = (ScoredItem(0, 1.0, epsilon), ScoredItem(1, epsilon, 1.0))
    return SlateFixture(
        name='unbounded_gap',
        labels=('b', 'a'),
        items=items,
        k=1,
        null_v=epsilon,
        null_q=0.0,
        expected={
            'top_k': epsilon / (1 + epsilon),
            'greedy': 0.5,
            'exact': 0.5,
            'lp': 0.5,
            'brute_force': 0.5,
        },
    )


def submodularity_gap(epsilon: float = 0.01) -> Tuple[float, float]:
    """
    Marginal gain of a on the empty slate and on {b}, with a valuable null item

    The slate value is not submodular when the first is smaller than the second.
    """
    null_v, null_q = 1.0, 10.0
    a = ScoredItem(0, 1.0, 10.0)
    b = ScoredItem(1, 2.0, epsilon)
    empty = slate_value([], null_v, null_q)
    gain_on_empty = slate_value([a], null_v, null_q) - empty
    gain_on_b = slate_value([a, b], null_v, null_q) - slate_value([b], null_v, null_q)
    return gain_on_empty, gain_on_b


def run_fixtures(epsilon: float = 0.01) -> List[FixtureVerdict]:
    verdicts = []
    for fixture in (heuristic_trap(), unbounded_gap(epsilon)):
        for name, expected in fixture.expected.items():
            solution = get_optimizer(name)(fixture.items, fixture.k, fixture.null_v, fixture.null_q)
            verdicts.append(FixtureVerdict(
                fixture=fixture.name,
                optimizer=name,
                slate=fixture.label(solution.items),
                value=solution.value,
                expected=expected,
            ))
    return verdicts


def random_instance(
    rng: np.random.Generator,
    m_range: Tuple[int, int] = (4, 12),
    k_range: Tuple[int, int] = (1, 4),
) -> Tuple[List[ScoredItem], int]:
    """
    Items with v in [0, 2] and q in [-3, 5]; m and k drawn inclusively
    """
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    k = int(rng.integers(k_range[0], min(k_range[1], m) + 1))
    v = rng.uniform(0.0, 2.0, size=m)
    q = rng.uniform(-3.0, 5.0, size=m)
    return [ScoredItem(id=i, v=float(v[i]), q=float(q[i])) for i in range(m)], k


@dataclass
class BenchRow:
    optimizer: str
    instances: int
    mismatches: int
    max_regret: float
    mean_latency_us: float


def run_opt_bench(
    n_instances: int = 1000,
    seed: int = 0,
    optimizers: Sequence[str] = ('exact', 'lp', 'greedy', 'top_k'),
    null_v: float = 1.0,
    null_q: float = 0.0,
    progress_callback=None,
) -> pd.DataFrame:
    """
    Compare optimizers against brute force on seeded random instances

    A mismatch is a different chosen set or a value off by more than
    1e-9. Only the exact methods are expected to have none.

    Returns:
        One row per optimizer plus the brute-force reference
    """
    rng = np.random.default_rng(seed)
    instances = [random_instance(rng) for _ in range(n_instances)]

    reference = []
    tick = time.perf_counter()
    for items, k in instances:
        reference.append(brute_force_slate(items, k, null_v, null_q))
    rows = [BenchRow('brute_force', n_instances, 0, 0.0, (time.perf_counter() - tick) / n_instances * 1e6)]

    for position, name in enumerate(optimizers):
        optimizer = get_optimizer(name)
        mismatches = 0
        max_regret = 0.0
        elapsed = 0.0
        for (items, k), best in zip(instances, reference):
            tick = time.perf_counter()
            solution = optimizer(items, k, null_v, null_q)
            elapsed += time.perf_counter() - tick
            regret = best.value - solution.value
            max_regret = max(max_regret, regret)
            if abs(regret) > VALUE_TOLERANCE or set(solution.items) != set(best.items):
                mismatches += 1
        rows.append(BenchRow(name, n_instances, mismatches, max_regret, elapsed / n_instances * 1e6))
        logger.info("%s: %d mismatches over %d instances, max regret %.3g", name, mismatches, n_instances, max_regret)
        if progress_callback:
            progress_callback(position + 1, len(optimizers), f"Benchmarked {name}")

    return pd.DataFrame([row.__dict__ for row in rows])


def exact_mismatches(report: pd.DataFrame, exact: Optional[Sequence[str]] = EXACT_OPTIMIZERS) -> int:
    return int(report.loc[report['optimizer'].isin(list(exact)), 'mismatches'].sum())
