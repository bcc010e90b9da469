"""
Slate optimization for the decomposed slate value

    V(A) = (v_null * q_null + sum_{i in A} v_i q_i) / (v_null + sum_{i in A} v_i)

maximized over slates of exactly k items. Ties are broken by item id
everywhere so results are reproducible.
"""

import itertools
import logging
import math
from typing import Callable, Dict, List, Sequence

import numpy as np
from scipy.optimize import linprog

from ..models import ScoredItem, SlateSolution
from ..utils.error_handling import (
    DegenerateSlateError,
    EnumerationBudgetError,
    InfeasibleSlateError,
    SlateLabError,
)

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10 ** 6
DINKELBACH_MAX_ITER = 200

SlateOptimizer = Callable[[Sequence[ScoredItem], int, float, float], SlateSolution]


def slate_value(chosen: Sequence[ScoredItem], null_v: float, null_q: float) -> float:
    """
    Expected LTV of a slate under the conditional choice model

    Raises:
        DegenerateSlateError: null and item scores sum to zero
    """
    numerator = null_v * null_q
    denominator = null_v
    for item in chosen:
        numerator += item.v * item.q
        denominator += item.v
    if denominator <= 0:
        raise DegenerateSlateError("slate value undefined: total choice score is zero")
    return numerator / denominator


def _check_feasible(items: Sequence[ScoredItem], k: int) -> None:
    if k < 0 or len(items) < k:
        raise InfeasibleSlateError(k, len(items))


def _by_product(items: Sequence[ScoredItem]) -> List[ScoredItem]:
    return sorted(items, key=lambda item: (-item.v * item.q, item.id))


def _solution(chosen: Sequence[ScoredItem], null_v: float, null_q: float) -> SlateSolution:
    # Served order is descending v * q
    ordered = _by_product(chosen)
    return SlateSolution(
        items=tuple(item.id for item in ordered),
        value=slate_value(ordered, null_v, null_q),
    )


def topk_slate(items: Sequence[ScoredItem], k: int, null_v: float, null_q: float) -> SlateSolution:
    """
    The k items with the largest v * q
    """
    _check_feasible(items, k)
    return _solution(_by_product(items)[:k], null_v, null_q)


def greedy_slate(items: Sequence[ScoredItem], k: int, null_v: float, null_q: float) -> SlateSolution:
    """
    Add, one at a time, the item with the largest resulting slate value

    Items keep insertion order.
    """
    _check_feasible(items, k)
    remaining = sorted(items, key=lambda item: item.id)
    chosen: List[ScoredItem] = []
    numerator = null_v * null_q
    denominator = null_v

    for _ in range(k):
        best_index = -1
        best_value = -math.inf
        for index, item in enumerate(remaining):
            total = denominator + item.v
            if total <= 0:
                continue
            value = (numerator + item.v * item.q) / total
            if value > best_value:
                best_index, best_value = index, value
        if best_index < 0:
            # Every remaining addition is degenerate; fall back to smallest id
            best_index = 0
        item = remaining.pop(best_index)
        chosen.append(item)
        numerator += item.v * item.q
        denominator += item.v

    return SlateSolution(
        items=tuple(item.id for item in chosen),
        value=slate_value(chosen, null_v, null_q),
    )


def exact_slate(items: Sequence[ScoredItem], k: int, null_v: float, null_q: float) -> SlateSolution:
    """
    Globally optimal k-slate by parametric (Dinkelbach) search

    For a trial value lam the best slate maximizes
    sum_{i in A} v_i (q_i - lam), which is a top-k selection. The trial value
    is replaced by the value of that slate until it no longer improves; at
    that point no slate is worth more than lam.
    """
    _check_feasible(items, k)
    if k == len(items):
        return _solution(items, null_v, null_q)

    best = _by_product(items)[:k]
    lam = slate_value(best, null_v, null_q)

    for _ in range(DINKELBACH_MAX_ITER):
        chosen = sorted(items, key=lambda item: (-item.v * (item.q - lam), item.id))[:k]
        value = slate_value(chosen, null_v, null_q)
        if value <= lam + 1e-12 * max(1.0, abs(lam)):
            break
        best, lam = chosen, value
    else:
        logger.warning("Parametric slate search hit %d iterations", DINKELBACH_MAX_ITER)

    return _solution(best, null_v, null_q)


def lp_slate(items: Sequence[ScoredItem], k: int, null_v: float, null_q: float) -> SlateSolution:
    """
    Optimal k-slate from the Charnes-Cooper linear program

    With y_i = x_i * t and t = 1 / (v_null + sum_j x_j v_j) the fractional
    program becomes

        max  sum_i v_i q_i y_i + v_null q_null t
        s.t. v_null t + sum_i v_i y_i = 1
             sum_i y_i = k t
             0 <= y_i <= t

    whose vertex solutions are integral in x = y / t.
    """
    _check_feasible(items, k)
    m = len(items)
    if k == m:
        return _solution(items, null_v, null_q)

    v = np.array([item.v for item in items], dtype=float)
    q = np.array([item.q for item in items], dtype=float)

    objective = -np.concatenate([v * q, [null_v * null_q]])
    a_eq = np.vstack([
        np.concatenate([v, [null_v]]),
        np.concatenate([np.ones(m), [-float(k)]]),
    ])
    b_eq = np.array([1.0, 0.0])
    a_ub = np.hstack([np.eye(m), -np.ones((m, 1))])
    b_ub = np.zeros(m)

    result = linprog(
        objective, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
        bounds=[(0, None)] * (m + 1), method='highs-ds',
    )
    if not result.success or result.x[-1] <= 0:
        raise SlateLabError(f"slate LP failed: {result.message}")

    selection = result.x[:m] / result.x[-1]
    order = sorted(range(m), key=lambda i: (-selection[i], items[i].id))
    return _solution([items[i] for i in order[:k]], null_v, null_q)


def count_slates(m: int, k: int) -> int:
    return math.comb(m, k)


def brute_force_slate(
    items: Sequence[ScoredItem],
    k: int,
    null_v: float,
    null_q: float,
    budget: int = ENUMERATION_BUDGET,
) -> SlateSolution:
    """
    Exhaustive search over every unordered k-subset

    Among equal values the lexicographically smallest id tuple wins.

    Raises:
        EnumerationBudgetError: C(m, k) exceeds the budget
    """
    _check_feasible(items, k)
    count = count_slates(len(items), k)
    if count > budget:
        raise EnumerationBudgetError(count, budget)

    by_id = sorted(items, key=lambda item: item.id)
    best: Sequence[ScoredItem] = ()
    best_value = -math.inf
    for subset in itertools.combinations(by_id, k):
        value = slate_value(subset, null_v, null_q)
        if value > best_value:
            best, best_value = subset, value
    return _solution(best, null_v, null_q)


OPTIMIZERS: Dict[str, SlateOptimizer] = {
    'top_k': topk_slate,
    'greedy': greedy_slate,
    'exact': exact_slate,
    'lp': lp_slate,
    'brute_force': brute_force_slate,
}


def get_optimizer(name: str) -> SlateOptimizer:
    """
    Look up an optimizer by its configuration string
    """
    try:
        return OPTIMIZERS[name]
    except KeyError:
        raise SlateLabError(
            f"unknown slate optimizer {name!r}; expected one of {sorted(OPTIMIZERS)}"
        ) from None
