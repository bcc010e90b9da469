"""
Bootstrapped TD targets for the decomposed item values and for full-slate Q

Each target accepts precomputed label-network predictions for the next
state so a trainer can evaluate a whole mini-batch in one forward pass.
"""

import itertools
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from ..converters.features import FeatureConverter
from ..environment.choice import ChoiceScores, conditional_probs
from ..models import ScoredItem, Transition
from ..optimizers.slate import ENUMERATION_BUDGET, SlateOptimizer, count_slates
from ..qmodel.network import LabelNetwork, QNetwork
from ..utils.error_handling import EnumerationBudgetError, SlateLabError

Predictor = Union[QNetwork, LabelNetwork]


def _check_clicked(tr: Transition) -> None:
    # Only consumed items carry an item-level value label
    if tr.clicked is None:
        raise SlateLabError("item value targets need a clicked transition")


def _check_bootstrap(tr: Transition) -> None:
    if tr.next_features.shape[0] == 0:
        raise SlateLabError("non-terminal transition is missing its next state")


def slate_expectation(scores: np.ndarray, q: np.ndarray, null_v: float, null_q: float) -> float:
    """
    sum over the slate and null item of P(i | s, A) * Q(s, i)
    """
    probs = conditional_probs(ChoiceScores(np.asarray(scores, dtype=float), null_v))
    return float(probs[:-1] @ np.asarray(q, dtype=float) + probs[-1] * null_q)


def sarsa_target(
    tr: Transition,
    label_net: Predictor,
    gamma: float,
    null_v: float = 1.0,
    null_q: float = 0.0,
    next_q: Optional[np.ndarray] = None,
) -> float:
    """
    r + gamma * sum_{j in A'} P(j | s', A') Q(s', j) over the slate served next

    Args:
        tr: Clicked, completed transition
        label_net: Frozen network for Q(s', j)
        gamma: Discount
        null_v: Choice score of the null item
        null_q: Value of the null item
        next_q: Label predictions for the next slate items, if precomputed
    """
    _check_clicked(tr)
    if tr.terminal or gamma == 0.0:
        return tr.reward
    _check_bootstrap(tr)
    if not tr.next_slate:
        raise SlateLabError("SARSA target needs the slate served at the next state")

    slate = list(tr.next_slate)
    if next_q is None:
        next_q = label_net.predict_batch(tr.next_features[slate])
    expected = slate_expectation(tr.next_scores[slate], next_q, null_v, null_q)
    return tr.reward + gamma * expected


def qlearning_target(
    tr: Transition,
    label_net: Predictor,
    train_opt: SlateOptimizer,
    gamma: float,
    null_v: float = 1.0,
    null_q: float = 0.0,
    next_q: Optional[np.ndarray] = None,
) -> float:
    """
    r + gamma * max_{A'} sum_{j in A'} P(j | s', A') Q(s', j), the max taken by
    `train_opt` over all next-state candidates

    Args:
        next_q: Label predictions for every next candidate, if precomputed
    """
    _check_clicked(tr)
    if tr.terminal or gamma == 0.0:
        return tr.reward
    _check_bootstrap(tr)

    if next_q is None:
        next_q = label_net.predict_batch(tr.next_features)
    items = [ScoredItem(id=i, v=float(v), q=float(q)) for i, (v, q) in enumerate(zip(tr.next_scores, next_q))]
    solution = train_opt(items, tr.slate_features.shape[0], null_v, null_q)
    return tr.reward + gamma * solution.value


@lru_cache(maxsize=32)
def slate_combinations(m: int, k: int, budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """
    (C(m, k), k) array of candidate index tuples in lexicographic order
    """
    count = count_slates(m, k)
    if count > budget:
        raise EnumerationBudgetError(count, budget)
    combos = np.array(list(itertools.combinations(range(m), k)), dtype=int).reshape(count, k)
    combos.flags.writeable = False
    return combos


def fsq_target(
    tr: Transition,
    label_net: Predictor,
    gamma: float,
    num_topics: int,
    next_q: Optional[np.ndarray] = None,
) -> float:
    """
    r + gamma * max over every k-subset A' of the next candidates of Q(s', A')

    Args:
        num_topics: Topic count, needed to build full-slate vectors
        next_q: Label predictions for every enumerated slate, if precomputed
    """
    if tr.terminal or gamma == 0.0:
        return tr.reward
    _check_bootstrap(tr)

    if next_q is None:
        combos = slate_combinations(tr.next_features.shape[0], tr.slate_features.shape[0])
        next_q = label_net.predict_batch(
            FeatureConverter.enumerate_slate_features(tr.next_features, combos, num_topics)
        )
    return tr.reward + gamma * float(np.max(next_q))
