"""
User choice models over a slate plus the null (no-click) item
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..models import Document, UserState
from ..utils.error_handling import ConfigError, InvalidDistributionError
from .user_model import interest

logger = logging.getLogger(__name__)

CHOICE_MODELS = ('conditional', 'cascade')
CASCADE_MODES = ('sequential', 'marginal')

DEFAULT_NULL_SCORE = 1.0
# Null score of simulated users, calibrated so a random slate policy returns about 160 per session
ENV_NULL_SCORE = 2.5
DEFAULT_SCORE_SHIFT = 1.0

# Tolerance for a probability vector to count as normalized
PROB_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ChoiceScores:
    """
    Unnormalized choice scores of the slate items, in slate order, and of
    the null item
    """
    item_scores: np.ndarray
    null_score: float

    def __post_init__(self) -> None:
        scores = np.asarray(self.item_scores, dtype=float)
        object.__setattr__(self, 'item_scores', scores)
        if scores.ndim != 1:
            raise InvalidDistributionError("item_scores must be a vector")
        if np.any(scores < 0) or self.null_score < 0:
            raise InvalidDistributionError("choice scores must be nonnegative")

    @classmethod
    def of(cls, item_scores: Sequence[float], null_score: float = DEFAULT_NULL_SCORE) -> 'ChoiceScores':
        return cls(np.asarray(item_scores, dtype=float), float(null_score))

    @property
    def k(self) -> int:
        return int(self.item_scores.shape[0])


@dataclass(frozen=True)
class CascadeParams:
    """
    Position-decayed inspection: slot j is inspected with probability
    base_inspect * decay**j
    """
    base_inspect: float = 1.0
    decay: float = 0.65
    mode: str = 'sequential'

    def __post_init__(self) -> None:
        if not 0.0 < self.base_inspect <= 1.0:
            raise ConfigError("base_inspect must lie in (0, 1]", key="env.cascade_base_inspect")
        if not 0.0 < self.decay <= 1.0:
            raise ConfigError("decay must lie in (0, 1]", key="env.cascade_decay")
        if self.mode not in CASCADE_MODES:
            raise ConfigError(
                f"cascade mode must be one of {CASCADE_MODES}, got {self.mode!r}",
                key="env.cascade_mode",
            )


def conditional_probs(scores: ChoiceScores) -> np.ndarray:
    """
    P(i | A) = v_i / (v_null + sum_j v_j); the null probability is last

    Raises:
        InvalidDistributionError: every score is zero
    """
    total = scores.null_score + float(scores.item_scores.sum())
    if total <= 0:
        raise InvalidDistributionError("choice scores are all zero")
    probs = np.empty(scores.k + 1)
    probs[:-1] = scores.item_scores / total
    probs[-1] = scores.null_score / total
    return probs


def cascade_probs(scores: ChoiceScores, params: CascadeParams) -> np.ndarray:
    """
    Exponential cascade over the slate in presentation order

    The conditional-model probability p_j is the base choice probability of
    slot j. In 'sequential' mode the user scans top to bottom and stops at
    the first selection:

        P(j) = b0 * b^j * p_j * prod_{l<j} (1 - b0 * b^l * p_l)

    In 'marginal' mode P(j) = b0 * b^j * p_j. The null item takes the rest.
    """
    base = conditional_probs(scores)[:-1]
    inspect = params.base_inspect * params.decay ** np.arange(scores.k)
    select = inspect * base

    if params.mode == 'sequential':
        reach = np.concatenate([[1.0], np.cumprod(1.0 - select)[:-1]])
        item_probs = select * reach
    else:
        item_probs = select

    probs = np.empty(scores.k + 1)
    probs[:-1] = item_probs
    probs[-1] = max(0.0, 1.0 - float(item_probs.sum()))
    return probs


def sample_choice(probs: np.ndarray, rng: np.random.Generator) -> Optional[int]:
    """
    Categorical draw over slate positions; None stands for no click

    Raises:
        InvalidDistributionError: negative entries or a total off 1
    """
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.shape[0] < 1:
        raise InvalidDistributionError("probabilities must be a non-empty vector")
    if np.any(probs < 0) or abs(float(probs.sum()) - 1.0) > PROB_TOLERANCE:
        raise InvalidDistributionError(f"malformed distribution {probs.tolist()}")

    index = int(np.searchsorted(np.cumsum(probs), rng.random(), side='right'))
    # Guards against rounding in the cumulative sum
    index = min(index, probs.shape[0] - 1)
    while probs[index] == 0.0 and index > 0:
        index -= 1
    if index == probs.shape[0] - 1:
        return None
    return index


def environment_score(user: UserState, doc: Document, shift: float = DEFAULT_SCORE_SHIFT) -> float:
    """
    Relative appeal v = shift + I(u, d), floored at zero
    """
    return max(0.0, shift + interest(user, doc))
