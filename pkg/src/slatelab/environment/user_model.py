"""
User state and its dynamics: interest, satisfaction, budget and interest nudges
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..models import Document, UserState
from ..utils.error_handling import ConfigError, TerminatedUserError

logger = logging.getLogger(__name__)

NUDGE_MODES = ('prose', 'literal')


@dataclass(frozen=True)
class DynamicsParams:
    """
    Session budget, satisfaction mix and interest-nudge parameters
    """
    initial_budget: float = 200.0
    doc_length: float = 4.0
    no_click_cost: float = 0.5
    bonus_coeff: float = 0.9 / 3.4
    alpha: float = 1.0
    nudge_fraction: float = 0.3
    click_reward: Optional[float] = None
    nudge_mode: str = 'prose'

    def __post_init__(self) -> None:
        if self.initial_budget <= 0:
            raise ConfigError("initial_budget must be positive", key="env.initial_budget")
        if self.doc_length <= 0:
            raise ConfigError("doc_length must be positive", key="env.doc_length")
        if self.no_click_cost <= 0:
            raise ConfigError("no_click_cost must be positive", key="env.no_click_cost")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]", key="env.alpha")
        if not 0.0 <= self.nudge_fraction <= 1.0:
            raise ConfigError("nudge_fraction must lie in [0, 1]", key="env.nudge_fraction")
        if self.nudge_mode not in NUDGE_MODES:
            raise ConfigError(
                f"nudge_mode must be one of {NUDGE_MODES}, got {self.nudge_mode!r}",
                key="env.nudge_mode",
            )

    @property
    def reward_per_click(self) -> float:
        return self.doc_length if self.click_reward is None else self.click_reward

    def check_bonus_bound(self, quality_clamp: float) -> None:
        """
        The engagement bonus must stay below the document length for every
        reachable satisfaction value
        """
        max_satisfaction = (1.0 - self.alpha) * 1.0 + self.alpha * quality_clamp
        if abs(self.bonus_coeff) * self.doc_length * max_satisfaction >= self.doc_length:
            raise ConfigError(
                "bonus_coeff * doc_length * max|S| must stay below doc_length",
                key="env.bonus_coeff",
            )


def sample_user(params: DynamicsParams, num_topics: int, rng: np.random.Generator) -> UserState:
    """
    Fresh user with i.i.d. Uniform[-1, 1] interests and a full budget
    """
    interests = rng.uniform(-1.0, 1.0, size=num_topics)
    return UserState(interests=interests, budget=params.initial_budget, alive=True)


def interest(user: UserState, doc: Document) -> float:
    """
    Dot product of the interest vector with the document's one-hot topic
    """
    return float(user.interests[doc.topic])


def satisfaction(user: UserState, doc: Document, params: DynamicsParams) -> float:
    return (1.0 - params.alpha) * interest(user, doc) + params.alpha * doc.quality


def nudge_magnitude(current: float, params: DynamicsParams) -> float:
    """
    Absolute interest change for a topic currently at `current`

    'prose' moves neutral interests the most, y * (1 - |I|); 'literal'
    evaluates |(-y|I| + y) * (-I)|.
    """
    y = params.nudge_fraction
    if params.nudge_mode == 'literal':
        return abs((-y * abs(current) + y) * -current)
    return y * (1.0 - abs(current))


def apply_click(
    user: UserState,
    doc: Document,
    params: DynamicsParams,
    rng: np.random.Generator,
) -> Tuple[UserState, float]:
    """
    Consume a clicked document

    Args:
        user: Current user state
        doc: Clicked document
        params: Dynamics parameters
        rng: Random stream for the nudge polarity

    Returns:
        Updated user state and the click reward
    """
    if not user.alive:
        raise TerminatedUserError("apply_click called on a terminated session")

    bonus = params.bonus_coeff * params.doc_length * satisfaction(user, doc, params)
    budget = user.budget - (params.doc_length - bonus)

    current = float(user.interests[doc.topic])
    magnitude = nudge_magnitude(current, params)
    # Positive with probability (I(u, d) + 1) / 2
    positive = rng.random() < (interest(user, doc) + 1.0) / 2.0
    interests = user.interests.copy()
    interests[doc.topic] = np.clip(current + (magnitude if positive else -magnitude), -1.0, 1.0)

    updated = UserState(interests=interests, budget=budget, alive=budget > 0)
    logger.debug("Click on %s: bonus %.4f, budget %.4f -> %.4f", doc, bonus, user.budget, budget)
    return updated, params.reward_per_click


def apply_no_click(user: UserState, params: DynamicsParams) -> UserState:
    """
    Slate served but nothing clicked: only the no-click cost is consumed
    """
    if not user.alive:
        raise TerminatedUserError("apply_no_click called on a terminated session")
    budget = user.budget - params.no_click_cost
    return UserState(interests=user.interests.copy(), budget=budget, alive=budget > 0)
