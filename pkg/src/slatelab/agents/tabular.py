"""
Tabular SlateQ on a tiny slate MDP with a dynamic-programming oracle

The state is the remaining budget; interests are held fixed so every
click costs a deterministic amount. Item values Q(s, i) of the learner
must converge to the optimal ones computed by backward recursion.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..environment.choice import ChoiceScores, conditional_probs, environment_score, sample_choice
from ..environment.user_model import DynamicsParams, satisfaction
from ..models import Document, ScoredItem, UserState
from ..optimizers.slate import SlateOptimizer, brute_force_slate
from ..utils.error_handling import ConfigError

logger = logging.getLogger(__name__)

# Table key of the null item
NULL = -1

StateItem = Tuple[float, int]


@dataclass(frozen=True)
class TinySlateMDP:
    """
    Finite slate MDP: the same documents are candidates at every state

    Attributes:
        scores: Choice score v per document
        rewards: Reward per document click
        costs: Budget consumed per document click
        null_score: Choice score of the null item
        null_cost: Budget consumed when nothing is clicked
        initial_budget: Budget of the start state
        slate_size: Slate size k
    """
    scores: Tuple[float, ...]
    rewards: Tuple[float, ...]
    costs: Tuple[float, ...]
    null_score: float = 1.0
    null_cost: float = 1.0
    initial_budget: float = 4.0
    slate_size: int = 2
    _states: List[float] = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not len(self.scores) == len(self.rewards) == len(self.costs):
            raise ConfigError("scores, rewards and costs must have one entry per document")
        if min(self.costs) <= 0 or self.null_cost <= 0:
            raise ConfigError("every outcome must consume budget")
        if not 1 <= self.slate_size <= len(self.scores):
            raise ConfigError("slate size must lie in [1, number of documents]")
        self._states.extend(self._reachable())

    @classmethod
    def from_documents(
        cls,
        docs: Sequence[Document],
        interests: Sequence[float],
        dynamics: DynamicsParams,
        slate_size: int = 2,
        score_shift: float = 1.0,
        null_score: float = 1.0,
    ) -> 'TinySlateMDP':
        """
        Derive scores and click costs from the simulator's own formulas
        with interests frozen
        """
        user = UserState(interests=np.asarray(interests, dtype=float), budget=dynamics.initial_budget)
        costs = []
        for doc in docs:
            bonus = dynamics.bonus_coeff * dynamics.doc_length * satisfaction(user, doc, dynamics)
            costs.append(dynamics.doc_length - bonus)
        return cls(
            scores=tuple(environment_score(user, doc, score_shift) for doc in docs),
            rewards=tuple(dynamics.reward_per_click for _ in docs),
            costs=tuple(costs),
            null_score=null_score,
            null_cost=dynamics.no_click_cost,
            initial_budget=dynamics.initial_budget,
            slate_size=slate_size,
        )

    @property
    def num_items(self) -> int:
        return len(self.scores)

    @property
    def states(self) -> List[float]:
        """
        Every non-terminal budget reachable from the start, sorted
        """
        return list(self._states)

    def slates(self) -> List[Tuple[int, ...]]:
        return list(itertools.combinations(range(self.num_items), self.slate_size))

    def outcome(self, budget: float, item: int) -> Tuple[float, float]:
        """
        Reward and next budget for clicking `item` (NULL for no click)
        """
        if item == NULL:
            return 0.0, budget - self.null_cost
        return self.rewards[item], budget - self.costs[item]

    def probs(self, slate: Sequence[int]) -> np.ndarray:
        return conditional_probs(ChoiceScores.of([self.scores[i] for i in slate], self.null_score))

    def _reachable(self) -> List[float]:
        seen = set()
        frontier = [self.initial_budget]
        while frontier:
            budget = frontier.pop()
            if budget <= 0 or budget in seen:
                continue
            seen.add(budget)
            for item in [*range(self.num_items), NULL]:
                frontier.append(self.outcome(budget, item)[1])
        return sorted(seen)


def best_slate_value(mdp: TinySlateMDP, values: Dict[StateItem, float], budget: float,
                     optimizer: SlateOptimizer = brute_force_slate) -> float:
    """
    max over slates of sum_{i in A and null} P(i | A) Q(budget, i); zero at terminal budgets
    """
    if budget <= 0:
        return 0.0
    items = [ScoredItem(id=i, v=mdp.scores[i], q=values[(budget, i)]) for i in range(mdp.num_items)]
    return optimizer(items, mdp.slate_size, mdp.null_score, values[(budget, NULL)]).value


def solve_slate_mdp(mdp: TinySlateMDP) -> Dict[StateItem, float]:
    """
    Optimal item values by backward recursion over budgets

    Q(s, i) = r_i + V(s - c_i) with V the best slate value at s.
    """

    @lru_cache(maxsize=None)
    def item_value(budget: float, item: int) -> float:
        reward, next_budget = mdp.outcome(budget, item)
        return reward + state_value(next_budget)

    @lru_cache(maxsize=None)
    def state_value(budget: float) -> float:
        if budget <= 0:
            return 0.0
        best = -np.inf
        for slate in mdp.slates():
            probs = mdp.probs(slate)
            value = sum(p * item_value(budget, i) for p, i in zip(probs[:-1], slate))
            best = max(best, value + probs[-1] * item_value(budget, NULL))
        return float(best)

    return {(s, i): item_value(s, i) for s in mdp.states for i in [*range(mdp.num_items), NULL]}


class TabularSlateQ:
    """
    Q-learning on the item-value table with the slate max done by a slate
    optimizer
    """

    def __init__(self, mdp: TinySlateMDP, lr: float = 0.5, optimizer: SlateOptimizer = brute_force_slate):
        if not 0 < lr <= 1:
            raise ConfigError("tabular learning rate must lie in (0, 1]")
        self.mdp = mdp
        self.lr = lr
        self.optimizer = optimizer
        self.table: Dict[StateItem, float] = {
            (s, i): 0.0 for s in mdp.states for i in [*range(mdp.num_items), NULL]
        }
        self.updates = 0

    def update(self, budget: float, item: int) -> float:
        """
        Move Q(budget, item) toward r + max_A' E[Q(s', .)]; returns the TD error
        """
        reward, next_budget = self.mdp.outcome(budget, item)
        target = reward + best_slate_value(self.mdp, self.table, next_budget, self.optimizer)
        error = target - self.table[(budget, item)]
        self.table[(budget, item)] += self.lr * error
        self.updates += 1
        return error

    def learn(self, num_updates: int, rng: np.random.Generator) -> Dict[StateItem, float]:
        """
        Uniform state and slate sampling, user choice drawn from the choice model
        """
        states = self.mdp.states
        slates = self.mdp.slates()
        for _ in range(num_updates):
            budget = states[int(rng.integers(len(states)))]
            slate = slates[int(rng.integers(len(slates)))]
            position = sample_choice(self.mdp.probs(slate), rng)
            self.update(budget, NULL if position is None else slate[position])
        logger.debug("Tabular SlateQ ran %d updates", self.updates)
        return self.table

    def max_error(self, reference: Dict[StateItem, float], keys: Optional[Sequence[StateItem]] = None) -> float:
        keys = keys or list(reference)
        return max(abs(self.table[key] - reference[key]) for key in keys)
