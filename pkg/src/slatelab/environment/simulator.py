import itertools
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np

from ..models import Document, UserState
from ..utils.error_handling import ConfigError, InfeasibleSlateError
from .choice import (
    CHOICE_MODELS,
    ENV_NULL_SCORE,
    CascadeParams,
    ChoiceScores,
    cascade_probs,
    conditional_probs,
    environment_score,
    sample_choice,
)
from .corpus import TopicCatalog, sample_candidates
from .user_model import DynamicsParams, apply_click, apply_no_click, sample_user

if TYPE_CHECKING:
    from ..config import EnvConfig


@dataclass
class StepOutcome:
    """
    Result of showing one slate to the user
    """
    clicked: Optional[int]
    reward: float
    user: UserState
    clicked_doc: Optional[Document] = None

    @property
    def terminal(self) -> bool:
        return not self.user.alive


class SessionSimulator:
    """
    Simulated users, candidate generation and the environment's choice
    behavior, stepped one recommendation event at a time
    """

    def __init__(
        self,
        catalog: TopicCatalog,
        dynamics: DynamicsParams,
        num_candidates: int = 10,
        slate_size: int = 3,
        choice_model: str = 'conditional',
        cascade: Optional[CascadeParams] = None,
        null_score: float = ENV_NULL_SCORE,
        score_shift: float = 1.0,
    ):
        """
        Initialize the simulator

        Args:
            catalog: Topic catalog documents are drawn from
            dynamics: User dynamics parameters
            num_candidates: Candidates drawn per event (m)
            slate_size: Slate size (k)
            choice_model: 'conditional' or 'cascade'
            cascade: Cascade parameters, used by the cascade model
            null_score: Choice score of the null item
            score_shift: Offset added to interests to form choice scores
        """
        if choice_model not in CHOICE_MODELS:
            raise ConfigError(
                f"choice model must be one of {CHOICE_MODELS}, got {choice_model!r}",
                key="env.choice_model",
            )
        if slate_size < 1:
            raise ConfigError("slate size k must be at least 1", key="env.slate_size")
        if slate_size > num_candidates:
            raise ConfigError(
                f"slate size k={slate_size} exceeds candidate count m={num_candidates}",
                key="env.slate_size",
            )
        dynamics.check_bonus_bound(catalog.quality_clamp)

        self.catalog = catalog
        self.dynamics = dynamics
        self.num_candidates = num_candidates
        self.slate_size = slate_size
        self.choice_model = choice_model
        self.cascade = cascade or CascadeParams()
        self.null_score = null_score
        self.score_shift = score_shift

        # Run-scoped document ids
        self._doc_ids = itertools.count()

        self.logger = logging.getLogger(__name__)

    @classmethod
    def from_config(cls, env: 'EnvConfig') -> 'SessionSimulator':
        return cls(
            catalog=env.catalog(),
            dynamics=env.dynamics(),
            num_candidates=env.num_candidates,
            slate_size=env.slate_size,
            choice_model=env.choice_model,
            cascade=env.cascade(),
            null_score=env.null_score,
            score_shift=env.score_shift,
        )

    @property
    def num_topics(self) -> int:
        return self.catalog.num_topics

    def new_user(self, rng: np.random.Generator) -> UserState:
        return sample_user(self.dynamics, self.catalog.num_topics, rng)

    def candidates(self, rng: np.random.Generator) -> List[Document]:
        return sample_candidates(self.catalog, self.num_candidates, rng, ids=self._doc_ids)

    def score(self, user: UserState, doc: Document) -> float:
        return environment_score(user, doc, self.score_shift)

    def choice_scores(self, user: UserState, slate: Sequence[Document]) -> ChoiceScores:
        return ChoiceScores.of([self.score(user, doc) for doc in slate], self.null_score)

    def choice_probs(self, user: UserState, slate: Sequence[Document]) -> np.ndarray:
        """
        Probabilities of each slate position being clicked under the
        environment's own choice model, null last
        """
        scores = self.choice_scores(user, slate)
        if self.choice_model == 'cascade':
            return cascade_probs(scores, self.cascade)
        return conditional_probs(scores)

    def step(
        self,
        user: UserState,
        slate: Sequence[Document],
        rng: np.random.Generator,
    ) -> StepOutcome:
        """
        Show a slate, sample the user's response and apply the dynamics

        Args:
            user: Current user state
            slate: Documents in presentation order
            rng: Random stream

        Returns:
            Click position (None for no click), reward and the next user state
        """
        if len(slate) != self.slate_size:
            raise InfeasibleSlateError(self.slate_size, len(slate))

        clicked = sample_choice(self.choice_probs(user, slate), rng)
        if clicked is None:
            return StepOutcome(clicked=None, reward=0.0, user=apply_no_click(user, self.dynamics))

        doc = slate[clicked]
        next_user, reward = apply_click(user, doc, self.dynamics, rng)
        return StepOutcome(clicked=clicked, reward=reward, user=next_user, clicked_doc=doc)

    def run_session(
        self,
        policy,
        rng: np.random.Generator,
        max_events: Optional[int] = None,
    ) -> Tuple[float, List[Document]]:
        """
        Play one full session with `policy(user, candidates, rng) -> slate`

        Returns:
            Total session reward and the clicked documents
        """
        user = self.new_user(rng)
        total = 0.0
        clicked_docs: List[Document] = []
        events = 0
        while user.alive and (max_events is None or events < max_events):
            candidates = self.candidates(rng)
            slate = policy(user, candidates, rng)
            outcome = self.step(user, slate, rng)
            total += outcome.reward
            if outcome.clicked_doc is not None:
                clicked_docs.append(outcome.clicked_doc)
            user = outcome.user
            events += 1
        return total, clicked_docs
