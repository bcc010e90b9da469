import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..converters.features import FeatureConverter
from ..environment.simulator import SessionSimulator
from ..models import Document, ScoredItem, Transition, UserState
from ..optimizers.slate import get_optimizer, slate_value
from ..qmodel.network import (
    LabelNetwork,
    QNetwork,
    clip_gradients,
    load_checkpoint,
    make_optimizer,
    save_checkpoint,
    sync_label_network,
)
from ..utils.error_handling import ConfigError, InfeasibleSlateError
from .targets import fsq_target, qlearning_target, sarsa_target, slate_combinations, slate_expectation
from .variants import AgentConfig

if TYPE_CHECKING:
    from ..config import QModelConfig

# Agents value the no-click outcome at zero
NULL_Q = 0.0


@dataclass(frozen=True)
class ServedSlate:
    """
    Candidate positions in presentation order, and whether the slate was
    an exploration draw
    """
    positions: Tuple[int, ...]
    explored: bool = False

    def documents(self, candidates: Sequence[Document]) -> List[Document]:
        return [candidates[i] for i in self.positions]


class Agent:
    """
    Common serving plumbing: slate size, choice scores and exploration
    """

    def __init__(self, config: AgentConfig, simulator: SessionSimulator):
        self.config = config
        self.num_topics = simulator.num_topics
        self.slate_size = simulator.slate_size
        self.null_score = simulator.null_score
        self.score_shift = simulator.score_shift
        self._simulator = simulator
        self.grad_steps = 0
        self.logger = logging.getLogger(__name__)

    @property
    def name(self) -> str:
        return self.config.name

    def _check_candidates(self, candidates: Sequence[Document]) -> None:
        if len(candidates) < self.slate_size:
            raise InfeasibleSlateError(self.slate_size, len(candidates))

    def random_slate(self, candidates: Sequence[Document], rng: np.random.Generator) -> Tuple[int, ...]:
        """
        Uniformly random k-subset in random order
        """
        return tuple(int(i) for i in rng.choice(len(candidates), size=self.slate_size, replace=False))

    def choice_scores(self, user: UserState, candidates: Sequence[Document]) -> np.ndarray:
        return np.array([self._simulator.score(user, doc) for doc in candidates])

    def serve(
        self,
        user: UserState,
        candidates: Sequence[Document],
        rng: np.random.Generator,
        explore: bool = False,
    ) -> ServedSlate:
        """
        Pick an ordered slate of k candidates

        Args:
            user: Current user state
            candidates: Candidate documents for this event
            rng: Random stream
            explore: Apply epsilon-greedy exploration (training only)
        """
        self._check_candidates(candidates)
        if explore and self.config.epsilon > 0 and rng.random() < self.config.epsilon:
            return ServedSlate(self.random_slate(candidates, rng), explored=True)
        return ServedSlate(self._exploit(user, candidates, rng))

    def _exploit(self, user: UserState, candidates: Sequence[Document], rng: np.random.Generator) -> Tuple[int, ...]:
        raise NotImplementedError

    def learns_from(self, tr: Transition) -> bool:
        return False

    def train_batch(self, batch: Sequence[Transition]) -> float:
        return 0.0

    def sync_label(self) -> None:
        pass

    def snapshot(self) -> 'Agent':
        """
        Read-only copy for evaluation workers
        """
        return self


class RandomAgent(Agent):
    """
    Uniformly random slates, never trained
    """

    def serve(self, user, candidates, rng, explore=False) -> ServedSlate:
        self._check_candidates(candidates)
        return ServedSlate(self.random_slate(candidates, rng))


class SlateQAgent(Agent):
    """
    Item-wise LTV network Q(s, i) combined with the conditional choice
    model; covers MYOP (gamma = 0), SARSA and Q-learning variants
    """

    def __init__(
        self,
        config: AgentConfig,
        simulator: SessionSimulator,
        qmodel: 'QModelConfig',
        rng: np.random.Generator,
        network: Optional[QNetwork] = None,
    ):
        super().__init__(config, simulator)
        width = FeatureConverter.item_width(self.num_topics)
        self.network = network or QNetwork.initialize([width, *qmodel.hidden_dims, 1], rng)
        if self.network.input_width != width:
            raise ConfigError(f"network expects width {self.network.input_width}, features have {width}")
        self.label_network: Union[QNetwork, LabelNetwork] = sync_label_network(self.network)
        self.optimizer = make_optimizer(qmodel.optimizer, qmodel.lr)
        self.grad_clip = qmodel.grad_clip
        self.label_sync_period = qmodel.label_sync_period
        self.label_syncs = 0
        self.serve_optimizer = get_optimizer(config.serve_opt)
        self.train_optimizer = get_optimizer(config.train_opt) if config.train_opt else None

    def scored_items(self, user: UserState, candidates: Sequence[Document]) -> List[ScoredItem]:
        """
        (v, q) for every candidate; ids are candidate positions
        """
        features = FeatureConverter.featurize_candidates(user, candidates)
        q = self.network.predict_batch(features)
        v = self.choice_scores(user, candidates)
        return [ScoredItem(id=i, v=float(v[i]), q=float(q[i])) for i in range(len(candidates))]

    def _exploit(self, user, candidates, rng) -> Tuple[int, ...]:
        items = self.scored_items(user, candidates)
        return self.serve_optimizer(items, self.slate_size, self.null_score, NULL_Q).items

    def expected_slate_value(self, user: UserState, candidates: Sequence[Document], positions: Sequence[int]) -> float:
        """
        sum_{i in A and null} P(i | s, A) Q(s, i) under the agent's choice model
        """
        items = self.scored_items(user, [candidates[i] for i in positions])
        return slate_expectation([item.v for item in items], [item.q for item in items], self.null_score, NULL_Q)

    def slate_value(self, user: UserState, candidates: Sequence[Document], positions: Sequence[int]) -> float:
        items = self.scored_items(user, [candidates[i] for i in positions])
        return slate_value(items, self.null_score, NULL_Q)

    def learns_from(self, tr: Transition) -> bool:
        return tr.clicked is not None

    def targets(self, batch: Sequence[Transition]) -> np.ndarray:
        """
        TD targets for a batch of clicked transitions, one label-network
        forward pass per batch
        """
        gamma = self.config.gamma
        if gamma == 0.0:
            return np.array([tr.reward for tr in batch])

        bootstrap = [tr for tr in batch if not tr.terminal]
        if self.config.kind == 'sarsa':
            rows = [tr.next_features[list(tr.next_slate)] for tr in bootstrap]
        else:
            rows = [tr.next_features for tr in bootstrap]
        predictions = self.label_network.predict_batch(np.vstack(rows)) if rows else np.zeros(0)

        targets = []
        offset = 0
        for tr in batch:
            if tr.terminal:
                targets.append(tr.reward)
                continue
            width = len(tr.next_slate) if self.config.kind == 'sarsa' else tr.next_features.shape[0]
            next_q = predictions[offset:offset + width]
            offset += width
            if self.config.kind == 'sarsa':
                targets.append(sarsa_target(tr, self.label_network, gamma, self.null_score, NULL_Q, next_q=next_q))
            else:
                targets.append(qlearning_target(
                    tr, self.label_network, self.train_optimizer, gamma, self.null_score, NULL_Q, next_q=next_q,
                ))
        return np.array(targets)

    def train_batch(self, batch: Sequence[Transition]) -> float:
        """
        One gradient step on a mini-batch of clicked transitions

        Returns:
            Loss before the step
        """
        features = np.vstack([tr.slate_features[tr.clicked] for tr in batch])
        loss, grads = self.network.gradients(features, self.targets(batch))
        self.optimizer.step(self.network, clip_gradients(grads, self.grad_clip))
        self.grad_steps += 1
        if self.grad_steps % self.label_sync_period == 0:
            self.sync_label()
        return loss

    def sync_label(self) -> None:
        self.label_network = sync_label_network(self.network)
        self.label_syncs += 1

    def snapshot(self) -> 'SlateQAgent':
        frozen = object.__new__(SlateQAgent)
        frozen.__dict__.update(self.__dict__)
        frozen.network = LabelNetwork(self.network)
        return frozen

    def save(self, path: Union[str, Path], **meta: Any) -> Path:
        return save_checkpoint(self.network, path, {'variant': self.name, 'grad_steps': self.grad_steps, **meta})


class FSQAgent(Agent):
    """
    Full-slate Q-learning: each k-subset of the candidates is one atomic
    action, maximized by enumeration
    """

    def __init__(
        self,
        config: AgentConfig,
        simulator: SessionSimulator,
        qmodel: 'QModelConfig',
        rng: np.random.Generator,
        network: Optional[QNetwork] = None,
    ):
        super().__init__(config, simulator)
        width = FeatureConverter.slate_width(self.num_topics, self.slate_size)
        self.network = network or QNetwork.initialize([width, *qmodel.hidden_dims, 1], rng)
        if self.network.input_width != width:
            raise ConfigError(f"network expects width {self.network.input_width}, features have {width}")
        self.label_network: Union[QNetwork, LabelNetwork] = sync_label_network(self.network)
        self.optimizer = make_optimizer(qmodel.optimizer, qmodel.lr)
        self.grad_clip = qmodel.grad_clip
        self.label_sync_period = qmodel.label_sync_period
        self.label_syncs = 0
        # Fail fast on an enumeration that cannot run
        slate_combinations(simulator.num_candidates, self.slate_size)

    def serve(self, user, candidates, rng, explore=False) -> ServedSlate:
        served = super().serve(user, candidates, rng, explore)
        # One canonical order per slate keeps its feature vector unique
        return ServedSlate(tuple(sorted(served.positions)), served.explored)

    def _exploit(self, user, candidates, rng) -> Tuple[int, ...]:
        combos = slate_combinations(len(candidates), self.slate_size)
        features = FeatureConverter.enumerate_slate_features(
            FeatureConverter.featurize_candidates(user, candidates), combos, self.num_topics,
        )
        best = int(np.argmax(self.network.predict_batch(features)))
        return tuple(int(i) for i in combos[best])

    def learns_from(self, tr: Transition) -> bool:
        return True

    def train_batch(self, batch: Sequence[Transition]) -> float:
        gamma = self.config.gamma
        features = np.vstack([FeatureConverter.slate_features(tr.slate_features, self.num_topics) for tr in batch])

        bootstrap = [tr for tr in batch if not tr.terminal and gamma > 0]
        blocks = []
        for tr in bootstrap:
            combos = slate_combinations(tr.next_features.shape[0], self.slate_size)
            blocks.append(FeatureConverter.enumerate_slate_features(tr.next_features, combos, self.num_topics))
        predictions = self.label_network.predict_batch(np.vstack(blocks)) if blocks else np.zeros(0)

        targets = []
        offset = 0
        for tr in batch:
            if tr.terminal or gamma == 0:
                targets.append(tr.reward)
                continue
            count = slate_combinations(tr.next_features.shape[0], self.slate_size).shape[0]
            targets.append(fsq_target(
                tr, self.label_network, gamma, self.num_topics, next_q=predictions[offset:offset + count],
            ))
            offset += count

        loss, grads = self.network.gradients(features, np.array(targets))
        self.optimizer.step(self.network, clip_gradients(grads, self.grad_clip))
        self.grad_steps += 1
        if self.grad_steps % self.label_sync_period == 0:
            self.sync_label()
        return loss

    def sync_label(self) -> None:
        self.label_network = sync_label_network(self.network)
        self.label_syncs += 1

    def snapshot(self) -> 'FSQAgent':
        frozen = object.__new__(FSQAgent)
        frozen.__dict__.update(self.__dict__)
        frozen.network = LabelNetwork(self.network)
        return frozen

    def save(self, path: Union[str, Path], **meta: Any) -> Path:
        return save_checkpoint(self.network, path, {'variant': self.name, 'grad_steps': self.grad_steps, **meta})


def build_agent(
    config: AgentConfig,
    simulator: SessionSimulator,
    qmodel: 'QModelConfig',
    rng: np.random.Generator,
    checkpoint: Optional[Union[str, Path]] = None,
) -> Agent:
    """
    Construct the agent for a variant, optionally restoring its network

    Args:
        config: Parsed agent variant
        simulator: Environment the agent serves
        qmodel: Network and replay settings
        rng: Random stream for weight initialization
        checkpoint: Saved network to load instead of a fresh one
    """
    if config.kind == 'random':
        return RandomAgent(config, simulator)

    network = None
    if checkpoint is not None:
        network, meta = load_checkpoint(checkpoint)
        if meta.get('variant') not in (None, config.name):
            raise ConfigError(f"checkpoint holds {meta.get('variant')}, not {config.name}", key="agents")

    if config.kind == 'fsq':
        return FSQAgent(config, simulator, qmodel, rng, network=network)
    return SlateQAgent(config, simulator, qmodel, rng, network=network)
