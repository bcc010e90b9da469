import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..agents.policies import Agent
from ..agents.replay import ExperienceBuffer
from ..config import QModelConfig, ScheduleConfig
from ..converters.features import FeatureConverter
from ..environment.simulator import SessionSimulator
from ..models import Document, Metrics, TrainingCurve, Transition
from ..utils.error_handling import ConfigError

ProgressCallback = Callable[[float, float, str], None]
Seed = Union[int, np.random.SeedSequence]


@dataclass
class TrainingResult:
    """
    Outcome of one agent's training run
    """
    agent: Agent
    curve: TrainingCurve
    train_steps: int
    grad_steps: int
    explored_slates: int
    wall_clock_s: float
    train_step_wall_us: float

    @property
    def exploration_rate(self) -> float:
        return self.explored_slates / self.train_steps if self.train_steps else 0.0


class TrainingEngine:
    """
    Training engine, responsible for driving simulated sessions through an
    agent, feeding its replay buffer and evaluating it along the way
    """

    def __init__(
        self,
        simulator: SessionSimulator,
        qmodel: QModelConfig,
        schedule: ScheduleConfig,
    ):
        """
        Initialize training engine

        Args:
            simulator: Environment sessions are drawn from
            qmodel: Replay and mini-batch settings
            schedule: Training length and evaluation cadence
        """
        self.simulator = simulator
        self.qmodel = qmodel
        self.schedule = schedule

        self.logger = logging.getLogger(__name__)

    def run_training(
        self,
        agent: Agent,
        rng: np.random.Generator,
        progress_callback: Optional[ProgressCallback] = None,
    ) -> TrainingResult:
        """
        Train an agent for `schedule.train_steps` environment events

        Args:
            agent: Agent to train (Random only rolls out and evaluates)
            rng: Random stream for sessions, exploration and replay sampling
            progress_callback: Receives (current_step, total_steps, description)

        Returns:
            Trained agent, learning curve and step counters
        """
        total = self.schedule.train_steps
        learns = agent.config.learns
        min_buffer = max(self.qmodel.batch_size, self.qmodel.learning_starts)
        buffer = ExperienceBuffer(self.qmodel.buffer_size)
        curve = TrainingCurve(smoothing=self.schedule.smoothing)

        self.logger.info("Starting training of %s for %d steps", agent.name, total)
        if progress_callback:
            progress_callback(0, total, f"Training {agent.name}...")

        env_steps = 0
        explored = 0
        train_time = 0.0
        started = time.perf_counter()

        while env_steps < total:
            user = self.simulator.new_user(rng)
            pending: Optional[Transition] = None

            while user.alive and env_steps < total:
                candidates = self.simulator.candidates(rng)
                served = agent.serve(user, candidates, rng, explore=True)
                explored += served.explored

                if learns:
                    features = FeatureConverter.featurize_candidates(user, candidates)
                    scores = agent.choice_scores(user, candidates)
                    if pending is not None:
                        pending.next_features = features
                        pending.next_scores = scores
                        pending.next_slate = served.positions
                        self._store(agent, buffer, pending)

                outcome = self.simulator.step(user, served.documents(candidates), rng)
                env_steps += 1

                if learns:
                    positions = list(served.positions)
                    pending = Transition(
                        slate_features=features[positions],
                        slate_scores=scores[positions],
                        clicked=outcome.clicked,
                        reward=outcome.reward,
                        terminal=outcome.terminal,
                    )
                    if pending.terminal:
                        self._store(agent, buffer, pending)
                        pending = None

                    if env_steps % self.qmodel.train_every == 0 and buffer.can_sample(min_buffer):
                        tick = time.perf_counter()
                        agent.train_batch(buffer.sample(self.qmodel.batch_size, rng))
                        train_time += time.perf_counter() - tick

                user = outcome.user

                if env_steps % self.schedule.eval_every == 0:
                    metrics = self.evaluate(agent, self.schedule.eval_users, int(rng.integers(2 ** 32)))
                    smoothed = curve.append(env_steps, metrics)
                    self.logger.debug(
                        "%s step %d: return %.3f (smoothed %.3f), quality %.4f",
                        agent.name, env_steps, metrics.avg_return, smoothed, metrics.avg_quality,
                    )
                    if progress_callback:
                        progress_callback(env_steps, total, f"{agent.name}: smoothed return {smoothed:.2f}")

        wall_clock = time.perf_counter() - started
        per_step_us = train_time / agent.grad_steps * 1e6 if agent.grad_steps else 0.0

        if progress_callback:
            progress_callback(total, total, f"{agent.name} training completed!")
        self.logger.info(
            "Training of %s completed: %d steps, %d gradient steps, %d transitions stored, %.1fs",
            agent.name, env_steps, agent.grad_steps, buffer.total_added, wall_clock,
        )
        return TrainingResult(
            agent=agent,
            curve=curve,
            train_steps=env_steps,
            grad_steps=agent.grad_steps,
            explored_slates=explored,
            wall_clock_s=wall_clock,
            train_step_wall_us=per_step_us,
        )

    @staticmethod
    def _store(agent: Agent, buffer: ExperienceBuffer, transition: Transition) -> None:
        if agent.learns_from(transition):
            buffer.add(transition)

    def run_session(self, agent: Agent, rng: np.random.Generator) -> Tuple[float, List[Document]]:
        """
        One greedy session, no exploration
        """
        def policy(user, candidates, stream):
            return agent.serve(user, candidates, stream, explore=False).documents(candidates)

        return self.simulator.run_session(policy, rng)

    def evaluate(self, agent: Agent, n_users: int, seed: Seed = 0) -> Metrics:
        """
        Evaluate an agent on fresh users with exploration off

        Each user gets its own stream spawned from `seed`, so results do not
        depend on the number of workers.

        Args:
            agent: Agent to evaluate
            n_users: Number of simulated sessions
            seed: Root seed for the per-user streams

        Returns:
            Average return, average clicked quality and high-quality click share
        """
        if n_users < 1:
            raise ConfigError("evaluation needs at least one user", key="schedule.eval_users")

        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        streams = [np.random.default_rng(child) for child in root.spawn(n_users)]
        frozen = agent.snapshot()

        if self.schedule.eval_workers > 1:
            with ThreadPoolExecutor(max_workers=self.schedule.eval_workers) as pool:
                sessions = list(pool.map(lambda stream: self.run_session(frozen, stream), streams))
        else:
            sessions = [self.run_session(frozen, stream) for stream in streams]

        return self.summarize(sessions)

    def summarize(self, sessions: Sequence[Tuple[float, List[Document]]]) -> Metrics:
        returns = [total for total, _ in sessions]
        clicked = [doc for _, docs in sessions for doc in docs]
        catalog = self.simulator.catalog
        if clicked:
            avg_quality = float(np.mean([doc.quality for doc in clicked]))
            high_share = float(np.mean([catalog.is_high_quality(doc.topic) for doc in clicked]))
        else:
            avg_quality = 0.0
            high_share = 0.0
        return Metrics(
            avg_return=float(np.mean(returns)),
            avg_quality=avg_quality,
            n_users=len(sessions),
            n_clicks=len(clicked),
            high_quality_share=high_share,
        )
