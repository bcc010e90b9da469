from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class Document:
    """
    Recommendable item: one topic, an inherent quality and a fixed length
    """
    id: int
    topic: int
    quality: float
    length: float

    def __str__(self) -> str:
        return f"doc {self.id} (topic {self.topic}, quality {self.quality:.3f})"


@dataclass
class UserState:
    """
    Fully observable interests plus the hidden session budget
    """
    interests: np.ndarray
    budget: float
    alive: bool = True

    @property
    def num_topics(self) -> int:
        return int(self.interests.shape[0])

    def copy(self) -> 'UserState':
        return UserState(self.interests.copy(), self.budget, self.alive)


@dataclass(frozen=True)
class ScoredItem:
    """
    Slate optimizer input: choice score v and item LTV q
    """
    id: int
    v: float
    q: float


@dataclass(frozen=True)
class SlateSolution:
    """
    Ordered slate of item ids with its expected LTV
    """
    items: Tuple[int, ...]
    value: float

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class Transition:
    """
    One logged interaction, completed once the next event is known

    Feature rows are FeatureConverter item vectors. Indices in
    next_slate refer to rows of next_features.
    """
    slate_features: np.ndarray
    slate_scores: np.ndarray
    clicked: Optional[int]
    reward: float
    next_features: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    next_scores: np.ndarray = field(default_factory=lambda: np.zeros(0))
    next_slate: Tuple[int, ...] = ()
    terminal: bool = False

    @property
    def was_clicked(self) -> bool:
        return self.clicked is not None


@dataclass
class Metrics:
    """
    Evaluation summary over a batch of simulated sessions
    """
    avg_return: float
    avg_quality: float
    n_users: int
    n_clicks: int
    high_quality_share: float = 0.0

    def pct_vs(self, baseline: 'Metrics') -> Tuple[float, float]:
        """
        Percent improvement of return and quality over a baseline
        """
        return (
            percent_improvement(self.avg_return, baseline.avg_return),
            percent_improvement(self.avg_quality, baseline.avg_quality),
        )


@dataclass
class MetricsRow:
    """
    One agent's line in a suite's results
    """
    agent_name: str
    avg_return: float
    avg_quality: float
    pct_return_vs_baseline: float
    pct_quality_vs_baseline: float
    train_steps: int
    grad_steps: int
    seed: int
    config_hash: str
    wall_clock_s: float = 0.0
    train_step_wall_us: float = 0.0


@dataclass
class TrainingCurve:
    """
    Periodic evaluations with an exponentially smoothed return

    The evaluation t stages back is weighted by smoothing**t.
    """
    smoothing: float = 0.999
    steps: List[int] = field(default_factory=list)
    raw_returns: List[float] = field(default_factory=list)
    smoothed_returns: List[float] = field(default_factory=list)
    avg_qualities: List[float] = field(default_factory=list)
    high_quality_shares: List[float] = field(default_factory=list)
    _weighted_sum: float = 0.0
    _weight_total: float = 0.0

    def append(self, step: int, metrics: Metrics) -> float:
        """
        Record an evaluation and return the new smoothed return
        """
        self._weighted_sum = self.smoothing * self._weighted_sum + metrics.avg_return
        self._weight_total = self.smoothing * self._weight_total + 1.0
        smoothed = self._weighted_sum / self._weight_total

        self.steps.append(step)
        self.raw_returns.append(metrics.avg_return)
        self.smoothed_returns.append(smoothed)
        self.avg_qualities.append(metrics.avg_quality)
        self.high_quality_shares.append(metrics.high_quality_share)
        return smoothed

    def __len__(self) -> int:
        return len(self.steps)


def percent_improvement(value: float, baseline: float) -> float:
    """
    (value - baseline) / |baseline| * 100, zero when the baseline is zero
    """
    if baseline == 0:
        return 0.0
    return (value - baseline) / abs(baseline) * 100.0
