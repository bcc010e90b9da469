"""
Experiment configuration

Files use dotenv-style `key=value` lines with dotted section keys, e.g.

    seed=7
    agents=RANDOM,MYOP-TS,SARSA-TS
    env.choice_model=cascade
    schedule.train_steps=50000

Every key is optional. Unknown keys, repeated keys and lines that do not
parse are rejected.
"""

import dataclasses
import hashlib
import logging
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from dotenv.parser import parse_stream

from .agents.variants import AgentConfig, parse_variant
from .environment.choice import CHOICE_MODELS, ENV_NULL_SCORE, CascadeParams
from .environment.corpus import TopicCatalog
from .environment.user_model import DynamicsParams
from .qmodel.network import OPTIMIZER_NAMES
from .utils.error_handling import ConfigError

logger = logging.getLogger(__name__)

PAPER_SCALE_TRAIN_STEPS = 300_000
PAPER_SCALE_EVAL_USERS = 5000


@dataclass(frozen=True)
class EnvConfig:
    """
    Simulated environment: topics, user dynamics, choice behavior, m and k
    """
    num_topics: int = 20
    num_low_quality: int = 14
    quality_stddev: float = 1.0
    quality_clamp: float = 3.4
    doc_length: float = 4.0
    initial_budget: float = 200.0
    no_click_cost: float = 0.5
    bonus_coeff: float = 0.9 / 3.4
    alpha: float = 1.0
    nudge_fraction: float = 0.3
    nudge_mode: str = 'prose'
    click_reward: Optional[float] = None
    choice_model: str = 'conditional'
    cascade_base_inspect: float = 1.0
    cascade_decay: float = 0.65
    cascade_mode: str = 'sequential'
    num_candidates: int = 10
    slate_size: int = 3
    null_score: float = ENV_NULL_SCORE
    score_shift: float = 1.0

    def __post_init__(self) -> None:
        if self.choice_model not in CHOICE_MODELS:
            raise ConfigError(
                f"choice_model must be one of {CHOICE_MODELS}, got {self.choice_model!r}",
                key="env.choice_model",
            )
        if self.num_candidates < 1:
            raise ConfigError("num_candidates must be at least 1", key="env.num_candidates")
        if not 1 <= self.slate_size <= self.num_candidates:
            raise ConfigError(
                f"slate_size k={self.slate_size} must lie in [1, m={self.num_candidates}]",
                key="env.slate_size",
            )
        if self.null_score <= 0:
            raise ConfigError("null_score must be positive", key="env.null_score")
        # Building the parts runs their own validation
        self.dynamics().check_bonus_bound(self.catalog().quality_clamp)
        self.cascade()

    def catalog(self) -> TopicCatalog:
        return TopicCatalog.split(
            num_topics=self.num_topics,
            num_low_quality=self.num_low_quality,
            quality_stddev=self.quality_stddev,
            doc_length=self.doc_length,
            quality_clamp=self.quality_clamp,
        )

    def dynamics(self) -> DynamicsParams:
        return DynamicsParams(
            initial_budget=self.initial_budget,
            doc_length=self.doc_length,
            no_click_cost=self.no_click_cost,
            bonus_coeff=self.bonus_coeff,
            alpha=self.alpha,
            nudge_fraction=self.nudge_fraction,
            click_reward=self.click_reward,
            nudge_mode=self.nudge_mode,
        )

    def cascade(self) -> CascadeParams:
        return CascadeParams(
            base_inspect=self.cascade_base_inspect,
            decay=self.cascade_decay,
            mode=self.cascade_mode,
        )


@dataclass(frozen=True)
class AgentSettings:
    """
    Settings shared by every agent of a suite
    """
    gamma: Optional[float] = None
    epsilon: float = 0.1


@dataclass(frozen=True)
class QModelConfig:
    """
    Network shape, optimizer and replay settings
    """
    hidden_dims: Tuple[int, ...] = (64, 32)
    lr: float = 1e-3
    optimizer: str = 'sgd'
    batch_size: int = 32
    buffer_size: int = 100_000
    label_sync_period: int = 250
    learning_starts: int = 1000
    train_every: int = 1
    grad_clip: Optional[float] = 100.0

    def __post_init__(self) -> None:
        if any(d < 1 for d in self.hidden_dims):
            raise ConfigError("hidden_dims must be positive", key="qmodel.hidden_dims")
        if self.lr <= 0:
            raise ConfigError("lr must be positive", key="qmodel.lr")
        if self.optimizer not in OPTIMIZER_NAMES:
            raise ConfigError(
                f"optimizer must be one of {OPTIMIZER_NAMES}, got {self.optimizer!r}",
                key="qmodel.optimizer",
            )
        for name in ('batch_size', 'buffer_size', 'label_sync_period', 'train_every'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1", key=f"qmodel.{name}")
        if self.batch_size > self.buffer_size:
            raise ConfigError("batch_size exceeds buffer_size", key="qmodel.batch_size")
        if self.learning_starts < 0:
            raise ConfigError("learning_starts must be nonnegative", key="qmodel.learning_starts")
        if self.grad_clip is not None and self.grad_clip <= 0:
            raise ConfigError("grad_clip must be positive", key="qmodel.grad_clip")


@dataclass(frozen=True)
class ScheduleConfig:
    """
    Training length and evaluation cadence
    """
    train_steps: int = 50_000
    eval_every: int = 1000
    eval_users: int = 50
    final_eval_users: int = 1000
    smoothing: float = 0.999
    eval_workers: int = 1

    def __post_init__(self) -> None:
        for name in ('eval_every', 'eval_users', 'final_eval_users', 'eval_workers'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1", key=f"schedule.{name}")
        if self.train_steps < 0:
            raise ConfigError("train_steps must be nonnegative", key="schedule.train_steps")
        if not 0.0 <= self.smoothing < 1.0:
            raise ConfigError("smoothing must lie in [0, 1)", key="schedule.smoothing")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything needed to replay an experiment suite
    """
    seed: int = 0
    agents: Tuple[str, ...] = ('RANDOM', 'MYOP-TS', 'SARSA-TS')
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: AgentSettings = field(default_factory=AgentSettings)
    qmodel: QModelConfig = field(default_factory=QModelConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)

    def __post_init__(self) -> None:
        if not self.agents:
            raise ConfigError("at least one agent is required", key="agents")
        for variant in self.agents:
            self.agent_config(variant)

    def agent_config(self, variant: str) -> AgentConfig:
        return parse_variant(variant, gamma=self.agent.gamma, epsilon=self.agent.epsilon)

    def agent_configs(self) -> List[AgentConfig]:
        """
        Agents of the suite with Random first as the baseline
        """
        configs = [self.agent_config(variant) for variant in self.agents]
        baseline = [c for c in configs if c.kind == 'random'][:1] or [self.agent_config('RANDOM')]
        return baseline + [c for c in configs if c.kind != 'random']

    def with_overrides(self, seed: Optional[int] = None, paper_scale: bool = False) -> 'ExperimentConfig':
        """
        Copy with the CLI overrides applied
        """
        config = self
        if seed is not None:
            config = dataclasses.replace(config, seed=seed)
        if paper_scale:
            config = dataclasses.replace(
                config,
                schedule=dataclasses.replace(
                    config.schedule,
                    train_steps=PAPER_SCALE_TRAIN_STEPS,
                    final_eval_users=PAPER_SCALE_EVAL_USERS,
                ),
            )
        return config


SECTIONS = {
    'env': EnvConfig,
    'agent': AgentSettings,
    'qmodel': QModelConfig,
    'schedule': ScheduleConfig,
}
TOP_LEVEL = ('seed', 'agents')


def _parse_value(key: str, raw: str, annotation: Any) -> Any:
    """
    Convert a raw string according to a dataclass field annotation
    """
    raw = raw.strip()
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)
    try:
        if origin is Union and type(None) in args:
            if raw.lower() in ('', 'none', 'null'):
                return None
            inner = next(a for a in args if a is not type(None))
            return _parse_value(key, raw, inner)
        if origin in (tuple, Tuple):
            parts = [p.strip() for p in raw.split(',') if p.strip()]
            return tuple(_parse_value(key, p, args[0]) for p in parts)
        if annotation is bool:
            if raw.lower() in ('true', '1', 'yes'):
                return True
            if raw.lower() in ('false', '0', 'no'):
                return False
            raise ValueError(raw)
        if annotation is int:
            return int(raw)
        if annotation is float:
            return float(raw)
        return raw
    except (ValueError, StopIteration) as e:
        raise ConfigError(f"cannot parse {key}={raw!r}", key=key) from e


def _format_value(value: Any) -> str:
    if value is None:
        return 'none'
    if isinstance(value, tuple):
        return ','.join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_from_mapping(values: Dict[str, Optional[str]]) -> ExperimentConfig:
    """
    Build a config from raw key/value strings, applying defaults

    Raises:
        ConfigError: unknown key, unparsable value or failed validation
    """
    top_hints = typing.get_type_hints(ExperimentConfig)
    top: Dict[str, Any] = {}
    sections: Dict[str, Dict[str, Any]] = {name: {} for name in SECTIONS}

    for key, raw in values.items():
        if raw is None:
            raise ConfigError(f"key {key!r} has no value", key=key)
        if key in TOP_LEVEL:
            top[key] = _parse_value(key, raw, top_hints[key])
            continue
        section, _, name = key.partition('.')
        if section not in SECTIONS or not name:
            raise ConfigError(f"unknown configuration key {key!r}", key=key)
        hints = typing.get_type_hints(SECTIONS[section])
        if name not in hints:
            raise ConfigError(f"unknown configuration key {key!r}", key=key)
        sections[section][name] = _parse_value(key, raw, hints[name])

    blocks = {name: cls(**sections[name]) for name, cls in SECTIONS.items()}
    return ExperimentConfig(**top, **blocks)


def read_config_values(path: Union[str, Path]) -> Dict[str, Optional[str]]:
    """
    Raw key/value strings of a config file, without interpolation

    Raises:
        ConfigError: a line that is not a `key=value` statement, or a key
            set more than once
    """
    values: Dict[str, Optional[str]] = {}
    with open(path, encoding='utf-8') as stream:
        for binding in parse_stream(stream):
            line = binding.original.line
            if binding.error:
                raise ConfigError(f"{path}:{line}: cannot parse {binding.original.string.strip()!r}")
            if binding.key is None:
                continue
            if binding.key in values:
                raise ConfigError(f"{path}:{line}: key {binding.key!r} is set more than once", key=binding.key)
            values[binding.key] = binding.value
    return values


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load an experiment config file

    Args:
        path: Config file path

    Returns:
        Parsed and validated config
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(2, "config file not found", str(path))
    config = config_from_mapping(read_config_values(path))
    logger.info("Loaded config %s (hash %s)", path, config_hash(config))
    return config


def config_items(config: ExperimentConfig) -> List[Tuple[str, str]]:
    """
    Every key with its formatted value, in a fixed order
    """
    items = [(name, _format_value(getattr(config, name))) for name in TOP_LEVEL]
    for section in SECTIONS:
        block = getattr(config, section)
        for f in dataclasses.fields(block):
            items.append((f"{section}.{f.name}", _format_value(getattr(block, f.name))))
    return items


def serialize_config(config: ExperimentConfig) -> str:
    return ''.join(f"{key}={value}\n" for key, value in config_items(config))


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(serialize_config(config), encoding='utf-8')
    return path


def config_hash(config: ExperimentConfig) -> str:
    """
    Short SHA-256 digest of the serialized config
    """
    return hashlib.sha256(serialize_config(config).encode('utf-8')).hexdigest()[:12]
