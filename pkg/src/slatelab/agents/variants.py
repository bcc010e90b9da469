"""
Agent variant strings: RANDOM, FSQ, MYOP-<S>, SARSA-<S>, QL-<T>T-<S>S
"""

import re
from dataclasses import dataclass
from typing import Optional

from ..utils.error_handling import ConfigError

AGENT_KINDS = ('random', 'myopic', 'sarsa', 'qlearning', 'fsq')

# Letter used in variant names for each optimizer
OPTIMIZER_LETTERS = {'T': 'top_k', 'G': 'greedy', 'O': 'exact'}
LETTERS_BY_OPTIMIZER = {name: letter for letter, name in OPTIMIZER_LETTERS.items()}

_VARIANT_PATTERN = re.compile(r'^(?:(RANDOM|FSQ)|(MYOP|SARSA)-([TGO])S|QL-([TGO])T-([TGO])S)$')


@dataclass(frozen=True)
class AgentConfig:
    """
    Policy kind, slate optimizers for training and serving, discount and
    exploration rate
    """
    kind: str
    serve_opt: str = 'top_k'
    train_opt: Optional[str] = None
    gamma: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        if self.kind not in AGENT_KINDS:
            raise ConfigError(f"unknown agent kind {self.kind!r}", key="agents")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma must lie in [0, 1]", key="agent.gamma")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]", key="agent.epsilon")
        if self.kind == 'myopic' and self.gamma != 0.0:
            raise ConfigError("myopic agents use gamma = 0", key="agent.gamma")
        if self.kind == 'qlearning' and self.train_opt is None:
            raise ConfigError("Q-learning needs a training optimizer", key="agents")

    @property
    def name(self) -> str:
        """
        Variant string, e.g. QL-OT-GS
        """
        if self.kind == 'random':
            return 'RANDOM'
        if self.kind == 'fsq':
            return 'FSQ'
        serve = LETTERS_BY_OPTIMIZER.get(self.serve_opt, '?')
        if self.kind == 'myopic':
            return f"MYOP-{serve}S"
        if self.kind == 'sarsa':
            return f"SARSA-{serve}S"
        train = LETTERS_BY_OPTIMIZER.get(self.train_opt or '', '?')
        return f"QL-{train}T-{serve}S"

    @property
    def learns(self) -> bool:
        return self.kind != 'random'


def parse_variant(variant: str, gamma: Optional[float] = None, epsilon: float = 0.1) -> AgentConfig:
    """
    Build an AgentConfig from a variant string

    Args:
        variant: RANDOM, FSQ, MYOP-TS, SARSA-GS, QL-OT-OS, ...
        gamma: Discount for non-myopic agents (default 1.0)
        epsilon: Exploration rate during training
    """
    match = _VARIANT_PATTERN.match(variant.strip().upper())
    if not match:
        raise ConfigError(f"unknown agent variant {variant!r}", key="agents")
    atomic, family, family_serve, ql_train, ql_serve = match.groups()
    discount = 1.0 if gamma is None else gamma

    if atomic == 'RANDOM':
        return AgentConfig(kind='random', gamma=discount, epsilon=epsilon)
    if atomic == 'FSQ':
        return AgentConfig(kind='fsq', serve_opt='brute_force', gamma=discount, epsilon=epsilon)
    if family == 'MYOP':
        return AgentConfig(kind='myopic', serve_opt=OPTIMIZER_LETTERS[family_serve], gamma=0.0, epsilon=epsilon)
    if family == 'SARSA':
        return AgentConfig(kind='sarsa', serve_opt=OPTIMIZER_LETTERS[family_serve], gamma=discount, epsilon=epsilon)
    return AgentConfig(
        kind='qlearning',
        serve_opt=OPTIMIZER_LETTERS[ql_serve],
        train_opt=OPTIMIZER_LETTERS[ql_train],
        gamma=discount,
        epsilon=epsilon,
    )
