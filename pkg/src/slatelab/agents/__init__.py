from .policies import Agent, FSQAgent, RandomAgent, ServedSlate, SlateQAgent, build_agent
from .replay import ExperienceBuffer
from .tabular import TabularSlateQ, TinySlateMDP, solve_slate_mdp
from .targets import fsq_target, qlearning_target, sarsa_target, slate_combinations, slate_expectation
from .variants import AgentConfig, parse_variant

__all__ = [
    'Agent',
    'AgentConfig',
    'ExperienceBuffer',
    'FSQAgent',
    'RandomAgent',
    'ServedSlate',
    'SlateQAgent',
    'TabularSlateQ',
    'TinySlateMDP',
    'build_agent',
    'fsq_target',
    'parse_variant',
    'qlearning_target',
    'sarsa_target',
    'slate_combinations',
    'slate_expectation',
    'solve_slate_mdp',
]
