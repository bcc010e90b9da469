import numpy as np
import pytest

from slatelab.agents.targets import (
    fsq_target,
    qlearning_target,
    sarsa_target,
    slate_combinations,
    slate_expectation,
)
from slatelab.models import Transition
from slatelab.optimizers.slate import brute_force_slate, exact_slate
from slatelab.qmodel.network import QNetwork, sync_label_network
from slatelab.utils.error_handling import EnumerationBudgetError, SlateLabError


def quality_reader():
    """
    Label network that predicts the last feature of a 3-wide item vector
    """
    return sync_label_network(QNetwork([np.array([[0.0], [0.0], [1.0]])], [np.zeros(1)]))


def rows(values):
    return np.array([[0.0, 1.0, v] for v in values])


def clicked(**kwargs):
    defaults = dict(slate_features=rows([0.0, 0.0, 0.0]), slate_scores=np.ones(3), clicked=0, reward=4.0)
    defaults.update(kwargs)
    return Transition(**defaults)


def test_terminal_returns_reward():
    tr = clicked(terminal=True)
    assert sarsa_target(tr, quality_reader(), 1.0) == 4.0
    assert qlearning_target(tr, quality_reader(), exact_slate, 1.0) == 4.0


def test_sarsa_expectation_over_next_slate():
    tr = clicked(next_features=rows([1.0, 2.0, 3.0, 9.0]), next_scores=np.array([2.0, 1.0, 1.0, 5.0]), next_slate=(0, 1, 2))
    assert sarsa_target(tr, quality_reader(), 1.0) == pytest.approx(5.4)


def test_sarsa_uses_precomputed_predictions():
    tr = clicked(next_features=rows([1.0, 2.0, 3.0]), next_scores=np.array([2.0, 1.0, 1.0]), next_slate=(0, 1, 2))
    assert sarsa_target(tr, quality_reader(), 0.5, next_q=np.array([1.0, 2.0, 3.0])) == pytest.approx(4.7)


def test_zero_discount_ignores_future():
    tr = clicked(next_features=rows([100.0] * 3), next_scores=np.ones(3), next_slate=(0, 1, 2))
    assert sarsa_target(tr, quality_reader(), 0.0) == 4.0
    assert qlearning_target(tr, quality_reader(), exact_slate, 0.0) == 4.0


def test_unclicked_transition_rejected():
    tr = clicked(clicked=None, terminal=True)
    with pytest.raises(SlateLabError):
        sarsa_target(tr, quality_reader(), 1.0)
    with pytest.raises(SlateLabError):
        qlearning_target(tr, quality_reader(), exact_slate, 1.0)


def test_missing_next_state_rejected():
    with pytest.raises(SlateLabError):
        sarsa_target(clicked(), quality_reader(), 1.0)
    tr = clicked(next_features=rows([1.0, 2.0, 3.0]), next_scores=np.ones(3))
    with pytest.raises(SlateLabError):
        sarsa_target(tr, quality_reader(), 1.0)


def test_qlearning_maximizes_over_candidates():
    values = [0.5, 3.0, -1.0, 2.0, 0.0]
    scores = np.array([1.0, 0.5, 2.0, 1.5, 1.0])
    tr = clicked(next_features=rows(values), next_scores=scores, next_slate=(0, 2, 4))
    label = quality_reader()
    q_exact = qlearning_target(tr, label, exact_slate, 1.0)
    q_brute = qlearning_target(tr, label, brute_force_slate, 1.0)
    assert q_exact == pytest.approx(q_brute, abs=1e-12)
    assert q_exact >= sarsa_target(tr, label, 1.0)


def test_slate_expectation_matches_formula():
    value = slate_expectation(np.array([2.0, 1.0]), np.array([1.0, 4.0]), 1.0, 0.5)
    assert value == pytest.approx((2.0 + 4.0 + 0.5) / 4.0)


def test_fsq_target_zero_network():
    net = QNetwork.zeros([2 + 2 * 3, 4, 1])
    features = np.zeros((4, 5))
    tr = Transition(slate_features=features[:2], slate_scores=np.ones(2), clicked=None, reward=0.0,
                    next_features=features, next_scores=np.ones(4))
    assert fsq_target(tr, net, 1.0, num_topics=2) == 0.0
    assert fsq_target(tr, net, 1.0, num_topics=2, next_q=np.array([1.0, 3.0, 2.0])) == 3.0


def test_fsq_target_terminal():
    tr = Transition(slate_features=np.zeros((2, 5)), slate_scores=np.ones(2), clicked=1, reward=4.0, terminal=True)
    assert fsq_target(tr, QNetwork.zeros([8, 1]), 1.0, num_topics=2) == 4.0


def test_slate_combinations():
    combos = slate_combinations(10, 3)
    assert combos.shape == (120, 3)
    assert combos[0].tolist() == [0, 1, 2]
    assert combos[-1].tolist() == [7, 8, 9]
    assert not combos.flags.writeable
    with pytest.raises(EnumerationBudgetError):
        slate_combinations(40, 10)
