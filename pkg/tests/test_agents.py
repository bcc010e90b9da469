import itertools

import numpy as np
import pytest

from slatelab.agents.policies import FSQAgent, RandomAgent, SlateQAgent, build_agent
from slatelab.agents.variants import parse_variant
from slatelab.converters.features import FeatureConverter
from slatelab.models import Document, Transition, UserState
from slatelab.qmodel.network import QNetwork
from slatelab.utils.error_handling import ConfigError, InfeasibleSlateError


def make_agent(variant, simulator, qmodel, seed=0, **kwargs):
    return build_agent(parse_variant(variant, **kwargs), simulator, qmodel, np.random.default_rng(seed))


def test_build_agent_kinds(simulator, tiny_qmodel):
    assert isinstance(make_agent('RANDOM', simulator, tiny_qmodel), RandomAgent)
    assert isinstance(make_agent('SARSA-TS', simulator, tiny_qmodel), SlateQAgent)
    assert isinstance(make_agent('QL-OT-GS', simulator, tiny_qmodel), SlateQAgent)
    fsq = make_agent('FSQ', simulator, tiny_qmodel)
    assert isinstance(fsq, FSQAgent)
    assert fsq.network.input_width == 83


def test_random_slates_are_uniform(simulator, tiny_qmodel, user, candidates):
    agent = make_agent('RANDOM', simulator, tiny_qmodel)
    rng = np.random.default_rng(11)
    counts = {combo: 0 for combo in itertools.combinations(range(10), 3)}
    draws = 24000
    for _ in range(draws):
        counts[tuple(sorted(agent.serve(user, candidates, rng).positions))] += 1
    # 120 slates, expected 200 each with sd ~ 14.1
    assert all(abs(count - 200) < 5 * 14.2 for count in counts.values())


def test_serve_requires_enough_candidates(simulator, tiny_qmodel, user, candidates):
    agent = make_agent('SARSA-TS', simulator, tiny_qmodel)
    with pytest.raises(InfeasibleSlateError):
        agent.serve(user, candidates[:2], np.random.default_rng(0))


def test_zero_network_breaks_ties_by_position(simulator, tiny_qmodel, user, candidates):
    agent = make_agent('MYOP-TS', simulator, tiny_qmodel)
    agent.network = QNetwork.zeros(agent.network.layer_dims)
    served = agent.serve(user, candidates, np.random.default_rng(0))
    assert served.positions == (0, 1, 2)
    assert not served.explored


def test_exact_serving_on_heuristic_trap(simulator, tiny_qmodel):
    """
    Item values equal to the quality feature, scores from interests: a has
    v = 2, q = 0.8; b1 and b2 have v = 1, q = 1
    """
    agent = make_agent('SARSA-OS', simulator, tiny_qmodel)
    agent.null_score = 1.0
    weights = np.zeros((41, 1))
    weights[-1, 0] = 1.0
    agent.network = QNetwork([weights], [np.zeros(1)])
    interests = np.zeros(20)
    interests[0] = 1.0
    user = UserState(interests=interests, budget=200.0)
    docs = [Document(0, 0, 0.8, 4.0), Document(1, 1, 1.0, 4.0), Document(2, 2, 1.0, 4.0)]
    agent.slate_size = 2
    assert set(agent.serve(user, docs, np.random.default_rng(0)).positions) == {1, 2}
    topk = make_agent('SARSA-TS', simulator, tiny_qmodel)
    topk.null_score = 1.0
    topk.network = agent.network
    topk.slate_size = 2
    assert topk.serve(user, docs, np.random.default_rng(0)).positions == (0, 1)


def test_exploration_rate(simulator, tiny_qmodel, user, candidates):
    agent = make_agent('SARSA-TS', simulator, tiny_qmodel, epsilon=0.1)
    rng = np.random.default_rng(5)
    trials = 5000
    explored = sum(agent.serve(user, candidates, rng, explore=True).explored for _ in range(trials))
    # 3 sigma of Binomial(5000, 0.1) is ~ 63.6
    assert abs(explored - 500) < 64
    assert not any(agent.serve(user, candidates, rng).explored for _ in range(100))


def test_slate_expectation_identity(simulator, tiny_qmodel):
    rng = np.random.default_rng(21)
    agent = make_agent('QL-OT-OS', simulator, tiny_qmodel)
    for _ in range(1000):
        user = simulator.new_user(rng)
        docs = simulator.candidates(rng)
        positions = tuple(int(i) for i in rng.choice(10, size=3, replace=False))
        assert agent.expected_slate_value(user, docs, positions) == pytest.approx(
            agent.slate_value(user, docs, positions), abs=1e-9)


def test_only_clicked_transitions_train_slateq(simulator, tiny_qmodel):
    slateq = make_agent('SARSA-TS', simulator, tiny_qmodel)
    fsq = make_agent('FSQ', simulator, tiny_qmodel)
    no_click = Transition(slate_features=np.zeros((3, 41)), slate_scores=np.ones(3), clicked=None, reward=0.0)
    click = Transition(slate_features=np.zeros((3, 41)), slate_scores=np.ones(3), clicked=1, reward=4.0)
    assert not slateq.learns_from(no_click)
    assert slateq.learns_from(click)
    assert fsq.learns_from(no_click)


def session_transitions(simulator, user, rng, clicked=True, count=8):
    batch = []
    for _ in range(count):
        docs = simulator.candidates(rng)
        features = FeatureConverter.featurize_candidates(user, docs)
        next_docs = simulator.candidates(rng)
        batch.append(Transition(
            slate_features=features[:3],
            slate_scores=np.ones(3),
            clicked=0 if clicked else None,
            reward=4.0 if clicked else 0.0,
            next_features=FeatureConverter.featurize_candidates(user, next_docs),
            next_scores=np.full(10, 1.5),
            next_slate=(0, 1, 2),
        ))
    return batch


@pytest.mark.parametrize("variant", ['MYOP-TS', 'SARSA-TS', 'QL-GT-TS', 'FSQ'])
def test_train_batch_updates_network(variant, simulator, tiny_qmodel, user):
    agent = make_agent(variant, simulator, tiny_qmodel)
    batch = session_transitions(simulator, user, np.random.default_rng(2))
    before = [p.copy() for p in agent.network.parameters()]
    loss = agent.train_batch(batch)
    assert np.isfinite(loss)
    assert agent.grad_steps == 1
    assert any(not np.array_equal(a, b) for a, b in zip(before, agent.network.parameters()))


def test_batched_targets_match_single_targets(simulator, tiny_qmodel, user):
    from slatelab.agents.targets import qlearning_target
    agent = make_agent('QL-OT-TS', simulator, tiny_qmodel)
    batch = session_transitions(simulator, user, np.random.default_rng(3))
    single = [qlearning_target(tr, agent.label_network, agent.train_optimizer, 1.0) for tr in batch]
    assert agent.targets(batch) == pytest.approx(single)


def test_myopic_regresses_to_click_reward(simulator, user):
    from slatelab.config import QModelConfig
    qmodel = QModelConfig(hidden_dims=(8,), lr=0.02, batch_size=8, buffer_size=100, learning_starts=8)
    agent = make_agent('MYOP-TS', simulator, qmodel)
    batch = session_transitions(simulator, user, np.random.default_rng(4))
    for _ in range(1500):
        agent.train_batch(batch)
    assert agent.network.predict_batch(np.vstack([tr.slate_features[0] for tr in batch])) == pytest.approx(
        np.full(8, 4.0), abs=0.05)


def test_label_sync_period(simulator, tiny_qmodel, user):
    agent = make_agent('SARSA-TS', simulator, tiny_qmodel)
    batch = session_transitions(simulator, user, np.random.default_rng(6))
    x = batch[0].slate_features[0]
    frozen = agent.label_network.predict(x)
    for _ in range(tiny_qmodel.label_sync_period - 1):
        agent.train_batch(batch)
    assert agent.label_network.predict(x) == frozen
    agent.train_batch(batch)
    assert agent.label_syncs == 1
    assert agent.label_network.predict(x) == pytest.approx(agent.network.predict(x))


def test_checkpoint_restores_agent(simulator, tiny_qmodel, user, candidates, tmp_path):
    agent = make_agent('SARSA-TS', simulator, tiny_qmodel, seed=1)
    path = agent.save(tmp_path / 'SARSA-TS.npz')
    restored = build_agent(parse_variant('SARSA-TS'), simulator, tiny_qmodel, np.random.default_rng(99), checkpoint=path)
    x = FeatureConverter.featurize(user, candidates[0])
    assert restored.network.predict(x) == agent.network.predict(x)
    with pytest.raises(ConfigError):
        build_agent(parse_variant('MYOP-TS'), simulator, tiny_qmodel, np.random.default_rng(0), checkpoint=path)


def test_fsq_serves_best_enumerated_slate(simulator, tiny_qmodel, user, candidates):
    agent = make_agent('FSQ', simulator, tiny_qmodel)
    served = agent.serve(user, candidates, np.random.default_rng(0))
    items = FeatureConverter.featurize_candidates(user, candidates)
    values = {
        combo: agent.network.predict(FeatureConverter.slate_features(items[list(combo)], 20))
        for combo in itertools.combinations(range(10), 3)
    }
    assert values[served.positions] == pytest.approx(max(values.values()))
    assert list(served.positions) == sorted(served.positions)


def test_snapshot_is_read_only(simulator, tiny_qmodel, user, candidates):
    agent = make_agent('SARSA-TS', simulator, tiny_qmodel)
    frozen = agent.snapshot()
    rng = np.random.default_rng(0)
    assert frozen.serve(user, candidates, rng).positions == agent.serve(user, candidates, np.random.default_rng(0)).positions
    batch = session_transitions(simulator, user, np.random.default_rng(7))
    x = batch[0].slate_features[0]
    before = frozen.network.predict(x)
    agent.train_batch(batch)
    assert frozen.network.predict(x) == before
