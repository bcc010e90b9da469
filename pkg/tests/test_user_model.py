import numpy as np
import pytest

from slatelab.environment.user_model import (
    DynamicsParams,
    apply_click,
    apply_no_click,
    interest,
    nudge_magnitude,
    sample_user,
    satisfaction,
)
from slatelab.models import Document, UserState
from slatelab.utils.error_handling import ConfigError, TerminatedUserError


def make_user(value=0.0, budget=200.0, num_topics=3):
    return UserState(interests=np.full(num_topics, value), budget=budget)


def test_sampled_interests_in_range(dynamics, rng):
    user = sample_user(dynamics, 20, rng)
    assert user.interests.shape == (20,)
    assert np.all(np.abs(user.interests) <= 1.0)
    assert user.budget == 200.0
    assert user.alive


def test_interest_reads_topic(dynamics):
    user = UserState(interests=np.array([0.1, -0.7, 0.4]), budget=10.0)
    doc = Document(id=0, topic=1, quality=0.0, length=4.0)
    assert interest(user, doc) == pytest.approx(-0.7)


def test_satisfaction_mixes_interest_and_quality():
    user = UserState(interests=np.array([0.5]), budget=10.0)
    doc = Document(id=0, topic=0, quality=2.0, length=4.0)
    assert satisfaction(user, doc, DynamicsParams(alpha=1.0)) == pytest.approx(2.0)
    assert satisfaction(user, doc, DynamicsParams(alpha=0.0)) == pytest.approx(0.5)
    assert satisfaction(user, doc, DynamicsParams(alpha=0.5)) == pytest.approx(1.25)


def test_neutral_click_costs_full_length(dynamics, rng):
    doc = Document(id=0, topic=0, quality=0.0, length=4.0)
    updated, reward = apply_click(make_user(), doc, dynamics, rng)
    assert updated.budget == pytest.approx(196.0)
    assert reward == 4.0


def test_high_quality_click_earns_bonus(dynamics, rng):
    doc = Document(id=0, topic=0, quality=3.4, length=4.0)
    updated, _ = apply_click(make_user(), doc, dynamics, rng)
    # bonus = (0.9 / 3.4) * 4 * 3.4 = 3.6
    assert updated.budget == pytest.approx(200.0 - 0.4)


def test_low_quality_click_costs_more(dynamics, rng):
    doc = Document(id=0, topic=0, quality=-3.4, length=4.0)
    updated, _ = apply_click(make_user(), doc, dynamics, rng)
    assert updated.budget == pytest.approx(200.0 - 7.6)


def test_no_click_cost(dynamics):
    updated = apply_no_click(make_user(), dynamics)
    assert updated.budget == pytest.approx(199.5)
    assert updated.alive


def test_budget_exhaustion_terminates(dynamics, rng):
    doc = Document(id=0, topic=0, quality=0.0, length=4.0)
    updated, _ = apply_click(make_user(budget=3.0), doc, dynamics, rng)
    assert not updated.alive
    with pytest.raises(TerminatedUserError):
        apply_click(updated, doc, dynamics, rng)
    with pytest.raises(TerminatedUserError):
        apply_no_click(updated, dynamics)


def test_four_hundred_no_clicks_end_session(dynamics):
    user = make_user()
    events = 0
    while user.alive:
        user = apply_no_click(user, dynamics)
        events += 1
    assert events == 400


def test_nudge_magnitude_modes():
    prose = DynamicsParams(nudge_mode='prose')
    literal = DynamicsParams(nudge_mode='literal')
    assert nudge_magnitude(0.0, prose) == pytest.approx(0.3)
    assert nudge_magnitude(0.5, prose) == pytest.approx(0.15)
    assert nudge_magnitude(1.0, prose) == pytest.approx(0.0)
    assert nudge_magnitude(0.0, literal) == pytest.approx(0.0)
    assert nudge_magnitude(0.5, literal) == pytest.approx(0.075)


def test_nudge_only_touches_clicked_topic(dynamics, rng):
    user = UserState(interests=np.array([0.2, -0.4, 0.6]), budget=50.0)
    doc = Document(id=0, topic=1, quality=0.0, length=4.0)
    updated, _ = apply_click(user, doc, dynamics, rng)
    assert updated.interests[0] == user.interests[0]
    assert updated.interests[2] == user.interests[2]
    assert abs(updated.interests[1] - (-0.4)) == pytest.approx(0.3 * 0.6)
    # The input state is left untouched
    assert user.interests[1] == -0.4


def test_nudge_polarity_follows_interest(dynamics):
    rng = np.random.default_rng(0)
    doc = Document(id=0, topic=0, quality=0.0, length=4.0)
    ups = 0
    trials = 4000
    for _ in range(trials):
        updated, _ = apply_click(make_user(0.5, num_topics=1), doc, dynamics, rng)
        ups += updated.interests[0] > 0.5
    # P(up) = (0.5 + 1) / 2 = 0.75, sd ~ 0.0068
    assert ups / trials == pytest.approx(0.75, abs=0.03)


def test_interests_stay_clamped(dynamics, rng):
    user = make_user(0.95, num_topics=1)
    doc = Document(id=0, topic=0, quality=0.0, length=4.0)
    for _ in range(50):
        user, _ = apply_click(UserState(user.interests, 200.0), doc, dynamics, rng)
        assert -1.0 <= user.interests[0] <= 1.0


def test_click_reward_override(rng):
    params = DynamicsParams(click_reward=1.0)
    doc = Document(id=0, topic=0, quality=0.0, length=4.0)
    _, reward = apply_click(make_user(), doc, params, rng)
    assert reward == 1.0


@pytest.mark.parametrize("kwargs", [
    {'initial_budget': 0.0},
    {'no_click_cost': 0.0},
    {'alpha': 1.5},
    {'nudge_fraction': -0.1},
    {'nudge_mode': 'sideways'},
])
def test_invalid_dynamics(kwargs):
    with pytest.raises(ConfigError):
        DynamicsParams(**kwargs)


def test_bonus_bound():
    DynamicsParams().check_bonus_bound(3.4)
    with pytest.raises(ConfigError):
        DynamicsParams(bonus_coeff=0.3).check_bonus_bound(3.4)
