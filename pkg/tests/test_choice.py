import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slatelab.environment.choice import (
    CascadeParams,
    ChoiceScores,
    cascade_probs,
    conditional_probs,
    environment_score,
    sample_choice,
)
from slatelab.models import Document, UserState
from slatelab.utils.error_handling import ConfigError, InvalidDistributionError

scores_strategy = st.lists(st.floats(min_value=0.0, max_value=2.0), min_size=1, max_size=6)


def test_conditional_probs_example():
    probs = conditional_probs(ChoiceScores.of([2.0, 1.0, 1.0], 1.0))
    assert probs == pytest.approx([0.4, 0.2, 0.2, 0.2])


def test_all_zero_scores_rejected():
    with pytest.raises(InvalidDistributionError):
        conditional_probs(ChoiceScores.of([0.0, 0.0], 0.0))


def test_negative_scores_rejected():
    with pytest.raises(InvalidDistributionError):
        ChoiceScores.of([1.0, -0.5])


@given(scores_strategy, st.floats(min_value=0.01, max_value=2.0))
@settings(max_examples=200)
def test_conditional_probs_normalized(scores, null):
    probs = conditional_probs(ChoiceScores.of(scores, null))
    assert probs.sum() == pytest.approx(1.0)
    assert np.all(probs >= 0)


@given(scores_strategy, st.floats(min_value=0.01, max_value=2.0), st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=200)
def test_conditional_probs_scale_invariant(scores, null, scale):
    base = conditional_probs(ChoiceScores.of(scores, null))
    scaled = conditional_probs(ChoiceScores.of([s * scale for s in scores], null * scale))
    assert scaled == pytest.approx(base)


@given(scores_strategy, st.floats(min_value=0.01, max_value=2.0), st.randoms())
@settings(max_examples=100)
def test_conditional_probs_permutation_equivariant(scores, null, random):
    order = list(range(len(scores)))
    random.shuffle(order)
    base = conditional_probs(ChoiceScores.of(scores, null))
    permuted = conditional_probs(ChoiceScores.of([scores[i] for i in order], null))
    assert permuted[:-1] == pytest.approx(base[:-1][order])
    assert permuted[-1] == pytest.approx(base[-1])


def test_sequential_cascade_example():
    probs = cascade_probs(ChoiceScores.of([1.0, 1.0], 1.0), CascadeParams(1.0, 0.5))
    # base 1/3 each; slot 1 inspected with 0.5 after slot 0 is passed
    first = 1 / 3
    second = (1 - 1 / 3) * 0.5 * (1 / 3)
    assert probs == pytest.approx([first, second, 1 - first - second])


def test_marginal_cascade_example():
    probs = cascade_probs(ChoiceScores.of([1.0, 1.0], 1.0), CascadeParams(1.0, 0.5, mode='marginal'))
    assert probs == pytest.approx([1 / 3, 1 / 6, 0.5])


@given(scores_strategy, st.floats(min_value=0.05, max_value=2.0),
       st.floats(min_value=0.05, max_value=1.0), st.floats(min_value=0.05, max_value=1.0))
@settings(max_examples=200)
def test_cascade_is_a_distribution(scores, null, base, decay):
    for mode in ('sequential', 'marginal'):
        probs = cascade_probs(ChoiceScores.of(scores, null), CascadeParams(base, decay, mode))
        assert probs.sum() == pytest.approx(1.0)
        assert np.all(probs >= 0)


def test_cascade_without_decay_favors_top_slot():
    probs = cascade_probs(ChoiceScores.of([1.0, 1.0, 1.0], 1.0), CascadeParams(1.0, 1.0))
    assert probs[0] > probs[1] > probs[2]


@given(st.floats(min_value=0.1, max_value=2.0), st.floats(min_value=0.0, max_value=0.99),
       st.floats(min_value=0.05, max_value=2.0), st.floats(min_value=0.05, max_value=1.0),
       st.floats(min_value=0.05, max_value=0.99), st.sampled_from(['sequential', 'marginal']))
@settings(max_examples=200)
def test_cascade_rewards_putting_the_better_item_first(high, ratio, null, base, decay, mode):
    params = CascadeParams(base, decay, mode)
    low = high * ratio
    first = cascade_probs(ChoiceScores.of([high, low], null), params)[0]
    second = cascade_probs(ChoiceScores.of([low, high], null), params)[1]
    assert first > second


def test_cascade_order_example():
    params = CascadeParams(1.0, 0.65)
    first = cascade_probs(ChoiceScores.of([2.0, 1.0, 1.0], 1.0), params)
    last = cascade_probs(ChoiceScores.of([1.0, 1.0, 2.0], 1.0), params)
    assert first[0] == pytest.approx(0.4)
    assert last[2] == pytest.approx(0.65 ** 2 * 0.4 * (1 - 0.2) * (1 - 0.65 * 0.2))
    assert first[0] > last[2]


@pytest.mark.parametrize("kwargs", [
    {'base_inspect': 0.0},
    {'decay': 1.5},
    {'mode': 'parallel'},
])
def test_invalid_cascade(kwargs):
    with pytest.raises(ConfigError):
        CascadeParams(**kwargs)


def test_sample_choice_frequencies(rng):
    probs = np.array([0.5, 0.3, 0.2])
    draws = [sample_choice(probs, rng) for _ in range(20000)]
    assert draws.count(0) / 20000 == pytest.approx(0.5, abs=0.02)
    assert draws.count(1) / 20000 == pytest.approx(0.3, abs=0.02)
    assert draws.count(None) / 20000 == pytest.approx(0.2, abs=0.02)


def test_sample_choice_never_picks_zero_probability(rng):
    probs = np.array([0.0, 1.0, 0.0])
    assert all(sample_choice(probs, rng) == 1 for _ in range(200))


def test_certain_no_click(rng):
    assert sample_choice(np.array([0.0, 0.0, 1.0]), rng) is None


@pytest.mark.parametrize("probs", [[0.5, 0.6], [1.2, -0.2], []])
def test_malformed_distribution(rng, probs):
    with pytest.raises(InvalidDistributionError):
        sample_choice(np.array(probs), rng)


def test_environment_score():
    user = UserState(interests=np.array([-1.0, 0.25]), budget=1.0)
    assert environment_score(user, Document(0, 1, 0.0, 4.0)) == pytest.approx(1.25)
    assert environment_score(user, Document(1, 0, 0.0, 4.0)) == 0.0
    assert environment_score(user, Document(2, 1, 0.0, 4.0), shift=2.0) == pytest.approx(2.25)
