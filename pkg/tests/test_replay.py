import threading

import numpy as np

from slatelab.agents.replay import ExperienceBuffer
from slatelab.models import Transition


def transition(reward):
    return Transition(slate_features=np.zeros((1, 1)), slate_scores=np.ones(1), clicked=0, reward=float(reward))


def test_fifo_eviction():
    buffer = ExperienceBuffer(capacity=3)
    for reward in range(5):
        buffer.add(transition(reward))
    assert len(buffer) == 3
    assert buffer.total_added == 5
    rewards = {tr.reward for tr in buffer.sample(200, np.random.default_rng(0))}
    assert rewards == {2.0, 3.0, 4.0}


def test_can_sample():
    buffer = ExperienceBuffer(capacity=10)
    buffer.add(transition(0))
    assert buffer.can_sample(1)
    assert not buffer.can_sample(2)


def test_sampling_is_seeded():
    buffer = ExperienceBuffer()
    for reward in range(50):
        buffer.add(transition(reward))
    a = [tr.reward for tr in buffer.sample(10, np.random.default_rng(1))]
    b = [tr.reward for tr in buffer.sample(10, np.random.default_rng(1))]
    assert a == b


def test_concurrent_producers():
    buffer = ExperienceBuffer(capacity=1000)

    def produce():
        for reward in range(250):
            buffer.add(transition(reward))

    threads = [threading.Thread(target=produce) for _ in range(4)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert len(buffer) == 1000
    assert buffer.total_added == 1000
