import dataclasses

import numpy as np
import pytest

from slatelab.config import ExperimentConfig, QModelConfig, ScheduleConfig
from slatelab.environment.corpus import TopicCatalog
from slatelab.environment.simulator import SessionSimulator
from slatelab.environment.user_model import DynamicsParams
from slatelab.models import Document, UserState


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def catalog():
    return TopicCatalog.split()


@pytest.fixture
def dynamics():
    return DynamicsParams()


@pytest.fixture
def simulator(catalog, dynamics):
    return SessionSimulator(catalog, dynamics)


@pytest.fixture
def user():
    interests = np.linspace(-0.9, 0.9, 20)
    return UserState(interests=interests, budget=200.0)


@pytest.fixture
def candidates():
    return [Document(id=i, topic=(3 * i) % 20, quality=-2.0 + 0.4 * i, length=4.0) for i in range(10)]


@pytest.fixture
def tiny_qmodel():
    return QModelConfig(
        hidden_dims=(8,),
        lr=1e-3,
        batch_size=8,
        buffer_size=500,
        label_sync_period=20,
        learning_starts=16,
    )


@pytest.fixture
def tiny_config(tiny_qmodel):
    """
    Short schedule with a small budget so a full suite runs in seconds
    """
    config = ExperimentConfig(
        seed=3,
        agents=('RANDOM', 'MYOP-TS', 'SARSA-TS'),
        qmodel=tiny_qmodel,
        schedule=ScheduleConfig(train_steps=300, eval_every=100, eval_users=3, final_eval_users=5),
    )
    env = dataclasses.replace(config.env, initial_budget=20.0)
    return dataclasses.replace(config, env=env)
