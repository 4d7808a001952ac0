from __future__ import annotations

import pytest

import rmas
from rmas.corpus import load_fixture
from rmas.semantics import Engine


@pytest.fixture(scope="session")
def corpus_system():
    return rmas.load_system(load_fixture("resource-allocation").model_text)


@pytest.fixture(scope="session")
def corpus_engine(corpus_system):
    return Engine(corpus_system)


@pytest.fixture(scope="session")
def ping_system():
    return rmas.load_system(load_fixture("ping").model_text)


@pytest.fixture(scope="session")
def deadlock_system():
    return rmas.load_system(load_fixture("deadlock-multicast").model_text)


@pytest.fixture(scope="session")
def exclude_system():
    return rmas.load_system(load_fixture("broadcast-exclude").model_text)
