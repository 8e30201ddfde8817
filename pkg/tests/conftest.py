import warnings

import pytest
from hypothesis import settings

from qidiff.cipher import builtin_cipher

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


@pytest.fixture(autouse=True)
def _quiet_search_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="no e0 given")
        warnings.filterwarnings("ignore", message="c = ")
        yield


@pytest.fixture(scope="session")
def toyfeistel():
    return builtin_cipher("toyfeistel8")


@pytest.fixture(scope="session")
def weakspn():
    return builtin_cipher("weakspn8")


@pytest.fixture(scope="session")
def strongspn():
    return builtin_cipher("strongspn8")


@pytest.fixture(scope="session")
def tinyfeistel():
    return builtin_cipher("tinyfeistel4")
