import pytest

from ellopt import problems


@pytest.fixture(scope="session")
def ex1():
    return problems.make("ex1")


@pytest.fixture(scope="session")
def ex2():
    return problems.make("ex2")


@pytest.fixture(scope="session")
def ex3():
    return problems.make("ex3")


@pytest.fixture(scope="session")
def ex4():
    return problems.make("ex4")
