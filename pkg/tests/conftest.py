import pytest

from anyonent.model import builtin_model, parse_model
from anyonent.states import build_space

# two charges with a doubled fusion channel: x * x = 1 + 2x (dims solve d^2 = 1 + 2d)
MULT2_SPEC = """
model mult2
charges 1 x
fuse x x -> 1:1 x:2
"""


@pytest.fixture(scope="session")
def fib():
    return builtin_model("fibonacci")


@pytest.fixture(scope="session")
def ising():
    return builtin_model("ising")


@pytest.fixture(scope="session")
def mult2():
    return parse_model(MULT2_SPEC)


@pytest.fixture(scope="session")
def fib_space(fib):
    tau = fib.charge("tau")
    return build_space(fib, [tau, tau], [tau, tau])


@pytest.fixture(scope="session")
def fib_space3(fib):
    tau = fib.charge("tau")
    return build_space(fib, [tau] * 3, [tau] * 3)


@pytest.fixture(scope="session")
def ising_space(ising):
    sg = ising.charge("sigma")
    return build_space(ising, [sg, sg], [sg, sg])


@pytest.fixture(scope="session")
def mult2_space(mult2):
    x = mult2.charge("x")
    return build_space(mult2, [x, x], [x, x])
