import pytest

from ar2max import gaussian_innovation, initial_law, make_innovation, validate_params
from ar2max.maxdist import build_expansion, discretize

X_REF = 3.0
ACCEPTANCE_LINES = []


class Ref:
    def __init__(self, name, mode, law_seed=1):
        self.params = validate_params(0.5, 0.3, 1.0)
        self.innovation = make_innovation(name, 1.0)
        self.mode = mode
        self.law = initial_law(self.params, self.innovation, mode, seed=law_seed)
        self.x = X_REF
        self._disc, self._exp = {}, {}

    def disc(self, m=40, x=None):
        key = (m, self.x if x is None else x)
        if key not in self._disc:
            self._disc[key] = discretize(self.params, self.innovation, key[1], m)
        return self._disc[key]

    def expansion(self, m=40, x=None, J=None):
        key = (m, self.x if x is None else x, J)
        if key not in self._exp:
            self._exp[key] = build_expansion(self.params, self.innovation, self.law, key[1],
                                             J=J, disc=self.disc(m, key[1]))
        return self._exp[key]


@pytest.fixture(scope="session")
def gauss_ref():
    return Ref("gaussian", "gaussian-stationary")


@pytest.fixture(scope="session")
def logistic_ref():
    return Ref("logistic", "empirical-burnin")


@pytest.fixture(scope="session")
def gauss():
    return gaussian_innovation(1.0)


@pytest.fixture
def report():
    def record(label, ok, detail):
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
