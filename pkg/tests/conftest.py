import pytest

from survbench import SimSpec, simulate

# shared fixtures: Weibull(1, 1)-baseline PH data, beta = (0.7, -0.5),
# exponential censoring at rate 0.4 (about 30% censored)
PH_SPEC = dict(n=2000, p=2, beta=(0.7, -0.5), shape=1.0, rate=1.0, cens_rate=0.4)

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def ph42():
    return simulate(SimSpec(**PH_SPEC, seed=42, id="ph42"))


@pytest.fixture(scope="session")
def ph11():
    return simulate(SimSpec(**PH_SPEC, seed=11, id="ph11"))


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)

