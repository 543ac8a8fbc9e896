import numpy as np
import pytest

from larche.potential import DoubleWell
from larche.profile import Profiles


@pytest.fixture(scope="session")
def quartic():
    return DoubleWell.quartic()


@pytest.fixture(scope="session")
def profiles(quartic):
    return Profiles.compute(quartic)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Call ``report(k, passed, detail)`` once per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def add(k, passed, detail):
        line = f"acceptance {k}: {'PASS' if passed else 'FAIL'} | {detail}"
        lines.append(line)
        print(line)
    return add


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
