import os
import sys
from pathlib import Path

import pytest
from hypothesis import settings

from liftmin.covers import subgroup_lemma61
from liftmin.fuchsian import build_regular_polygon_rep
from liftmin.words import SurfaceGroup

sys.path.insert(0, str(Path(__file__).parent))

# derandomised by default so the suite's runtime is stable; long random words
# need large orbit balls.  HYPOTHESIS_PROFILE=explore draws fresh examples.
settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.register_profile("explore", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def bolza():
    return build_regular_polygon_rep(2)


@pytest.fixture(scope="session")
def genus3():
    return build_regular_polygon_rep(3)


@pytest.fixture(scope="session")
def g2():
    return SurfaceGroup(2)


@pytest.fixture(scope="session")
def double_cover(g2):
    return subgroup_lemma61(g2, 1)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
