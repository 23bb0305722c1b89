import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cwdmd.checks import lti_ensemble  # noqa: E402
from cwdmd.config import default_config  # noqa: E402


@pytest.fixture(scope="session")
def lti_cfg():
    return default_config("lti")


@pytest.fixture(scope="session")
def lti_small_ensemble(lti_cfg):
    """Eight LTI trajectories on the full default horizon."""
    return lti_ensemble(lti_cfg, count=8)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, _, line in sorted(lines):
            terminalreporter.write_line(line)
