"""
Configuration pytest : option --runslow pour les reproductions longues
"""
import sys
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent.parent))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="Lance aussi les tests marqués slow (optimisations complètes)")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: reproduction longue, lancée avec --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="test long : utiliser --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
