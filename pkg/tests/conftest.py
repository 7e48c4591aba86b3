import os

import pytest


def _slow_enabled(config) -> bool:
    if os.environ.get("SITAWIM_ACCEPT_SLOW") == "1":
        return True
    # an explicit -m expression mentioning "slow" opts in
    return "slow" in (config.getoption("-m") or "")


def pytest_collection_modifyitems(config, items):
    if _slow_enabled(config):
        return
    skip = pytest.mark.skip(
        reason="slow workload; set SITAWIM_ACCEPT_SLOW=1 or pass -m slow"
    )
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
