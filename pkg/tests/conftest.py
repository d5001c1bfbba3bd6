import functools

import numpy as np
import pytest
from hypothesis import settings

from lowdim.assembly import build_system
from lowdim.structure import builtin

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def system_for(name, h):
    return build_system(builtin(name), h)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
