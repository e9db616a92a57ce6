from __future__ import annotations

import pytest

from util import t1_trace


@pytest.fixture
def t1():
    return t1_trace()


@pytest.fixture
def t1_confident():
    return t1_trace(with_confidence=True)
