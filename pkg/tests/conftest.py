import random

import pytest


@pytest.fixture
def rnd():
    return random.Random(20240611)


def bits_of(value: int, width: int) -> str:
    return format(value, f"0{width}b")
