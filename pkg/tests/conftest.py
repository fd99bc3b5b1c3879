import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


def ket(*amps):
    v = np.asarray(amps, dtype=np.complex128)
    return v / np.linalg.norm(v)


def pure(*amps):
    v = ket(*amps)
    return np.outer(v, v.conj())
