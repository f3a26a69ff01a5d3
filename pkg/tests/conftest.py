import warnings

import numpy as np
import pytest
from hypothesis import settings

from parabolic_screen.config import IncidenceSpec, ScreenGeometry

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def geometry():
    return ScreenGeometry.from_epsilon(0.05)


@pytest.fixture
def reference_spec():
    return IncidenceSpec(0.045, 100.0, 31, 1e-3)


def quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*args, **kw)


def rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(np.asarray(b))))
