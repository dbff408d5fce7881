import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_symplectic(rng, d):
    """Product of random beamsplitters, mild squeezers and phase rotations on d modes.

    Gains stay below 1.5 so that ||S|| is O(10) and spectra are well conditioned.
    """
    from gaussqkd.symplectic import beamsplitter, phase_rotation, two_mode_squeezer

    s = np.eye(2 * d)
    for _ in range(3 * d):
        i, j = rng.choice(d, 2, replace=False)
        s = beamsplitter(rng.random(), (i, j), d).matrix @ s
        s = two_mode_squeezer(1 + 0.5 * rng.random(), (i, j), d).matrix @ s
        s = phase_rotation(2 * np.pi * rng.random(), int(i), d).matrix @ s
    return s
