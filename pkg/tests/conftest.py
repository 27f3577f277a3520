import numpy as np
import pytest

from qswitch.spacetime import CentralBody
from qswitch.switch_model import AmplitudeModel

EARTH_MASS = 5.9722e24
EARTH_RADIUS = 6.371e6


@pytest.fixture(scope="session")
def earth():
    return CentralBody(EARTH_MASS, EARTH_RADIUS)


def random_model(rng):
    """Amplitude model drawn uniformly from the unit disks, all phases free."""
    def disk():
        r = np.sqrt(rng.uniform())
        return complex(r * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi)))

    return AmplitudeModel(
        c1a=disk(), c4a=disk(), c1b=disk(), c2b=disk(),
        f_ba=disk(), f_ab=disk(),
        delta_1a=rng.uniform(0, 2 * np.pi),
        delta_4a=rng.uniform(0, 2 * np.pi),
        delta_1b=rng.uniform(0, 2 * np.pi),
        delta_2b=rng.uniform(0, 2 * np.pi),
        gamma_ba=rng.uniform(0, 2 * np.pi),
        gamma_ab=rng.uniform(0, 2 * np.pi),
    )


def random_alphas(rng):
    raw = rng.normal(size=5) + 1j * rng.normal(size=5)
    return raw / np.linalg.norm(raw)
