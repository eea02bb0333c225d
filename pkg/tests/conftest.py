import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gibq.lattice import FrequencyLattice, SpectralField

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def lattice():
    return FrequencyLattice(period=1.0, cutoff=1 << 24)


def hermitian_field(lattice, seed, max_freq=24, amplitude=1.0):
    rng = np.random.default_rng(seed)
    xi = np.arange(1, max_freq + 1)
    z = (rng.standard_normal(max_freq) + 1j * rng.standard_normal(max_freq))
    z *= amplitude * np.exp(-0.1 * xi)
    pairs = [(0, amplitude * rng.standard_normal())]
    pairs += [(int(x), v) for x, v in zip(xi, z)]
    pairs += [(-int(x), np.conj(v)) for x, v in zip(xi, z)]
    return SpectralField.from_pairs(lattice, pairs)
