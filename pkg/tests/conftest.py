import numpy as np
import pytest

from v2sg.backend import GeneratorSpec, ToyGenerator
from v2sg.types import LatentWPlus


@pytest.fixture(scope="session")
def small_backend() -> ToyGenerator:
    """4-layer, 32px toy generator shared by fast tests."""
    return ToyGenerator(
        GeneratorSpec(layer_count=4, channel_widths=(12, 12, 12, 12),
                      image_size=32, frequency_count=24, seed=11)
    )


@pytest.fixture(scope="session")
def mid_backend() -> ToyGenerator:
    """16-layer backend matching the default architecture at reduced size."""
    return ToyGenerator(
        GeneratorSpec(layer_count=16, channel_widths=(16,) * 16,
                      image_size=32, frequency_count=32, seed=5)
    )


def random_code(rng: np.random.Generator, layers: int) -> LatentWPlus:
    return LatentWPlus(rng.normal(0.0, 1.0, size=(layers, 512)).astype(np.float32))


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
