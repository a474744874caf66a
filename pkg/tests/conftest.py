import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pyroclass.dataset import RgbImage

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image(rng, width: int, height: int) -> RgbImage:
    pixels = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    return RgbImage(width=width, height=height, pixels=pixels)
