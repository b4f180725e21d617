"""Shared fixtures: a tiny on-disk image corpus."""

import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def image_root(tmp_path):
    """Four 32x32 images: two under real/, two under m1/."""
    rng = np.random.default_rng(7)
    for class_name, names in (("real", ["a", "b"]), ("m1", ["c", "d"])):
        folder = tmp_path / "media" / class_name
        folder.mkdir(parents=True)
        for name in names:
            pixels = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
            Image.fromarray(pixels).save(folder / f"{name}.png")
    return tmp_path / "media"
