import numpy as np
import pytest
from PIL import Image

from knitstitch.dataset import CLASS_NAMES


def write_png(path, array):
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(array, dtype=np.uint8)).save(path, format="PNG")


def make_corpus(root, counts, size=(16, 16), seed=0):
    """Create a class-per-subdirectory corpus of small random RGB PNGs."""
    rng = np.random.default_rng(seed)
    for label, n in counts.items():
        for i in range(n):
            img = rng.integers(0, 256, size=(*size, 3), dtype=np.uint8)
            write_png(root / label / f"img_{i:04d}.png", img)
    return root


@pytest.fixture
def tiny_corpus(tmp_path):
    """Three-class corpus, 12 images total."""
    return make_corpus(tmp_path / "corpus", {"cable": 5, "moss": 4, "mesh": 3})


@pytest.fixture
def seven_class_corpus(tmp_path):
    counts = {name: 6 + i for i, name in enumerate(CLASS_NAMES)}
    return make_corpus(tmp_path / "corpus7", counts)
