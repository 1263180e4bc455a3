import numpy as np
import pytest
from hypothesis import settings

from gmib.data import write_idx

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def digits_idx(tmp_path_factory):
    """sklearn's 8x8 digits written as an IDX image/label pair."""
    datasets = pytest.importorskip("sklearn.datasets")
    digits = datasets.load_digits()
    images = np.clip(np.round(digits.images * 255.0 / 16.0), 0, 255).astype(np.uint8)
    root = tmp_path_factory.mktemp("digits")
    img, lab = root / "digits-images-idx3-ubyte", root / "digits-labels-idx1-ubyte"
    write_idx(images, digits.target.astype(np.uint8), img, lab)
    return img, lab
