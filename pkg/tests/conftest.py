import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gesturesynth.toydata import ground_truth_hand, make_toy_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def reference_hand():
    """Interior hand blob in a 64x64 canvas, exact fingertip and box."""
    return ground_truth_hand(64, (32, 18))


@pytest.fixture
def toy_dataset_root(tmp_path):
    root = tmp_path / "dataset"
    make_toy_dataset(root, ["env_a", "env_b"], frames_per_env=3, size=64, seed=7)
    return root
