import numpy as np
import pytest

from rift2 import RiftConfig, compute_fields, detect_keypoints
from rift2.synthetic import voronoi_label_map


@pytest.fixture(scope="session")
def label_image():
    """Structured 384x384 label map used across detector/descriptor tests."""
    return voronoi_label_map(384, 70, seed=11)


@pytest.fixture(scope="session")
def small_config():
    return RiftConfig(max_keypoints=400)


@pytest.fixture(scope="session")
def label_fields(label_image, small_config):
    """(PCField, IndexMap) of the shared label image."""
    return compute_fields(label_image, small_config)


@pytest.fixture(scope="session")
def label_keypoints(label_fields, small_config):
    pc, _ = label_fields
    return detect_keypoints(pc, small_config.fast_threshold,
                            small_config.max_keypoints, small_config.patch_size)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
