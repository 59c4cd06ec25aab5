import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rift2 import RiftFeatureExtractor, RiftMatcher
from rift2.errors import ConfigError
from rift2.synthetic import voronoi_label_map


@pytest.fixture(scope="module")
def image():
    return voronoi_label_map(256, 40, seed=8)


class TestSklearnProtocol:
    def test_get_params_round_trip(self):
        est = RiftFeatureExtractor(max_keypoints=123, rotate_patch=False)
        params = est.get_params()
        assert params["max_keypoints"] == 123
        assert params["rotate_patch"] is False
        est2 = RiftFeatureExtractor(**params)
        assert est2.get_params() == params

    def test_set_params(self):
        est = RiftMatcher()
        est.set_params(mode="ring", fast_threshold=0.002)
        assert est.mode == "ring"
        assert est.fast_threshold == 0.002

    def test_clone(self):
        est = RiftMatcher(max_keypoints=77)
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    def test_invalid_params_surface_at_fit(self):
        with pytest.raises(ConfigError):
            RiftFeatureExtractor(mode="bogus").fit()


class TestFeatureExtractor:
    def test_transform_single_image(self, image):
        extractor = RiftFeatureExtractor(max_keypoints=200)
        feats = extractor.fit_transform(image)
        assert len(feats) == 1
        assert len(feats[0].keypoints) > 0
        assert len(feats[0].descriptors) >= len(feats[0].keypoints)

    def test_transform_image_list(self, image):
        extractor = RiftFeatureExtractor(max_keypoints=100)
        feats = extractor.fit_transform([image, image])
        assert len(feats) == 2
        assert len(feats[0].keypoints) == len(feats[1].keypoints)

    def test_ring_side_dispatch(self, image):
        extractor = RiftFeatureExtractor(mode="ring", max_keypoints=100).fit()
        ref = extractor.extract(image, side="reference")
        tgt = extractor.extract(image, side="target")
        assert len(ref.descriptors) == 6 * len(ref.keypoints)
        assert len(tgt.descriptors) == len(tgt.keypoints)


class TestMatcher:
    def test_fit_predict_self(self, image):
        matcher = RiftMatcher(max_keypoints=150).fit(image)
        coords = matcher.predict(image)
        assert coords.ndim == 2 and coords.shape[1] == 4
        # self-match: ref and tgt coordinates coincide
        assert np.allclose(coords[:, :2], coords[:, 2:])

    def test_predict_before_fit_raises(self, image):
        with pytest.raises(NotFittedError):
            RiftMatcher().predict(image)

    def test_match_returns_match_set(self, image):
        matcher = RiftMatcher(max_keypoints=150).fit(image)
        matches, tgt = matcher.match(image)
        # one match per target keypoint that produced descriptors
        described = {d.keypoint_id for d in tgt.descriptors}
        assert {t for _, t, _ in matches.pairs} == described
        assert all(d == 0.0 for _, _, d in matches.pairs)

    def test_predict_list(self, image):
        matcher = RiftMatcher(max_keypoints=100).fit(image)
        out = matcher.predict([image, image])
        assert isinstance(out, list) and len(out) == 2
