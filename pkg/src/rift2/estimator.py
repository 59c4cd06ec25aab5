"""Scikit-learn style front end.

`RiftFeatureExtractor` is a stateless transformer: images in, feature sets
(keypoints + descriptors) out.  `RiftMatcher` is fit/predict shaped: fit
indexes the reference image, predict matches target images against it.
Both expose every pipeline tunable through ``get_params``/``set_params``
so they compose with pipelines and parameter search in the wider
ecosystem.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .config import RiftConfig
from .detector import keypoints_xy
from .imaging import check_image
from .matcher import MatchSet, match_nn
from .pipeline import FeatureSet, extract_features


def _is_image(X) -> bool:
    return isinstance(X, np.ndarray) and X.ndim == 2


def _as_image_list(X) -> list[np.ndarray]:
    if _is_image(X):
        return [check_image(X, min_size=16)]
    return [check_image(img, min_size=16) for img in X]


class _ConfiguredEstimator(BaseEstimator):
    """Shared parameter surface mirroring RiftConfig field for field."""

    def __init__(self, mode="rift2", n_scales=4, n_orient=6, min_wavelength=3.0,
                 scale_mult=2.1, sigma_on_f=0.55, orientation_spread=None,
                 noise_k=2.0, spread_cutoff=0.5, spread_gain=10.0,
                 fast_threshold=0.001, max_keypoints=5000, patch_size=96,
                 grid=6, dominant_ratio=0.8, rotate_patch=True,
                 weight_by_amplitude=False, threads=0):
        self.mode = mode
        self.n_scales = n_scales
        self.n_orient = n_orient
        self.min_wavelength = min_wavelength
        self.scale_mult = scale_mult
        self.sigma_on_f = sigma_on_f
        self.orientation_spread = orientation_spread
        self.noise_k = noise_k
        self.spread_cutoff = spread_cutoff
        self.spread_gain = spread_gain
        self.fast_threshold = fast_threshold
        self.max_keypoints = max_keypoints
        self.patch_size = patch_size
        self.grid = grid
        self.dominant_ratio = dominant_ratio
        self.rotate_patch = rotate_patch
        self.weight_by_amplitude = weight_by_amplitude
        self.threads = threads

    def _config(self) -> RiftConfig:
        return RiftConfig(**{k: v for k, v in self.get_params().items()})


class RiftFeatureExtractor(_ConfiguredEstimator, TransformerMixin):
    """Transform images into keypoints and descriptors.

    Examples
    --------
    >>> extractor = RiftFeatureExtractor(max_keypoints=500)
    >>> features = extractor.fit_transform([ref_img, tgt_img])
    >>> len(features[0].keypoints), len(features[0].descriptors)
    """

    def fit(self, X=None, y=None):
        self.config_ = self._config()  # validates parameters
        return self

    def transform(self, X, side: str = "reference") -> list[FeatureSet]:
        if not hasattr(self, "config_"):
            self.fit()
        return [extract_features(img, self.config_, side=side)
                for img in _as_image_list(X)]

    def extract(self, image, side: str = "reference") -> FeatureSet:
        """Single-image convenience wrapper around transform."""
        return self.transform(image, side=side)[0]


class RiftMatcher(_ConfiguredEstimator):
    """Match target images against a fitted reference image.

    fit(X) extracts and stores the reference features; predict(X) returns,
    for each target image, an (n_matches, 4) array of matched coordinates
    [ref_x, ref_y, tgt_x, tgt_y] ordered by ascending descriptor distance.
    `match` returns the underlying MatchSet for one target.
    """

    def fit(self, X, y=None):
        cfg = self._config()
        self.config_ = cfg
        self.ref_features_ = extract_features(check_image(X, min_size=16),
                                              cfg, side="reference")
        return self

    def _check_fitted(self):
        if not hasattr(self, "ref_features_"):
            raise NotFittedError("RiftMatcher must be fitted with a reference image")

    def match(self, target_image) -> tuple[MatchSet, FeatureSet]:
        self._check_fitted()
        tgt = extract_features(check_image(target_image, min_size=16),
                               self.config_, side="target")
        matches = match_nn(self.ref_features_.descriptors, tgt.descriptors,
                           mode=self.config_.mode)
        return matches, tgt

    def _coordinates(self, matches: MatchSet, tgt: FeatureSet) -> np.ndarray:
        ref_xy = keypoints_xy(self.ref_features_.keypoints)
        tgt_xy = keypoints_xy(tgt.keypoints)
        if not matches.pairs:
            return np.empty((0, 4))
        ridx = np.array([p[0] for p in matches.pairs])
        tidx = np.array([p[1] for p in matches.pairs])
        return np.hstack([ref_xy[ridx], tgt_xy[tidx]])

    def predict(self, X):
        self._check_fitted()
        if _is_image(X):
            matches, tgt = self.match(X)
            return self._coordinates(matches, tgt)
        return [self.predict(img) for img in _as_image_list(X)]
