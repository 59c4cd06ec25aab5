"""Keypoint extraction: FAST corners on the minimum-moment map plus edge
features from the maximum-moment map, merged and capped.

The FAST response of a pixel is the largest threshold at which its segment
test still passes, computed once per map; thresholding and 3x3 non-maximum
suppression then act on that fixed score, which makes the detected
locations exactly monotone in the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter
from scipy.spatial import cKDTree

from .errors import ParameterError
from .loggabor import PCField

# Bresenham circle of radius 3 in circular order, as (dx, dy).
_CIRCLE = np.array([
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
])
ARC_LENGTH = 9  # contiguous circle pixels required by the segment test


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    response: float
    kind: str  # "corner" | "edge"

    def to_json_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "response": self.response, "kind": self.kind}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Keypoint":
        return cls(x=float(d["x"]), y=float(d["y"]),
                   response=float(d["response"]), kind=str(d["kind"]))


def keypoints_xy(keypoints) -> np.ndarray:
    """(n, 2) array of keypoint (x, y) coordinates."""
    return np.array([(k.x, k.y) for k in keypoints], dtype=np.float64).reshape(-1, 2)


def _fast_score(img: np.ndarray) -> np.ndarray:
    """Max threshold at which each pixel passes the FAST segment test.

    Positive where some contiguous arc of ARC_LENGTH circle pixels is
    uniformly brighter or uniformly darker than the center; 0 elsewhere
    (including a 3-pixel frame where the circle does not fit).
    """
    h, w = img.shape
    score = np.zeros((h, w))
    if h <= 6 or w <= 6:
        return score
    center = img[3:h - 3, 3:w - 3]
    diffs = np.empty((16,) + center.shape)
    for k, (dx, dy) in enumerate(_CIRCLE):
        diffs[k] = img[3 + dy:h - 3 + dy, 3 + dx:w - 3 + dx] - center

    def arc_strength(d):
        best = np.full(center.shape, -np.inf)
        for start in range(16):
            arc_min = d[start]
            for j in range(1, ARC_LENGTH):
                arc_min = np.minimum(arc_min, d[(start + j) % 16])
            best = np.maximum(best, arc_min)
        return best

    strength = np.maximum(arc_strength(diffs), arc_strength(-diffs))
    score[3:h - 3, 3:w - 3] = np.maximum(strength, 0.0)
    return score


def _normalize(score_map: np.ndarray) -> np.ndarray:
    lo, hi = score_map.min(), score_map.max()
    if hi - lo <= 0:
        return np.zeros_like(score_map)
    return (score_map - lo) / (hi - lo)


def detect_fast(score_map, threshold: float, max_points: int,
                border_margin: int = 0, kind: str = "corner") -> list[Keypoint]:
    """FAST corners of a score image, min-max normalized before the test.

    Keypoints are 3x3 non-maximum suppressed, filtered to lie at least
    `border_margin` pixels from every border, sorted by response descending
    (ties broken by (y, x)), and capped at `max_points`.
    """
    arr = np.asarray(score_map, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ParameterError("score map contains non-finite values")
    if threshold <= 0:
        raise ParameterError("FAST threshold must be positive")

    score = _fast_score(_normalize(arr))
    keep = (score > threshold) & (score == maximum_filter(score, size=3))
    ys, xs = np.nonzero(keep)
    if border_margin > 0:
        h, w = arr.shape
        inside = ((xs >= border_margin) & (xs <= w - 1 - border_margin) &
                  (ys >= border_margin) & (ys <= h - 1 - border_margin))
        ys, xs = ys[inside], xs[inside]
    responses = score[ys, xs]
    order = np.lexsort((xs, ys, -responses))[:max_points]
    return [Keypoint(x=float(xs[i]), y=float(ys[i]),
                     response=float(responses[i]), kind=kind)
            for i in order]


def _merge_within_radius(keypoints: list[Keypoint], radius: float) -> list[Keypoint]:
    """Greedy suppression: walk points by response, drop any point within
    `radius` of an already-accepted one."""
    if len(keypoints) < 2:
        return list(keypoints)
    coords = keypoints_xy(keypoints)
    pairs = cKDTree(coords).query_pairs(r=radius, output_type="ndarray")
    neighbors: dict[int, list[int]] = {}
    for a, b in pairs:
        neighbors.setdefault(int(a), []).append(int(b))
        neighbors.setdefault(int(b), []).append(int(a))
    order = sorted(range(len(keypoints)),
                   key=lambda i: (-keypoints[i].response, keypoints[i].y, keypoints[i].x))
    suppressed = np.zeros(len(keypoints), dtype=bool)
    accepted = []
    for i in order:
        if suppressed[i]:
            continue
        accepted.append(keypoints[i])
        for j in neighbors.get(i, ()):
            suppressed[j] = True
    return accepted


def detect_keypoints(pc: PCField, threshold: float = 0.001, max_points: int = 5000,
                     patch_size: int = 96) -> list[Keypoint]:
    """Corners from the minimum-moment map united with edge features from the
    maximum-moment map.  Duplicates within 2 px collapse to the stronger
    response; the combined list is capped at `max_points`.
    """
    h, w = pc.shape
    if h < patch_size or w < patch_size:
        raise ParameterError(
            f"image {h}x{w} smaller than the {patch_size}-pixel descriptor patch")
    margin = patch_size // 2
    corners = detect_fast(pc.moment_min, threshold, max_points, margin, kind="corner")
    edges = detect_fast(pc.moment_max, threshold, max_points, margin, kind="edge")
    merged = _merge_within_radius(corners + edges, radius=2.0)
    merged.sort(key=lambda k: (-k.response, k.y, k.x))
    return merged[:max_points]


def keypoints_to_json(keypoints) -> list[dict]:
    return [k.to_json_dict() for k in keypoints]


def keypoints_from_json(items) -> list[Keypoint]:
    return [Keypoint.from_json_dict(d) for d in items]
