"""Match visualization: the two images side by side, reference keypoints as
red circles, target keypoints as green crosshairs, matches as yellow lines."""

from __future__ import annotations

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw

from .imaging import to_uint8

RED = (220, 40, 40)
GREEN = (40, 200, 70)
YELLOW = (250, 220, 40)
_RADIUS = 3


def _to_rgb(img: np.ndarray) -> np.ndarray:
    gray = to_uint8(img)
    return np.repeat(gray[:, :, None], 3, axis=2)


def draw_matches(ref_image, tgt_image, ref_keypoints, tgt_keypoints,
                 matches, max_lines: int | None = None) -> PILImage.Image:
    ref_rgb = _to_rgb(np.asarray(ref_image, dtype=np.float64))
    tgt_rgb = _to_rgb(np.asarray(tgt_image, dtype=np.float64))
    h = max(ref_rgb.shape[0], tgt_rgb.shape[0])
    w = ref_rgb.shape[1] + tgt_rgb.shape[1]
    canvas = np.zeros((h, w, 3), dtype=np.uint8)
    canvas[:ref_rgb.shape[0], :ref_rgb.shape[1]] = ref_rgb
    canvas[:tgt_rgb.shape[0], ref_rgb.shape[1]:] = tgt_rgb
    offset = ref_rgb.shape[1]

    image = PILImage.fromarray(canvas)
    draw = ImageDraw.Draw(image)
    for k in ref_keypoints:
        draw.ellipse([k.x - _RADIUS, k.y - _RADIUS, k.x + _RADIUS, k.y + _RADIUS],
                     outline=RED)
    for k in tgt_keypoints:
        x = k.x + offset
        draw.line([x - _RADIUS, k.y, x + _RADIUS, k.y], fill=GREEN)
        draw.line([x, k.y - _RADIUS, x, k.y + _RADIUS], fill=GREEN)

    pairs = matches.pairs if max_lines is None else matches.pairs[:max_lines]
    for ref_id, tgt_id, _ in pairs:
        a = ref_keypoints[ref_id]
        b = tgt_keypoints[tgt_id]
        draw.line([a.x, a.y, b.x + offset, b.y], fill=YELLOW)
    return image


def save_match_visualization(path, ref_image, tgt_image, ref_keypoints,
                             tgt_keypoints, matches, max_lines=None) -> None:
    draw_matches(ref_image, tgt_image, ref_keypoints, tgt_keypoints,
                 matches, max_lines).save(path)
