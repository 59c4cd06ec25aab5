"""Patch extraction and grid-histogram descriptor encoding.

Two description modes share one encoder:

* one-shot mode: a patch is recoded by its dominant index (optionally
  re-sampled on a grid rotated to the quantized dominant angle) and encoded
  once or twice per keypoint;
* ring mode: the enumeration baseline, encoding every cyclic re-basing of
  the patch, n_orient descriptors per keypoint.

Index values are categorical, so patches are sampled nearest-neighbor and
never interpolated.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .detector import Keypoint
from .errors import FormatError, ParameterError
from .mim import IndexMap, cyclic_shift, dominant_indices, patch_histogram, recode

MODE_CODES = {"plain": 0, "ring": 1, "rift2": 2}
_MODE_NAMES = {v: k for k, v in MODE_CODES.items()}

_MAGIC = b"RIF2"
_VERSION = 1
_HEADER = struct.Struct("<4sBBBI")
_RECORD_HEAD = struct.Struct("<IBB")


@dataclass(frozen=True)
class Descriptor:
    vector: np.ndarray   # unit-L2 float64, length grid*grid*n_orient
    keypoint_id: int
    variant: int         # dominant index or ring layer that produced it
    mode: str            # "rift2" | "ring" | "plain"


_offset_cache: dict = {}


def _rotated_offsets(size: int, angle: float):
    """Continuous sample offsets of a size x size grid rotated by `angle`
    about the patch center (which sits half a pixel past the keypoint)."""
    key = (size, round(float(angle), 12))
    cached = _offset_cache.get(key)
    if cached is not None:
        return cached
    half = size / 2.0
    lin = np.arange(size, dtype=np.float64) + 0.5 - half
    u, v = np.meshgrid(lin, lin)  # u: x offset, v: y offset
    c, s = np.cos(angle), np.sin(angle)
    # Snap near-exact values so quarter/half turns hit grid points exactly
    # (sin(pi) is ~1e-16, which would flip rounding at half-integer offsets).
    c = 0.0 if abs(c) < 1e-12 else (np.copysign(1.0, c) if abs(abs(c) - 1) < 1e-12 else c)
    s = 0.0 if abs(s) < 1e-12 else (np.copysign(1.0, s) if abs(abs(s) - 1) < 1e-12 else s)
    ux = c * u - s * v
    vy = s * u + c * v
    _offset_cache[key] = (ux, vy)
    return ux, vy


_gather_cache: dict = {}


def _gather_table(size: int, angle: float, width: int):
    """Integer-keypoint fast path: flattened source offsets of the rotated
    grid relative to the keypoint pixel, plus the offset bounding box."""
    key = (size, round(float(angle), 12), width)
    cached = _gather_cache.get(key)
    if cached is None:
        ux, vy = _rotated_offsets(size, angle)
        iu = np.floor(ux + 0.5).astype(np.int64)
        iv = np.floor(vy + 0.5).astype(np.int64)
        cached = (iv * width + iu,
                  int(iu.min()), int(iu.max()), int(iv.min()), int(iv.max()))
        _gather_cache[key] = cached
    return cached


def extract_patch(mim: IndexMap, keypoint: Keypoint, size: int,
                  angle: float = 0.0, with_amplitude: bool = True) -> IndexMap | None:
    """Sample a size x size index patch on a grid rotated by `angle` about
    the keypoint.  Returns None (skip signal) when any sample would fall
    outside the map.

    At angle 0 the result is bit-equal to the direct axis-aligned crop; at
    pi it is the 180-degree rotation of that crop, with no resampling error.
    With `with_amplitude` off the amplitude plane is filled with zeros,
    which is enough for unweighted histogramming and avoids a second gather.
    """
    h, w = mim.shape
    if angle == 0.0:
        x0 = int(np.floor(keypoint.x + 1.0 - size / 2.0))
        y0 = int(np.floor(keypoint.y + 1.0 - size / 2.0))
        if x0 < 0 or y0 < 0 or x0 + size > w or y0 + size > h:
            return None
        return mim.region(y0, y0 + size, x0, x0 + size)

    x, y = keypoint.x, keypoint.y
    if x == int(x) and y == int(y):
        flat, ux_lo, ux_hi, vy_lo, vy_hi = _gather_table(size, angle, w)
        xi, yi = int(x), int(y)
        if xi + ux_lo < 0 or xi + ux_hi >= w or yi + vy_lo < 0 or yi + vy_hi >= h:
            return None
        base = yi * w + xi
        indices = mim.indices.ravel().take(flat + base).reshape(size, size)
        if with_amplitude:
            amplitude = mim.max_amplitude.ravel().take(flat + base).reshape(size, size)
        else:
            amplitude = np.broadcast_to(0.0, (size, size))
        return IndexMap(indices, amplitude, mim.n_orient)

    ux, vy = _rotated_offsets(size, angle)
    sx = np.floor(x + ux + 0.5).astype(np.int64)
    sy = np.floor(y + vy + 0.5).astype(np.int64)
    if sx.min() < 0 or sy.min() < 0 or sx.max() >= w or sy.max() >= h:
        return None
    amplitude = (mim.max_amplitude[sy, sx] if with_amplitude
                 else np.broadcast_to(0.0, (size, size)))
    return IndexMap(mim.indices[sy, sx], amplitude, mim.n_orient)


_cell_cache: dict = {}


def _cell_bin_base(size: int, grid: int, n_orient: int) -> np.ndarray:
    """Per-pixel flat bin offset: cell_index * n_orient - 1, so that adding
    the 1-based index value lands on the right histogram slot."""
    key = (size, grid, n_orient)
    cached = _cell_cache.get(key)
    if cached is None:
        cs = size // grid
        rows = np.arange(size) // cs
        cells = rows[:, None] * grid + rows[None, :]
        cached = cells * n_orient - 1
        _cell_cache[key] = cached
    return cached


def encode(patch: IndexMap, grid: int = 6, weighted: bool = False) -> np.ndarray | None:
    """Concatenated per-cell index histograms, L2-normalized.

    The patch is split into grid x grid cells (row-major); each cell
    contributes n_orient bins in index order.  Returns None for the
    degenerate all-zero vector (possible only in weighted mode).
    """
    h, w = patch.shape
    if h != w or h % grid != 0:
        raise ParameterError(
            f"patch {h}x{w} does not divide into {grid}x{grid} cells")
    n = patch.n_orient
    bins = _cell_bin_base(h, grid, n) + patch.indices
    weights = patch.max_amplitude.ravel() if weighted else None
    vector = np.bincount(bins.ravel(), weights=weights,
                         minlength=grid * grid * n).astype(np.float64)
    norm = np.linalg.norm(vector)
    if norm == 0:
        return None
    return vector / norm


@dataclass
class DescriptorSet:
    descriptors: list[Descriptor]
    skipped: int

    def __len__(self):
        return len(self.descriptors)

    def __iter__(self):
        return iter(self.descriptors)


def describe_rift2(mim: IndexMap, keypoints: list[Keypoint], patch_size: int = 96,
                   grid: int = 6, dominant_ratio: float = 0.8,
                   rotate_patch: bool = True, weighted: bool = False) -> DescriptorSet:
    """One or two descriptors per keypoint, selected by dominant index.

    Per keypoint: histogram the axis-aligned patch, pick the dominant
    index (and the runner-up when it clears `dominant_ratio`); for each
    pick, recode the patch so that index becomes 1 and encode.  With
    `rotate_patch` the recoded patch is re-sampled on a grid rotated by the
    quantized dominant angle, which aligns the spatial cells of rotated
    views; without it the output matches the ring layer of the same index.
    """
    descriptors: list[Descriptor] = []
    skipped = 0
    step = np.pi / mim.n_orient
    for kp_id, kp in enumerate(keypoints):
        base = extract_patch(mim, kp, patch_size, 0.0)
        if base is None:
            skipped += 1
            continue
        hist = patch_histogram(base, weighted=weighted)
        if hist.sum() <= 0:
            skipped += 1
            continue
        for dom in dominant_indices(hist, dominant_ratio):
            patch = base
            if rotate_patch and dom != 1:
                patch = extract_patch(mim, kp, patch_size, (dom - 1) * step,
                                      with_amplitude=weighted)
                if patch is None:
                    skipped += 1
                    continue
            vector = encode(recode(patch, dom), grid, weighted)
            if vector is None:
                skipped += 1
                continue
            descriptors.append(Descriptor(vector, kp_id, dom, "rift2"))
    return DescriptorSet(descriptors, skipped)


def describe_ring(mim: IndexMap, keypoints: list[Keypoint], patch_size: int = 96,
                  grid: int = 6, weighted: bool = False) -> DescriptorSet:
    """The enumeration baseline: all n_orient cyclic re-basings of each
    keypoint's axis-aligned patch, n_orient descriptors per keypoint."""
    descriptors: list[Descriptor] = []
    skipped = 0
    for kp_id, kp in enumerate(keypoints):
        base = extract_patch(mim, kp, patch_size, 0.0)
        if base is None:
            skipped += 1
            continue
        for layer in range(1, mim.n_orient + 1):
            vector = encode(cyclic_shift(base, layer), grid, weighted)
            if vector is None:
                skipped += 1
                continue
            descriptors.append(Descriptor(vector, kp_id, layer, "ring"))
    return DescriptorSet(descriptors, skipped)


def describe_plain(mim: IndexMap, keypoints: list[Keypoint], patch_size: int = 96,
                   grid: int = 6, weighted: bool = False) -> DescriptorSet:
    """Single unshifted descriptor per keypoint (ring layer 1)."""
    descriptors: list[Descriptor] = []
    skipped = 0
    for kp_id, kp in enumerate(keypoints):
        base = extract_patch(mim, kp, patch_size, 0.0)
        if base is None:
            skipped += 1
            continue
        vector = encode(base, grid, weighted)
        if vector is None:
            skipped += 1
            continue
        descriptors.append(Descriptor(vector, kp_id, 1, "plain"))
    return DescriptorSet(descriptors, skipped)


def write_descriptors(path, descriptors: list[Descriptor], n_orient: int = 6,
                      grid: int = 6) -> None:
    """Binary container: header (magic, version, n_orient, grid, count)
    followed by fixed-size records of float32 vectors."""
    dim = grid * grid * n_orient
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, n_orient, grid, len(descriptors)))
        for d in descriptors:
            if d.vector.shape != (dim,):
                raise ParameterError(
                    f"descriptor length {d.vector.shape} does not match {dim}")
            fh.write(_RECORD_HEAD.pack(d.keypoint_id, d.variant, MODE_CODES[d.mode]))
            fh.write(d.vector.astype("<f4").tobytes())


def read_descriptors(path) -> list[Descriptor]:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError("descriptor file too short for header")
        magic, version, n_orient, grid, count = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        if version != _VERSION:
            raise FormatError(f"unsupported version {version}")
        dim = grid * grid * n_orient
        out = []
        for _ in range(count):
            rec = fh.read(_RECORD_HEAD.size)
            blob = fh.read(4 * dim)
            if len(rec) < _RECORD_HEAD.size or len(blob) < 4 * dim:
                raise FormatError("descriptor file truncated")
            kp_id, variant, mode_code = _RECORD_HEAD.unpack(rec)
            if mode_code not in _MODE_NAMES:
                raise FormatError(f"unknown mode code {mode_code}")
            vector = np.frombuffer(blob, dtype="<f4").astype(np.float64)
            out.append(Descriptor(vector, kp_id, variant, _MODE_NAMES[mode_code]))
        return out
