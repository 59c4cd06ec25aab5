"""Maximum index map construction and its rotation-invariance algebra.

A rotation of the input image shifts every pixel's winning orientation
channel cyclically, so local index histograms shift bins the same way.
Two normalizations cancel that shift: `cyclic_shift` re-bases the whole
channel ring on a chosen initial layer (the enumeration baseline), and
`recode` renumbers values so a patch's dominant index becomes 1 (the
one-shot variant).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class IndexMap:
    """Per-pixel winning channel index in 1..n_orient, with the winning
    amplitude carried alongside for the optional weighted-histogram mode."""

    indices: np.ndarray        # int array, values in [1, n_orient]
    max_amplitude: np.ndarray  # float array, >= 0
    n_orient: int

    def __post_init__(self):
        if self.indices.shape != self.max_amplitude.shape:
            raise ParameterError("indices and max_amplitude shapes differ")

    @property
    def shape(self):
        return self.indices.shape

    def region(self, y0: int, y1: int, x0: int, x1: int) -> "IndexMap":
        return IndexMap(self.indices[y0:y1, x0:x1],
                        self.max_amplitude[y0:y1, x0:x1], self.n_orient)


def build_mim(a_o: np.ndarray) -> IndexMap:
    """Argmax over amplitude-sum channels (first axis), 1-based.

    Ties resolve to the smallest channel index, making the map deterministic.
    """
    channels = np.asarray(a_o)
    if channels.ndim != 3 or channels.shape[0] < 2:
        raise ParameterError(
            f"need >= 2 stacked channels of equal size, got shape {channels.shape}")
    winners = np.argmax(channels, axis=0)
    amplitude = np.take_along_axis(channels, winners[None], axis=0)[0]
    return IndexMap(indices=winners.astype(np.int32) + 1,
                    max_amplitude=amplitude, n_orient=channels.shape[0])


def patch_histogram(patch: IndexMap, weighted: bool = False) -> np.ndarray:
    """Counts of each index value over a patch (or amplitude mass per index
    when `weighted`).  Length n_orient, bin i-1 holds index i."""
    if patch.indices.size == 0:
        raise ParameterError("empty patch")
    weights = patch.max_amplitude.ravel() if weighted else None
    counts = np.bincount(patch.indices.ravel(), weights=weights,
                         minlength=patch.n_orient + 1)[1:]
    return counts if weighted else counts.astype(np.int64)


def dominant_indices(histogram: np.ndarray, ratio: float = 0.8) -> list[int]:
    """Peak bin index, plus the runner-up when it reaches `ratio` of the peak.

    Returns 1 or 2 one-based indices; the ratio test is inclusive.  Peak
    ties resolve to the smaller index.  Runner-up ties resolve to the bin
    cyclically closest *after* the peak, which keeps the selected set
    invariant under re-basing of the ring (a tie broken by absolute index
    would pick different physical bins before and after a cyclic shift).
    """
    hist = np.asarray(histogram, dtype=np.float64)
    if hist.sum() <= 0:
        raise ParameterError("histogram has no mass")
    n = len(hist)
    peak = int(np.argmax(hist))
    rest = hist.copy()
    rest[peak] = -np.inf
    runner_value = rest.max()
    result = [peak + 1]
    if runner_value >= ratio * hist[peak]:
        candidates = np.flatnonzero(rest == runner_value)
        second = int(candidates[np.argmin((candidates - peak) % n)])
        result.append(second + 1)
    return result


_value_map_cache: dict = {}


def _value_table(n: int, pivot: int, kind: str) -> np.ndarray:
    """Value remap table over [0, n]; entry v holds the renumbered value.

    Both normalizations are value permutations of the ring, so each is
    applied as a table lookup; the tables themselves come straight from the
    defining formulas on the n possible values.
    """
    key = (n, pivot, kind)
    table = _value_map_cache.get(key)
    if table is None:
        v = np.arange(n + 1, dtype=np.int32)
        if kind == "recode":
            table = np.where(v >= pivot, v - pivot + 1, v + n - pivot + 1)
        else:
            table = (v - pivot) % n + 1
        table[0] = 0  # index values are 1-based; slot 0 is never read
        _value_map_cache[key] = table
    return table


def recode(patch: IndexMap, dominant: int) -> IndexMap:
    """Renumber index values so `dominant` maps to 1 and the ring order is
    preserved: v >= dominant becomes v - dominant + 1, anything below wraps
    to v + n_orient - dominant + 1.  Amplitudes pass through unchanged."""
    n = patch.n_orient
    if not 1 <= dominant <= n:
        raise ParameterError(f"dominant index {dominant} outside [1, {n}]")
    table = _value_table(n, dominant, "recode")
    return IndexMap(table.take(patch.indices), patch.max_amplitude, n)


def cyclic_shift(patch: IndexMap, initial_layer: int) -> IndexMap:
    """Re-base the channel ring on `initial_layer`: that layer's index
    becomes 1 and the rest follow cyclically.  initial_layer=1 is the
    identity."""
    n = patch.n_orient
    if not 1 <= initial_layer <= n:
        raise ParameterError(f"initial layer {initial_layer} outside [1, {n}]")
    table = _value_table(n, initial_layer, "shift")
    return IndexMap(table.take(patch.indices), patch.max_amplitude, n)


def save_index_map_pgm(mim: IndexMap, path) -> None:
    """Dump an index map as an 8-bit PGM for visual inspection (values
    scaled x42 so six channels span most of the gray range)."""
    data = (mim.indices.astype(np.uint16) * 42).clip(0, 255).astype(np.uint8)
    header = f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())
