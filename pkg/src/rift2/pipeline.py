"""End-to-end plumbing: image -> keypoints + descriptors -> matches.

In ring mode only the reference side is multiplied (n_orient descriptors
per keypoint); the target side always carries one plain descriptor per
keypoint.  In the one-shot (rift2) mode both sides carry one or two.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import RiftConfig
from .descriptor import (Descriptor, describe_plain, describe_rift2,
                         describe_ring)
from .detector import Keypoint, detect_keypoints
from .errors import ParameterError
from .imaging import check_image
from .loggabor import PCField, apply_bank, build_filter_bank, \
    orientation_amplitudes, phase_congruency_moments
from .mim import IndexMap, build_mim


@dataclass
class FeatureSet:
    keypoints: list[Keypoint]
    descriptors: list[Descriptor]
    skipped: int = 0
    timings: dict = field(default_factory=dict)


@dataclass
class PairMatchResult:
    matches: "MatchSet"
    ref: FeatureSet
    tgt: FeatureSet
    timings: dict = field(default_factory=dict)


def compute_fields(image, cfg: RiftConfig | None = None) -> tuple[PCField, IndexMap]:
    """Phase-congruency moments and the maximum index map of one image."""
    cfg = cfg or RiftConfig()
    arr = check_image(image, min_size=16)
    bank = build_filter_bank(arr.shape[1], arr.shape[0], cfg.bank_params())
    stack = apply_bank(arr, bank, threads=cfg.threads)
    pc = phase_congruency_moments(stack, cfg.bank_params())
    mim = build_mim(orientation_amplitudes(stack))
    return pc, mim


def describe(mim: IndexMap, keypoints: list[Keypoint], cfg: RiftConfig,
             side: str = "reference"):
    """Descriptor generation for one image, dispatched on cfg.mode."""
    if cfg.mode == "rift2":
        return describe_rift2(mim, keypoints, cfg.patch_size, cfg.grid,
                              cfg.dominant_ratio, cfg.rotate_patch,
                              cfg.weight_by_amplitude)
    if cfg.mode == "ring" and side == "reference":
        return describe_ring(mim, keypoints, cfg.patch_size, cfg.grid,
                             cfg.weight_by_amplitude)
    return describe_plain(mim, keypoints, cfg.patch_size, cfg.grid,
                          cfg.weight_by_amplitude)


def extract_features(image, cfg: RiftConfig | None = None,
                     side: str = "reference") -> FeatureSet:
    cfg = cfg or RiftConfig()
    t0 = time.perf_counter()
    pc, mim = compute_fields(image, cfg)
    keypoints = detect_keypoints(pc, cfg.fast_threshold, cfg.max_keypoints,
                                 cfg.patch_size)
    t1 = time.perf_counter()
    result = describe(mim, keypoints, cfg, side)
    t2 = time.perf_counter()
    return FeatureSet(keypoints=keypoints, descriptors=result.descriptors,
                      skipped=result.skipped,
                      timings={"detect": t1 - t0, "describe": t2 - t1})


def match_pair(ref_image, tgt_image, cfg: RiftConfig | None = None) -> PairMatchResult:
    """Full pipeline on an image pair."""
    from .matcher import match_nn

    cfg = cfg or RiftConfig()
    ref = extract_features(ref_image, cfg, side="reference")
    tgt = extract_features(tgt_image, cfg, side="target")
    if not ref.descriptors or not tgt.descriptors:
        raise ParameterError("no descriptors extracted on one side of the pair")
    t0 = time.perf_counter()
    matches = match_nn(ref.descriptors, tgt.descriptors, mode=cfg.mode)
    t_match = time.perf_counter() - t0
    timings = {
        "detect": ref.timings["detect"] + tgt.timings["detect"],
        "describe": ref.timings["describe"] + tgt.timings["describe"],
        "match": t_match,
    }
    return PairMatchResult(matches=matches, ref=ref, tgt=tgt, timings=timings)
