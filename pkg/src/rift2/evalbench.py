"""Ground-truth evaluation and the ring-vs-one-shot cost benchmark.

A match is correct when the ground-truth transform carries its reference
keypoint to within the residual threshold of the matched target keypoint
(strictly less than; default 3 px).  A pair succeeds when at least
`success_min_matches` matches are correct.  RMSE is computed over correct
matches only, clamped to `rmse_cap`; with zero correct matches it is the
infinity sentinel, rendered as "∞" in reports.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RiftConfig
from .detector import keypoints_xy
from .errors import FormatError, IntegrityError
from .imaging import RigidTransform, load_image
from .matcher import MatchSet, match_nn
from .pipeline import describe, match_pair
from . import pipeline

logger = logging.getLogger("rift2")


def _rmse_json(value: float):
    return "∞" if math.isinf(value) else value


@dataclass
class EvalReport:
    n_correct: int
    rmse: float  # pixels; math.inf when no correct match
    success: bool
    n_matches_total: int
    residual_threshold: float
    timings: dict = field(default_factory=dict)
    descriptor_counts: dict = field(default_factory=dict)

    def to_json_dict(self, with_timings: bool = True) -> dict:
        d = {
            "n_correct": self.n_correct,
            "rmse": _rmse_json(self.rmse),
            "success": self.success,
            "n_matches_total": self.n_matches_total,
            "residual_threshold": self.residual_threshold,
            "descriptor_counts": self.descriptor_counts,
        }
        if with_timings:
            d["timings"] = self.timings
        return d


def evaluate(matches: MatchSet, ref_keypoints, tgt_keypoints, gt: RigidTransform,
             residual_threshold: float = 3.0, success_min_matches: int = 10,
             rmse_cap: float = 20.0, timings: dict | None = None,
             descriptor_counts: dict | None = None) -> EvalReport:
    """Score a match set against a ground-truth transform (ref -> tgt)."""
    ref_xy = keypoints_xy(ref_keypoints)
    tgt_xy = keypoints_xy(tgt_keypoints)
    for r, t, _ in matches.pairs:
        if not (0 <= r < len(ref_xy)) or not (0 <= t < len(tgt_xy)):
            raise IntegrityError(f"match ({r}, {t}) does not resolve to keypoints")

    if matches.pairs:
        ridx = np.array([p[0] for p in matches.pairs])
        tidx = np.array([p[1] for p in matches.pairs])
        residuals = np.linalg.norm(gt.apply(ref_xy[ridx]) - tgt_xy[tidx], axis=1)
        correct = residuals < residual_threshold
        n_correct = int(correct.sum())
    else:
        n_correct = 0

    if n_correct > 0:
        rmse = float(np.sqrt(np.mean(residuals[correct] ** 2)))
        rmse = min(rmse, rmse_cap)
    else:
        rmse = math.inf
    return EvalReport(
        n_correct=n_correct,
        rmse=rmse,
        success=n_correct >= success_min_matches,
        n_matches_total=len(matches.pairs),
        residual_threshold=residual_threshold,
        timings=dict(timings or {}),
        descriptor_counts=dict(descriptor_counts or {}),
    )


@dataclass(frozen=True)
class PairSpec:
    """One dataset entry: two image paths plus the ground-truth transform.

    `direction` declares which way the transform maps ("ref_to_tgt" or
    "tgt_to_ref"); the latter is inverted on load so evaluation never
    guesses.
    """

    ref: Path
    tgt: Path
    gt: RigidTransform
    name: str = ""


def load_manifest(path) -> list[PairSpec]:
    path = Path(path)
    try:
        entries = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse manifest {path}: {exc}") from exc
    if not isinstance(entries, list) or not entries:
        raise FormatError(f"manifest {path} must be a nonempty JSON list")
    pairs = []
    for i, entry in enumerate(entries):
        try:
            gt = RigidTransform.from_json_dict(entry["gt"])
            direction = entry["direction"]
            if direction == "tgt_to_ref":
                gt = gt.inverse()
            elif direction != "ref_to_tgt":
                raise FormatError(
                    f"manifest entry {i}: unknown direction {direction!r}")
            pairs.append(PairSpec(
                ref=path.parent / entry["ref"],
                tgt=path.parent / entry["tgt"],
                gt=gt,
                name=entry.get("name", f"pair{i:03d}"),
            ))
        except KeyError as exc:
            raise FormatError(f"manifest entry {i}: missing key {exc}") from exc
    return pairs


@dataclass
class DatasetSummary:
    gamma: float            # % of pairs with success
    mean_n: float           # mean correct matches over all pairs
    mean_n_success: float   # mean correct matches over successful pairs
    mean_rmse: float        # failed pairs contribute rmse_cap
    mean_time: float        # seconds per pair, full pipeline
    n_pairs: int
    mode: str
    reports: list[dict] = field(default_factory=list)

    def to_json_dict(self, with_timings: bool = True) -> dict:
        d = {
            "gamma": self.gamma,
            "mean_n": self.mean_n,
            "mean_n_success": self.mean_n_success,
            "mean_rmse": self.mean_rmse,
            "n_pairs": self.n_pairs,
            "mode": self.mode,
            "reports": self.reports,
        }
        if with_timings:
            d["mean_time"] = self.mean_time
        return d


def _run_pair(spec: PairSpec, cfg: RiftConfig) -> EvalReport:
    ref_img = load_image(spec.ref)
    tgt_img = load_image(spec.tgt)
    result = match_pair(ref_img, tgt_img, cfg)
    return evaluate(
        result.matches, result.ref.keypoints, result.tgt.keypoints, spec.gt,
        cfg.residual_threshold, cfg.success_min_matches, cfg.rmse_cap,
        timings=result.timings,
        descriptor_counts={"ref": len(result.ref.descriptors),
                           "tgt": len(result.tgt.descriptors)},
    )


def dataset_eval(pairs: list[PairSpec], cfg: RiftConfig | None = None) -> DatasetSummary:
    """Run the full pipeline over a dataset and aggregate the metrics.

    A pair that fails to run (missing file, decode error, no features) is
    marked failed and contributes rmse_cap to the mean RMSE; the run
    continues.
    """
    cfg = cfg or RiftConfig()
    if not pairs:
        raise FormatError("dataset must contain at least one pair")
    reports = []
    n_values, rmse_values, times, successes = [], [], [], []
    for spec in pairs:
        t0 = time.perf_counter()
        try:
            report = _run_pair(spec, cfg)
        except Exception as exc:  # noqa: BLE001 - pair failure must not stop the run
            logger.warning("pair %s failed: %s", spec.name, exc)
            report = EvalReport(n_correct=0, rmse=math.inf, success=False,
                                n_matches_total=0,
                                residual_threshold=cfg.residual_threshold)
        elapsed = time.perf_counter() - t0
        entry = report.to_json_dict()
        entry["pair"] = spec.name
        entry["time"] = elapsed
        reports.append(entry)
        n_values.append(report.n_correct)
        rmse_values.append(cfg.rmse_cap if math.isinf(report.rmse) else report.rmse)
        times.append(elapsed)
        successes.append(report.success)

    n_success = sum(successes)
    succ_n = [n for n, s in zip(n_values, successes) if s]
    return DatasetSummary(
        gamma=100.0 * n_success / len(pairs),
        mean_n=float(np.mean(n_values)),
        mean_n_success=float(np.mean(succ_n)) if succ_n else 0.0,
        mean_rmse=float(np.mean(rmse_values)),
        mean_time=float(np.mean(times)),
        n_pairs=len(pairs),
        mode=cfg.mode,
        reports=reports,
    )


def summary_csv_text(summary: DatasetSummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["pair", "mode", "n", "rmse", "success",
                     "t_detect", "t_describe", "t_match"])
    for r in summary.reports:
        timings = r.get("timings", {})
        writer.writerow([
            r["pair"], summary.mode, r["n_correct"],
            "inf" if r["rmse"] == "∞" else r["rmse"], r["success"],
            timings.get("detect", ""), timings.get("describe", ""),
            timings.get("match", ""),
        ])
    return buf.getvalue()


@dataclass
class BenchReport:
    """Description+matching cost of the ring baseline vs the one-shot mode
    on identical keypoints (detection runs once and is excluded)."""

    time_ring: float
    time_rift2: float
    speedup: float
    descs_ring: int
    descs_rift2: int
    descs_plain: int
    distance_evals_ring: int
    distance_evals_rift2: int
    distance_evals_plain: int
    ref_keypoints: int
    tgt_keypoints: int
    time_detect: float
    memory_reduction: float  # descs_ring / descs_rift2, reference side

    def to_json_dict(self, with_timings: bool = True) -> dict:
        d = {
            "speedup": self.speedup,
            "descs_ring": self.descs_ring,
            "descs_rift2": self.descs_rift2,
            "descs_plain": self.descs_plain,
            "distance_evals_ring": self.distance_evals_ring,
            "distance_evals_rift2": self.distance_evals_rift2,
            "distance_evals_plain": self.distance_evals_plain,
            "ref_keypoints": self.ref_keypoints,
            "tgt_keypoints": self.tgt_keypoints,
            "memory_reduction": self.memory_reduction,
        }
        if with_timings:
            d["time_ring"] = self.time_ring
            d["time_rift2"] = self.time_rift2
            d["time_detect"] = self.time_detect
        return d


def benchmark(ref_image, tgt_image, cfg: RiftConfig | None = None) -> BenchReport:
    """Measure description+matching wall time per mode on shared keypoints.

    Modes run sequentially on the same detected keypoints; the reported
    speedup is time_ring / time_rift2.
    """
    cfg = cfg or RiftConfig()
    t0 = time.perf_counter()
    pc_ref, mim_ref = pipeline.compute_fields(ref_image, cfg)
    pc_tgt, mim_tgt = pipeline.compute_fields(tgt_image, cfg)
    from .detector import detect_keypoints
    ref_kps = detect_keypoints(pc_ref, cfg.fast_threshold, cfg.max_keypoints,
                               cfg.patch_size)
    tgt_kps = detect_keypoints(pc_tgt, cfg.fast_threshold, cfg.max_keypoints,
                               cfg.patch_size)
    time_detect = time.perf_counter() - t0

    def run(mode: str):
        mode_cfg = cfg.replace(mode=mode)
        t = time.perf_counter()
        ref_set = describe(mim_ref, ref_kps, mode_cfg, side="reference")
        tgt_set = describe(mim_tgt, tgt_kps, mode_cfg, side="target")
        matches = match_nn(ref_set.descriptors, tgt_set.descriptors, mode=mode)
        return time.perf_counter() - t, len(ref_set), matches.distance_evals

    time_ring, descs_ring, evals_ring = run("ring")
    time_rift2, descs_rift2, evals_rift2 = run("rift2")
    _, descs_plain, evals_plain = run("plain")

    return BenchReport(
        time_ring=time_ring,
        time_rift2=time_rift2,
        speedup=time_ring / time_rift2 if time_rift2 > 0 else math.inf,
        descs_ring=descs_ring,
        descs_rift2=descs_rift2,
        descs_plain=descs_plain,
        distance_evals_ring=evals_ring,
        distance_evals_rift2=evals_rift2,
        distance_evals_plain=evals_plain,
        ref_keypoints=len(ref_kps),
        tgt_keypoints=len(tgt_kps),
        time_detect=time_detect,
        memory_reduction=descs_ring / descs_rift2 if descs_rift2 else math.inf,
    )
