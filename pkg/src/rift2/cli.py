"""Command-line front end.

Subcommands: `match` an image pair, `eval` a manifest of pairs against
ground truth, `bench` the ring-vs-one-shot cost ratio.  Exit codes:
0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import MODES, RiftConfig, apply_overrides, load_config
from .errors import ConfigError, FormatError, RiftError
from .evalbench import benchmark, dataset_eval, load_manifest, summary_csv_text
from .imaging import load_image
from .pipeline import match_pair
from .viz import save_match_visualization

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

logger = logging.getLogger("rift2")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key")
    parser.add_argument("--no-timing", action="store_true",
                        help="omit wall-clock timings from outputs (reproducible bytes)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rift2",
        description="Rotation-invariant multimodal image matching.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_match = sub.add_parser("match", help="match an image pair")
    p_match.add_argument("--ref", required=True, help="reference image path")
    p_match.add_argument("--tgt", required=True, help="target image path")
    p_match.add_argument("--mode", choices=MODES, default=None)
    p_match.add_argument("--out", required=True, help="output MatchSet JSON path")
    p_match.add_argument("--viz", help="optional side-by-side visualization PNG")
    _add_common(p_match)

    p_eval = sub.add_parser("eval", help="evaluate a dataset manifest")
    p_eval.add_argument("--manifest", required=True, help="dataset manifest JSON")
    p_eval.add_argument("--mode", choices=MODES, default=None)
    p_eval.add_argument("--report", required=True,
                        help="report path (.json; a .csv sibling is written too)")
    _add_common(p_eval)

    p_bench = sub.add_parser("bench", help="ring vs one-shot cost benchmark")
    p_bench.add_argument("--ref", required=True)
    p_bench.add_argument("--tgt", required=True)
    p_bench.add_argument("--report", required=True, help="benchmark report JSON path")
    _add_common(p_bench)
    return parser


def _load_cfg(args) -> RiftConfig:
    cfg = RiftConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    if args.overrides:
        cfg = apply_overrides(cfg, args.overrides)
    if getattr(args, "mode", None):
        cfg = cfg.replace(mode=args.mode)
    return cfg


def _report_paths(report_arg: str) -> tuple[Path, Path]:
    path = Path(report_arg)
    if path.suffix.lower() == ".json":
        return path, path.with_suffix(".csv")
    return path.with_suffix(path.suffix + ".json"), path.with_suffix(path.suffix + ".csv")


def _cmd_match(args) -> int:
    cfg = _load_cfg(args)
    result = match_pair(load_image(args.ref), load_image(args.tgt), cfg)
    payload = {
        "mode": result.matches.mode,
        "n_matches": len(result.matches),
        "matches": result.matches.to_json_list(),
    }
    if not args.no_timing:
        payload["timings"] = result.timings
    Path(args.out).write_text(json.dumps(payload, indent=2))
    if args.viz:
        save_match_visualization(args.viz, load_image(args.ref), load_image(args.tgt),
                                 result.ref.keypoints, result.tgt.keypoints,
                                 result.matches)
    print(f"matched {len(result.matches)} keypoints "
          f"({len(result.ref.descriptors)} ref / {len(result.tgt.descriptors)} tgt "
          f"descriptors, mode={result.matches.mode})")
    return EXIT_OK


def _cmd_eval(args) -> int:
    cfg = _load_cfg(args)
    try:
        pairs = load_manifest(args.manifest)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    summary = dataset_eval(pairs, cfg)
    json_path, csv_path = _report_paths(args.report)
    summary_dict = summary.to_json_dict(with_timings=not args.no_timing)
    if args.no_timing:
        for r in summary_dict["reports"]:
            r.pop("timings", None)
            r.pop("time", None)
    json_path.write_text(json.dumps(summary_dict, indent=2, ensure_ascii=False))
    csv_path.write_text(summary_csv_text(summary))
    print(f"gamma={summary.gamma:.1f}% mean_n={summary.mean_n:.1f} "
          f"mean_rmse={summary.mean_rmse:.2f} over {summary.n_pairs} pairs")
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _load_cfg(args)
    report = benchmark(load_image(args.ref), load_image(args.tgt), cfg)
    json_path, _ = _report_paths(args.report)
    json_path.write_text(json.dumps(
        report.to_json_dict(with_timings=not args.no_timing), indent=2))
    print(f"speedup={report.speedup:.2f}x descs_ring={report.descs_ring} "
          f"descs_rift2={report.descs_rift2} "
          f"memory_reduction={report.memory_reduction:.2f}x")
    return EXIT_OK


_COMMANDS = {"match": _cmd_match, "eval": _cmd_eval, "bench": _cmd_bench}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RiftError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
