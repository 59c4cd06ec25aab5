"""rift2: rotation-invariant multimodal image matching.

Phase-congruency keypoints, maximum-index-map descriptors, and two
rotation-invariance strategies: dominant-index recoding (one or two
descriptors per keypoint) and the classic convolution-ring enumeration
(n_orient descriptors per reference keypoint), kept as baseline and
correctness oracle.
"""

from .config import RiftConfig, apply_overrides, load_config
from .descriptor import (Descriptor, DescriptorSet, describe_plain,
                         describe_rift2, describe_ring, encode, extract_patch,
                         read_descriptors, write_descriptors)
from .detector import Keypoint, detect_fast, detect_keypoints, keypoints_xy
from .errors import (ConfigError, FormatError, IntegrityError, ParameterError,
                     RiftError)
from .estimator import RiftFeatureExtractor, RiftMatcher
from .evalbench import (BenchReport, DatasetSummary, EvalReport, PairSpec,
                        benchmark, dataset_eval, evaluate, load_manifest)
from .imaging import (RigidTransform, check_image, load_image, save_image,
                      warp_rigid)
from .loggabor import (BankParams, ConvolutionStack, FilterBank, PCField,
                       apply_bank, build_filter_bank, orientation_amplitudes,
                       phase_congruency_moments)
from .matcher import MatchSet, match_nn
from .mim import (IndexMap, build_mim, cyclic_shift, dominant_indices,
                  patch_histogram, recode, save_index_map_pgm)
from .pipeline import (FeatureSet, PairMatchResult, compute_fields,
                       extract_features, match_pair)

__version__ = "0.1.0"

__all__ = [
    "BankParams", "BenchReport", "ConfigError", "ConvolutionStack",
    "DatasetSummary", "Descriptor", "DescriptorSet", "EvalReport",
    "FeatureSet", "FilterBank", "FormatError", "IndexMap", "IntegrityError",
    "Keypoint", "MatchSet", "PCField", "PairMatchResult", "PairSpec",
    "ParameterError", "RiftConfig", "RiftError", "RiftFeatureExtractor",
    "RiftMatcher", "RigidTransform", "apply_bank", "apply_overrides",
    "benchmark", "build_filter_bank", "build_mim", "check_image",
    "compute_fields", "cyclic_shift", "dataset_eval", "describe_plain",
    "describe_rift2", "describe_ring", "detect_fast", "detect_keypoints",
    "dominant_indices", "encode", "evaluate", "extract_features",
    "extract_patch", "keypoints_xy", "load_config", "load_image",
    "load_manifest", "match_nn", "match_pair", "orientation_amplitudes",
    "patch_histogram", "phase_congruency_moments", "read_descriptors",
    "recode", "save_image", "save_index_map_pgm", "warp_rigid",
    "write_descriptors",
]
