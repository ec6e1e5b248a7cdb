"""Illumination-robust face recognition from entropy-selected log-DCT features
and kernel entropy component analysis."""

__version__ = "0.1.0"

from .classifier import ClassifierModel, classify, class_means, distance, fit_classifier
from .config import PipelineConfig, parse_config
from .dct import dct2, idct2, quantize_block, scale_quant_matrix, zigzag_order
from .evaluation import (EvaluationReport, SplitPlan, baseline_raw_pixels, evaluate,
                         run_pipeline, split_ep1, split_loo)
from .features import EntropyConfig, FeatureVector, extract_features
from .illumination import IlluminationParams, normalize_illumination
from .image_io import GrayImage, DatasetManifest, downsample, load_manifest, load_pgm
from .keca import KecaModel, fit, project
from .kernels import KernelConfig, arc_cosine_kernel, gram_matrix, rbf_kernel

__all__ = [
    "ClassifierModel", "DatasetManifest", "EntropyConfig", "EvaluationReport",
    "FeatureVector", "GrayImage", "IlluminationParams", "KecaModel", "KernelConfig",
    "PipelineConfig", "SplitPlan", "arc_cosine_kernel", "baseline_raw_pixels",
    "class_means", "classify", "dct2", "distance", "downsample", "evaluate",
    "extract_features", "fit", "fit_classifier", "gram_matrix", "idct2", "load_manifest",
    "load_pgm", "normalize_illumination", "parse_config", "project", "quantize_block",
    "rbf_kernel", "run_pipeline", "scale_quant_matrix", "split_ep1", "split_loo",
    "zigzag_order",
]
