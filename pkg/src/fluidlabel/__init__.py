"""fluidlabel: point-annotation tooling for OCT fluid segmentation.

Grow dense pseudo-labels and per-pixel trust maps from sparse point
annotations via superpixel-guided region growing, detect and repair label
noise with model probabilities, and evaluate with Dice/IoU. Ships a batch
CLI and an interactive annotation HTTP service.
"""

from .config import PipelineConfig, load_config
from .errors import (
    DegenerateJointError,
    FluidLabelError,
    FormatError,
    SeedConflictError,
    ValidationError,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .metrics import SegScores, evaluate
from .pseudolabel import (
    BlockLabels,
    GrowthConfig,
    build_trust_map,
    generate,
    grow,
    seed_block_labels,
    to_pixel_labels,
    trust_value,
)
from .rasters import (
    GrayImage,
    LabelMap,
    PointAnnotationSet,
    ProbMap,
    TrustMap,
    rasterize_points,
)
from .refinement import (
    ErrorMap,
    JointEstimate,
    RefineConfig,
    calibrate_and_joint,
    class_thresholds,
    confusion,
    estimate_error_map,
    refine_labels,
    refine_trust,
)
from .superpixels import (
    AdjacencyGraph,
    BlockHistogram,
    SuperpixelMap,
    block_histogram,
    build_adjacency,
    cosine_similarity,
    slic,
)
from .trainmath import (
    LossWeights,
    consistency_mse,
    dice_loss,
    ema_update,
    perturb,
    ramp_weight,
    total_loss,
    weighted_cross_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "AdjacencyGraph", "BlockHistogram", "BlockLabels", "DegenerateJointError",
    "ErrorMap", "FluidLabelError", "FormatError", "GrayImage", "GrowthConfig",
    "JointEstimate", "KERNEL_BACKEND", "LabelMap", "LossWeights",
    "PipelineConfig", "PointAnnotationSet", "ProbMap", "RefineConfig",
    "SegScores", "SeedConflictError", "SuperpixelMap", "TrustMap",
    "ValidationError", "block_histogram", "build_adjacency", "build_trust_map",
    "calibrate_and_joint", "class_thresholds", "confusion", "consistency_mse",
    "cosine_similarity", "dice_loss", "ema_update", "estimate_error_map",
    "evaluate", "generate", "grow", "load_config", "perturb", "ramp_weight",
    "rasterize_points", "refine_labels", "refine_trust", "seed_block_labels",
    "slic", "to_pixel_labels", "total_loss", "trust_value",
    "weighted_cross_entropy",
]
