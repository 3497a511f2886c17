"""provisim: prosthetic-vision simulation, pre-emptive enhancement, and a
forced-choice trial harness for photovoltaic subretinal implants."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .charts import (
    CampbellRobsonSpec,
    LandoltSpec,
    classify_gap_orientation,
    render_campbell_robson,
    render_landolt,
)
from .imagecore import (
    ColorImage,
    Image,
    load_image,
    quantize_levels,
    save_image,
    to_grayscale,
)
from .landmarks import EnhanceStyle, LandmarkSet, enhance_features, load_landmarks
from .pipeline import PipelineConfig, preset_config, run_batch, simulate
from .spectral import (
    ImplantPreset,
    SpectralFilter,
    lowpass,
    preset_from_pitch,
    snellen_equivalent,
    tukey_weight,
)
from .tone import (
    GammaCurve,
    SigmoidCurve,
    apply_curve,
    apply_inverse,
    residual_contrast,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "CampbellRobsonSpec",
    "LandoltSpec",
    "classify_gap_orientation",
    "render_campbell_robson",
    "render_landolt",
    "ColorImage",
    "Image",
    "load_image",
    "quantize_levels",
    "save_image",
    "to_grayscale",
    "EnhanceStyle",
    "LandmarkSet",
    "enhance_features",
    "load_landmarks",
    "PipelineConfig",
    "preset_config",
    "run_batch",
    "simulate",
    "ImplantPreset",
    "SpectralFilter",
    "lowpass",
    "preset_from_pitch",
    "snellen_equivalent",
    "tukey_weight",
    "GammaCurve",
    "SigmoidCurve",
    "apply_curve",
    "apply_inverse",
    "residual_contrast",
    "__version__",
]
