"""Composable processing flows, JSON configuration, presets and batch running.

A config is an explicit ordered stage list; nothing is inferred, so each
figure-style flow (plain simulation, pre-corrected projection, feature
accentuation) is reproducible from its serialized form. Configs are
seedless: identical input bytes and config produce identical output bytes.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import landmarks as lmod
from . import spectral, tone
from .imagecore import (
    ColorImage,
    Image,
    ImageIOError,
    load_image,
    quantize_levels,
    save_image,
    to_grayscale,
)

STAGE_NAMES = (
    "grayscale",
    "enhance_landmarks",
    "inverse_tone",
    "dmd_quantize",
    "lowpass",
    "tone",
    "quantize_levels",
)

# The projector modulates micromirror ON time in 14 discrete steps.
DMD_LEVELS = 14

PRESET_NAMES = (
    "prima-100",
    "future-50",
    "future-20",
    "paper-trial-phase1",
    "paper-trial-phase2",
    "baseline",
)


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


class MissingLandmarksError(ConfigError):
    """Config contains an enhance_landmarks stage but no landmarks were given."""


@dataclass(frozen=True)
class StageSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineConfig:
    stages: tuple

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        validate_config(self)

    def to_json_dict(self) -> dict:
        return {
            "stages": [
                {"stage": s.name, **_canonical_params(s.name, s.params)}
                for s in self.stages
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PipelineConfig":
        if not isinstance(doc, dict) or not isinstance(doc.get("stages"), list):
            raise ConfigError("config must be an object with a 'stages' list")
        stages = []
        for entry in doc["stages"]:
            if not isinstance(entry, dict) or "stage" not in entry:
                raise ConfigError(f"each stage must be an object with 'stage', got {entry!r}")
            params = {k: v for k, v in entry.items() if k != "stage"}
            stages.append(StageSpec(entry["stage"], params))
        return cls(tuple(stages))

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_json_dict(doc)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def _canonical_curve(params: dict) -> dict:
    curve = params.get("curve")
    if not isinstance(curve, dict) or curve.get("type") not in ("gamma", "sigmoid"):
        raise ConfigError(f"tone stage needs curve {{type: gamma|sigmoid, ...}}, got {curve!r}")
    if curve["type"] == "gamma":
        return {"type": "gamma", "gamma": float(curve["gamma"])}
    return {
        "type": "sigmoid",
        "gain": float(curve["gain"]),
        "shift": float(curve.get("shift", tone.DEFAULT_SHIFT)),
    }


def _canonical_params(name: str, params: dict) -> dict:
    """Normalize a stage's parameters so hashing is stable across spellings."""
    try:
        if name == "grayscale":
            return {}
        if name == "lowpass":
            if "pixel_pitch_um" in params:
                preset = spectral.preset_from_pitch(
                    float(params["pixel_pitch_um"]),
                    float(params.get("implant_width_um", spectral.PRIMA_IMPLANT_WIDTH_UM)),
                )
                cutoff = preset.cutoff_cycles
            else:
                cutoff = float(params["cutoff_cycles"])
            return {
                "cutoff_cycles": cutoff,
                "taper": float(params.get("taper", spectral.DEFAULT_TAPER)),
            }
        if name in ("tone", "inverse_tone"):
            return {"curve": _canonical_curve(params)}
        if name == "dmd_quantize":
            return {"levels": int(params.get("levels", DMD_LEVELS))}
        if name == "quantize_levels":
            return {"levels": int(params["levels"])}
        if name == "enhance_landmarks":
            out = {
                "thickness_implant_px": float(params["thickness_implant_px"]),
                "color_mode": str(params.get("color_mode", "absolute")),
                "grid_extent": float(params.get("grid_extent", 20.0)),
            }
            if out["color_mode"] == "absolute":
                out["absolute_value"] = float(params.get("absolute_value", 0.0))
            else:
                out["darken_factor"] = float(params.get("darken_factor", 0.5))
            return out
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters for stage {name!r}: {exc}") from exc
    raise ConfigError(f"unknown stage {name!r}, expected one of {STAGE_NAMES}")


def validate_config(cfg: PipelineConfig) -> None:
    names = [s.name for s in cfg.stages]
    for stage in cfg.stages:
        _canonical_params(stage.name, stage.params)  # raises on bad stage/params
    if names.count("lowpass") > 1:
        raise ConfigError("lowpass may appear at most once")
    if "grayscale" in names and names.index("grayscale") != 0:
        raise ConfigError("grayscale, when present, must be the first stage")


def _curve_from_params(params: dict):
    curve = _canonical_curve(params)
    if curve["type"] == "gamma":
        return tone.GammaCurve(curve["gamma"])
    return tone.SigmoidCurve(curve["gain"], curve["shift"])


def apply_stages(img: Image, cfg: PipelineConfig, lm=None, timings=None) -> Image:
    """Run every post-grayscale stage of a config over a grayscale raster."""
    for stage in cfg.stages:
        params = _canonical_params(stage.name, stage.params)
        t0 = time.perf_counter()
        if stage.name == "grayscale":
            pass  # conversion happened at pipeline entry
        elif stage.name == "lowpass":
            img = spectral.lowpass(
                img, spectral.SpectralFilter(params["cutoff_cycles"], params["taper"])
            )
        elif stage.name == "tone":
            img = tone.apply_curve(img, _curve_from_params(params))
        elif stage.name == "inverse_tone":
            img = tone.apply_inverse(img, _curve_from_params(params))
        elif stage.name in ("dmd_quantize", "quantize_levels"):
            img = quantize_levels(img, params["levels"])
        elif stage.name == "enhance_landmarks":
            if lm is None:
                raise MissingLandmarksError(
                    "config contains enhance_landmarks but no landmark set was supplied"
                )
            style_kwargs = {
                "thickness_implant_px": params["thickness_implant_px"],
                "color_mode": params["color_mode"],
            }
            if params["color_mode"] == "absolute":
                style_kwargs["absolute_value"] = params["absolute_value"]
            else:
                style_kwargs["darken_factor"] = params["darken_factor"]
            img = lmod.enhance_features(
                img, lm, lmod.EnhanceStyle(**style_kwargs), params["grid_extent"]
            )
        if timings is not None:
            timings[stage.name] = timings.get(stage.name, 0.0) + (
                time.perf_counter() - t0
            ) * 1000.0
    return img


def simulate(img: ColorImage, cfg: PipelineConfig, lm=None, timings=None) -> Image:
    """Run a full flow over a color input. Grayscale conversion always happens
    at entry; an explicit grayscale stage simply records it in the config."""
    grey = to_grayscale(img)
    return apply_stages(grey, cfg, lm=lm, timings=timings)


def _tone_stage(name: str, curve) -> StageSpec:
    if isinstance(curve, tone.GammaCurve):
        doc = {"type": "gamma", "gamma": curve.gamma}
    elif isinstance(curve, tone.SigmoidCurve):
        doc = {"type": "sigmoid", "gain": curve.gain, "shift": curve.shift}
    else:
        raise ConfigError(f"unsupported curve object: {curve!r}")
    return StageSpec(name, {"curve": doc})


def preset_config(name: str, curve=None) -> PipelineConfig:
    """Resolve a named preset to a fixed config.

    `curve` overrides the tone curve of the resolution presets; the trial
    presets are fixed to the sigmoid with gain 30 and shift 0.2.
    """
    default_curve = tone.SigmoidCurve(30.0, 0.2)
    if name in ("prima-100", "future-50", "future-20", "paper-trial-phase1"):
        pitch = {"prima-100": 100.0, "future-50": 50.0, "future-20": 20.0}.get(name, 100.0)
        chosen = default_curve if curve is None else curve
        return PipelineConfig(
            (
                StageSpec("grayscale"),
                StageSpec("lowpass", {"pixel_pitch_um": pitch}),
                _tone_stage("tone", chosen),
            )
        )
    if name == "paper-trial-phase2":
        return PipelineConfig(
            (
                StageSpec("grayscale"),
                StageSpec(
                    "enhance_landmarks",
                    {
                        "thickness_implant_px": 0.3,
                        "color_mode": "relative",
                        "darken_factor": 0.5,
                        "grid_extent": 20.0,
                    },
                ),
                _tone_stage("inverse_tone", default_curve),
                StageSpec("dmd_quantize", {"levels": DMD_LEVELS}),
                StageSpec("lowpass", {"pixel_pitch_um": 100.0}),
                _tone_stage("tone", default_curve),
            )
        )
    if name == "baseline":
        return PipelineConfig((StageSpec("grayscale"),))
    raise ConfigError(f"unknown preset {name!r}, expected one of {PRESET_NAMES}")


@dataclass
class RunReport:
    input_path: str
    output_path: str
    stage_timings_ms: dict
    config_hash: str
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


SUPPORTED_SUFFIXES = (".png", ".pgm")


def run_batch(input_dir, cfg: PipelineConfig, output_dir, landmarks_dir=None):
    """Process every supported image in a directory; failures stay per-file.

    Outputs are written as PNG next to a deterministic name (input stem).
    When a landmarks directory is given, `<stem>.json` supplies the landmark
    set for that image.
    """
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    cfg_hash = cfg.config_hash()
    reports = []
    files = sorted(
        p for p in input_dir.iterdir()
        if p.is_file() and p.suffix.lower() in SUPPORTED_SUFFIXES
    )
    for src in files:
        out_path = output_dir / (src.stem + ".png")
        timings: dict = {}
        try:
            color = load_image(src)
            lm = None
            if landmarks_dir is not None:
                lm_path = Path(landmarks_dir) / (src.stem + ".json")
                if lm_path.exists():
                    lm = lmod.load_landmarks(lm_path)
            result = simulate(color, cfg, lm=lm, timings=timings)
            save_image(result, out_path)
            reports.append(RunReport(str(src), str(out_path), timings, cfg_hash))
        except (ImageIOError, lmod.LandmarkError, ConfigError, ValueError) as exc:
            reports.append(RunReport(str(src), "", timings, cfg_hash, error=str(exc)))
    return reports


def report_to_json_dict(reports) -> dict:
    return {
        "results": [
            {
                "input": r.input_path,
                "output": r.output_path,
                "stage_timings_ms": {k: round(v, 3) for k, v in r.stage_timings_ms.items()},
                "config_hash": r.config_hash,
                "error": r.error,
            }
            for r in reports
        ]
    }
