import json

import numpy as np
import pytest

from provisim import charts
from provisim.imagecore import ColorImage, Image, load_image, save_color_image, save_image
from provisim.landmarks import Contour, LandmarkSet
from provisim.pipeline import (
    DMD_LEVELS,
    PRESET_NAMES,
    ConfigError,
    MissingLandmarksError,
    PipelineConfig,
    StageSpec,
    apply_stages,
    preset_config,
    report_to_json_dict,
    run_batch,
    simulate,
)
from provisim.tone import GammaCurve, SigmoidCurve


def color_from_grey(values):
    grey = np.asarray(values, dtype=np.float64)
    return ColorImage(np.repeat(grey[:, :, None], 3, axis=2))


class TestConfig:
    def test_round_trip_is_lossless(self):
        cfg = preset_config("paper-trial-phase2")
        text = cfg.to_json()
        again = PipelineConfig.from_json(text)
        assert again.to_json() == text
        assert again.config_hash() == cfg.config_hash()

    def test_hash_changes_with_meaningful_field(self):
        a = preset_config("prima-100", curve=SigmoidCurve(30.0, 0.2))
        b = preset_config("prima-100", curve=SigmoidCurve(20.0, 0.2))
        assert a.config_hash() != b.config_hash()

    def test_hash_ignores_parameter_spelling(self):
        by_pitch = PipelineConfig((StageSpec("lowpass", {"pixel_pitch_um": 100}),))
        by_cutoff = PipelineConfig(
            (StageSpec("lowpass", {"cutoff_cycles": 10.0, "taper": 0.3}),)
        )
        assert by_pitch.config_hash() == by_cutoff.config_hash()

    def test_rejects_double_lowpass(self):
        with pytest.raises(ConfigError):
            PipelineConfig(
                (
                    StageSpec("lowpass", {"cutoff_cycles": 10.0}),
                    StageSpec("lowpass", {"cutoff_cycles": 20.0}),
                )
            )

    def test_rejects_misplaced_grayscale(self):
        with pytest.raises(ConfigError):
            PipelineConfig(
                (StageSpec("lowpass", {"cutoff_cycles": 10.0}), StageSpec("grayscale"))
            )

    def test_rejects_unknown_stage(self):
        with pytest.raises(ConfigError):
            PipelineConfig((StageSpec("sharpen", {}),))

    def test_rejects_bad_curve(self):
        with pytest.raises(ConfigError):
            PipelineConfig((StageSpec("tone", {"curve": {"type": "spline"}}),))

    def test_rejects_bad_json(self):
        with pytest.raises(ConfigError):
            PipelineConfig.from_json("{broken")
        with pytest.raises(ConfigError):
            PipelineConfig.from_json(json.dumps({"stages": [{"no_stage_key": 1}]}))


class TestPresets:
    def test_all_names_resolve(self):
        for name in PRESET_NAMES:
            cfg = preset_config(name)
            assert cfg.stages

    def test_resolution_preset_cutoffs(self):
        for name, cutoff in (("prima-100", 10.0), ("future-50", 20.0), ("future-20", 50.0)):
            cfg = preset_config(name)
            lowpass = next(s for s in cfg.stages if s.name == "lowpass")
            doc = cfg.to_json_dict()
            stage_doc = next(s for s in doc["stages"] if s["stage"] == "lowpass")
            assert stage_doc["cutoff_cycles"] == cutoff
            assert stage_doc["taper"] == 0.3
            assert lowpass is not None

    def test_phase1_uses_trial_sigmoid(self):
        doc = preset_config("paper-trial-phase1").to_json_dict()
        tone_doc = next(s for s in doc["stages"] if s["stage"] == "tone")
        assert tone_doc["curve"] == {"type": "sigmoid", "gain": 30.0, "shift": 0.2}

    def test_phase2_stage_order(self):
        names = [s.name for s in preset_config("paper-trial-phase2").stages]
        assert names == [
            "grayscale",
            "enhance_landmarks",
            "inverse_tone",
            "dmd_quantize",
            "lowpass",
            "tone",
        ]

    def test_curve_override(self):
        doc = preset_config("prima-100", curve=GammaCurve(3.5)).to_json_dict()
        tone_doc = next(s for s in doc["stages"] if s["stage"] == "tone")
        assert tone_doc["curve"] == {"type": "gamma", "gamma": 3.5}

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset_config("prima-200")


class TestSimulate:
    def test_uniform_grey_fixed_point(self):
        cfg = PipelineConfig(
            (
                StageSpec("grayscale"),
                StageSpec("lowpass", {"cutoff_cycles": 10.0, "taper": 0.3}),
                StageSpec("tone", {"curve": {"type": "gamma", "gamma": 1.0}}),
            )
        )
        out = simulate(color_from_grey(np.full((64, 64), 0.5)), cfg)
        assert np.allclose(out.pixels, 0.5, atol=1e-9)

    def test_inverse_then_forward_round_trip(self):
        cfg = PipelineConfig(
            (
                StageSpec("grayscale"),
                StageSpec("inverse_tone", {"curve": {"type": "gamma", "gamma": 2.6}}),
                StageSpec("tone", {"curve": {"type": "gamma", "gamma": 2.6}}),
            )
        )
        rng = np.random.default_rng(8)
        grey = rng.uniform(0, 1, size=(32, 32))
        out = simulate(color_from_grey(grey), cfg)
        assert np.abs(out.pixels - grey).max() < 1e-6

    def test_landolt_survives_prima_preset(self):
        spec = charts.LandoltSpec(1.2, "left")
        cfg = preset_config("prima-100", curve=SigmoidCurve(30.0, 0.2))
        degrade = lambda img: apply_stages(img, cfg)
        probe = degrade(charts.render_landolt(spec))
        assert charts.classify_gap_orientation(probe, spec, degrade=degrade) == "left"

    def test_dmd_stage_limits_levels(self):
        cfg = PipelineConfig((StageSpec("grayscale"), StageSpec("dmd_quantize")))
        rng = np.random.default_rng(12)
        out = simulate(color_from_grey(rng.uniform(0, 1, (48, 48))), cfg)
        assert len(np.unique(out.pixels)) <= DMD_LEVELS

    def test_missing_landmarks_raises(self):
        cfg = preset_config("paper-trial-phase2")
        with pytest.raises(MissingLandmarksError):
            simulate(color_from_grey(np.full((32, 32), 0.5)), cfg)

    def test_enhance_stage_runs_with_landmarks(self):
        cfg = preset_config("paper-trial-phase2")
        lm = LandmarkSet(
            np.array([[0.2, 0.5], [0.8, 0.5]]),
            {"left_eyebrow": Contour((0, 1), False)},
        )
        grey = np.full((40, 40), 0.8)
        out = simulate(color_from_grey(grey), cfg, lm=lm)
        assert out.pixels.shape == (40, 40)
        assert out.pixels.min() < 0.8  # the stroke went through the flow

    def test_baseline_is_plain_grayscale(self):
        rng = np.random.default_rng(14)
        px = rng.uniform(0, 1, size=(16, 16, 3))
        out = simulate(ColorImage(px), preset_config("baseline"))
        luma = 0.2126 * px[:, :, 0] + 0.7152 * px[:, :, 1] + 0.0722 * px[:, :, 2]
        assert np.allclose(out.pixels, luma, atol=1e-12)

    def test_stage_timings_collected(self):
        timings = {}
        cfg = preset_config("prima-100")
        simulate(color_from_grey(np.full((32, 32), 0.4)), cfg, timings=timings)
        assert set(timings) == {"grayscale", "lowpass", "tone"}
        assert all(v >= 0 for v in timings.values())


class TestBatch:
    @staticmethod
    def _populate(tmp_path, n=3):
        src = tmp_path / "in"
        src.mkdir()
        rng = np.random.default_rng(77)
        for i in range(n):
            px = rng.uniform(0, 1, size=(32, 32, 3))
            save_color_image(ColorImage(px), src / f"face_{i}.png")
        return src

    def test_empty_dir_gives_empty_report(self, tmp_path):
        src = tmp_path / "in"
        src.mkdir()
        reports = run_batch(src, preset_config("prima-100"), tmp_path / "out")
        assert reports == []

    def test_corrupt_file_isolated(self, tmp_path):
        src = self._populate(tmp_path, n=3)
        (src / "broken.png").write_bytes(b"\x89PNG\r\n\x1a\nnot really a png")
        reports = run_batch(src, preset_config("prima-100"), tmp_path / "out")
        assert len(reports) == 4
        failures = [r for r in reports if not r.ok]
        assert len(failures) == 1
        assert "broken" in failures[0].input_path
        assert sum(1 for r in reports if r.ok) == 3
        doc = report_to_json_dict(reports)
        assert len(doc["results"]) == 4

    def test_deterministic_outputs(self, tmp_path):
        src = self._populate(tmp_path)
        cfg = preset_config("prima-100")
        first = run_batch(src, cfg, tmp_path / "out1")
        second = run_batch(src, cfg, tmp_path / "out2")
        assert [r.config_hash for r in first] == [r.config_hash for r in second]
        for a, b in zip(first, second):
            assert (tmp_path / "out1" / a.output_path.split("/")[-1]).read_bytes() == (
                tmp_path / "out2" / b.output_path.split("/")[-1]
            ).read_bytes()

    def test_landmark_dir_used(self, tmp_path):
        src = tmp_path / "in"
        src.mkdir()
        grey = np.full((40, 40), 0.8)
        save_color_image(color_from_grey(grey), src / "face.png")
        lm_dir = tmp_path / "lm"
        lm_dir.mkdir()
        doc = {
            "points": [[0.2, 0.5], [0.8, 0.5], [0.2, 0.3], [0.8, 0.3],
                       [0.3, 0.4], [0.5, 0.35], [0.7, 0.4], [0.5, 0.45],
                       [0.3, 0.6], [0.5, 0.55], [0.7, 0.6], [0.5, 0.65],
                       [0.3, 0.8], [0.5, 0.75], [0.7, 0.8], [0.5, 0.85],
                       [0.4, 0.8], [0.5, 0.78], [0.6, 0.8], [0.5, 0.82]],
            "contours": {
                "left_eyebrow": {"indices": [0, 1], "closed": False},
                "right_eyebrow": {"indices": [2, 3], "closed": False},
                "left_iris": {"indices": [4, 5, 6, 7], "closed": True},
                "right_iris": {"indices": [8, 9, 10, 11], "closed": True},
                "outer_lips": {"indices": [12, 13, 14, 15], "closed": True},
                "inner_lips": {"indices": [16, 17, 18, 19], "closed": True},
            },
        }
        (lm_dir / "face.json").write_text(json.dumps(doc), encoding="utf-8")
        reports = run_batch(src, preset_config("paper-trial-phase2"), tmp_path / "out",
                            landmarks_dir=lm_dir)
        assert len(reports) == 1 and reports[0].ok

    def test_missing_landmarks_recorded_per_file(self, tmp_path):
        src = self._populate(tmp_path, n=1)
        reports = run_batch(src, preset_config("paper-trial-phase2"), tmp_path / "out")
        assert len(reports) == 1
        assert not reports[0].ok
        assert "landmark" in reports[0].error.lower()
