"""Deterministic synthetic face corpus for demos and tests.

Real portrait photographs cannot ship with the repository, so this module
paints parametric cartoon faces (4 persons x 8 emotions, both genders and
two skin tones) together with exactly matching landmark files and a
manifest. Faces are crude but carry the attributes the protocol needs:
person identity (skin + hair), gender (hair style), and emotion (eyebrows,
eyes, mouth). Everything is a pure function of the parameters, so repeated
generation is byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .._kernels import polyline_distance_field
from ..imagecore import ColorImage, save_color_image

CANVAS = 160

PEOPLE = (
    {"person": "ava", "gender": "female", "skin": (0.94, 0.80, 0.70),
     "hair": (0.35, 0.22, 0.12), "iris": (0.25, 0.15, 0.08), "long_hair": True},
    {"person": "ben", "gender": "male", "skin": (0.90, 0.76, 0.66),
     "hair": (0.55, 0.42, 0.25), "iris": (0.15, 0.25, 0.35), "long_hair": False},
    {"person": "cora", "gender": "female", "skin": (0.45, 0.30, 0.22),
     "hair": (0.10, 0.08, 0.07), "iris": (0.12, 0.08, 0.05), "long_hair": True},
    {"person": "dan", "gender": "male", "skin": (0.40, 0.27, 0.20),
     "hair": (0.08, 0.07, 0.06), "iris": (0.10, 0.07, 0.05), "long_hair": False},
)

# mouth curve (+ = smile), mouth opening, brow raise (- = up), brow inner tilt
# (+ = inner ends down), eye opening factor, asymmetric brows
EMOTIONS = {
    "happy": dict(curve=0.030, open=0.000, raise_=0.000, tilt=0.000, eyes=1.00, asym=False),
    "sad": dict(curve=-0.025, open=0.000, raise_=0.004, tilt=-0.014, eyes=0.90, asym=False),
    "surprised": dict(curve=0.000, open=0.030, raise_=-0.024, tilt=0.000, eyes=1.45, asym=False),
    "disgusted": dict(curve=-0.018, open=0.008, raise_=0.008, tilt=0.010, eyes=0.80, asym=False),
    "angry": dict(curve=-0.012, open=0.000, raise_=0.010, tilt=0.016, eyes=0.95, asym=False),
    "confused": dict(curve=-0.008, open=0.000, raise_=-0.014, tilt=0.000, eyes=1.00, asym=True),
    "fearful": dict(curve=0.004, open=0.018, raise_=-0.020, tilt=-0.008, eyes=1.40, asym=False),
    "neutral": dict(curve=0.000, open=0.000, raise_=0.000, tilt=0.000, eyes=1.00, asym=False),
}


def _grid(n):
    c = (np.arange(n, dtype=np.float64) + 0.5) / n
    return c[None, :], c[:, None]  # x, y in normalized coords


def _ellipse_mask(n, cx, cy, rx, ry):
    x, y = _grid(n)
    return ((x - cx) / rx) ** 2 + ((y - cy) / ry) ** 2 <= 1.0


def _polygon_mask(n, pts):
    """Even-odd rule over pixel centers; pts is (K, 2) normalized."""
    x, y = _grid(n)
    inside = np.zeros((n, n), dtype=bool)
    k = len(pts)
    for i in range(k):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % k]
        crosses = (y0 <= y) != (y1 <= y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xi)
    return inside


def _paint(rgb, mask, color):
    for c in range(3):
        rgb[:, :, c][mask] = color[c]


def _stroke(rgb, pts, closed, width, color):
    n = rgb.shape[0]
    verts = np.asarray(pts, dtype=np.float64) * n
    half = width * n / 2.0
    dist = polyline_distance_field(verts, closed, n, n, half + 1.5)
    cov = np.clip(half + 0.5 - dist, 0.0, 1.0)
    for c in range(3):
        rgb[:, :, c] = rgb[:, :, c] * (1.0 - cov) + color[c] * cov


def _mouth_polygons(style):
    yc = 0.715
    half_w = 0.075
    xs = np.linspace(-1.0, 1.0, 7)
    bend = style["curve"]
    center = yc + bend * (1.0 - xs**2) - bend / 2.0
    lip = 0.014 + style["open"] / 2.0
    upper = np.stack([0.5 + half_w * xs, center - lip * (1.0 - 0.6 * xs**2)], axis=1)
    lower = np.stack([0.5 + half_w * xs, center + lip * (1.0 - 0.6 * xs**2)], axis=1)
    outer = np.concatenate([upper, lower[::-1]], axis=0)
    gap = style["open"]
    inner_up = np.stack([0.5 + 0.8 * half_w * xs, center - gap * (1.0 - xs**2) / 2.0], axis=1)
    inner_lo = np.stack([0.5 + 0.8 * half_w * xs, center + gap * (1.0 - xs**2) / 2.0], axis=1)
    inner = np.concatenate([inner_up, inner_lo[::-1]], axis=0)
    return outer, inner


def _brow(ex, inner_sign, style, raised_override=None):
    base = 0.435 + (raised_override if raised_override is not None else style["raise_"])
    span = 0.055
    pts = []
    for s in (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0):
        x = ex + inner_sign * span * (2.0 * s - 1.0)
        y = base + style["tilt"] * s - 0.006 * np.sin(np.pi * s)
        pts.append([x, y])
    return np.array(pts)


def render_face(person: dict, emotion: str, size: int = CANVAS):
    """Paint one face; returns (ColorImage, landmark document)."""
    style = EMOTIONS[emotion]
    rgb = np.zeros((size, size, 3), dtype=np.float64)
    _paint(rgb, np.ones((size, size), dtype=bool), (0.82, 0.84, 0.86))

    hair = np.asarray(person["hair"])
    skin = np.asarray(person["skin"])
    _paint(rgb, _ellipse_mask(size, 0.5, 0.42, 0.315, 0.30), hair)
    if person["long_hair"]:
        x, y = _grid(size)
        band = (np.abs(x - 0.5) <= 0.30) & (y >= 0.40) & (y <= 0.86)
        _paint(rgb, band, hair)
    _paint(rgb, _ellipse_mask(size, 0.5, 0.55, 0.27, 0.33), skin)

    eye_y = 0.48
    eyes = style["eyes"]
    for ex in (0.40, 0.60):
        _paint(rgb, _ellipse_mask(size, ex, eye_y, 0.045, 0.028 * eyes), (0.97, 0.97, 0.95))
        _paint(rgb, _ellipse_mask(size, ex, eye_y, 0.016, 0.016), person["iris"])

    # nose: a subtle vertical shading stroke
    _stroke(rgb, [[0.5, 0.52], [0.5, 0.615]], False, 0.010, skin * 0.8)

    left_brow = _brow(0.40, 1.0, style)
    right_raise = -0.002 if style["asym"] else None
    right_brow = _brow(0.60, -1.0, style, raised_override=right_raise)
    _stroke(rgb, left_brow, False, 0.014, hair)
    _stroke(rgb, right_brow, False, 0.014, hair)

    outer, inner = _mouth_polygons(style)
    lip_color = skin * np.array([0.80, 0.45, 0.45])
    _paint(rgb, _polygon_mask(size, outer), lip_color)
    if style["open"] > 0:
        _paint(rgb, _polygon_mask(size, inner), (0.22, 0.10, 0.10))
    else:
        _stroke(rgb, inner[: len(inner) // 2], False, 0.004, lip_color * 0.7)

    theta = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
    landmarks = {"points": [], "contours": {}}

    def add_contour(name, pts, closed):
        start = len(landmarks["points"])
        for px, py in pts:
            landmarks["points"].append([float(np.clip(px, 0.0, 1.0)), float(np.clip(py, 0.0, 1.0))])
        landmarks["contours"][name] = {
            "indices": list(range(start, start + len(pts))),
            "closed": closed,
        }

    add_contour("left_eyebrow", left_brow, False)
    add_contour("right_eyebrow", right_brow, False)
    for name, ex in (("left_iris", 0.40), ("right_iris", 0.60)):
        ring = np.stack(
            [ex + 0.016 * np.cos(theta), eye_y + 0.016 * np.sin(theta)], axis=1
        )
        add_contour(name, ring, True)
    add_contour("outer_lips", outer, True)
    add_contour("inner_lips", inner, True)

    return ColorImage(np.clip(rgb, 0.0, 1.0)), landmarks


def write_fixture_corpus(out_dir, size: int = CANVAS) -> Path:
    """Write images/, landmarks/ and manifest.json; returns the manifest path."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "landmarks").mkdir(parents=True, exist_ok=True)
    manifest = []
    for person in PEOPLE:
        for emotion in EMOTIONS:
            stem = f"{person['person']}_{emotion}"
            image, landmarks = render_face(person, emotion, size)
            save_color_image(image, out_dir / "images" / f"{stem}.png")
            (out_dir / "landmarks" / f"{stem}.json").write_text(
                json.dumps(landmarks), encoding="utf-8"
            )
            manifest.append(
                {
                    "id": stem,
                    "person": person["person"],
                    "gender": person["gender"],
                    "emotion": emotion,
                    "image": f"images/{stem}.png",
                    "landmarks": f"landmarks/{stem}.json",
                }
            )
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps({"manifest": manifest}, indent=2), encoding="utf-8")
    return manifest_path


def demo_plan_doc(corpus_dir, repetitions_per_type: int = 24, time_limit_s: float = 20.0):
    """Build the two-phase plan document over a fixture corpus."""
    corpus_dir = Path(corpus_dir)
    manifest = json.loads((corpus_dir / "manifest.json").read_text(encoding="utf-8"))
    return {
        "name": "demo",
        "phases": [
            {"name": "phase1", "preset": "paper-trial-phase1"},
            {"name": "phase2", "preset": "paper-trial-phase2"},
        ],
        "manifest": manifest["manifest"],
        "repetitions_per_type": repetitions_per_type,
        "time_limit_s": time_limit_s,
        "base_dir": str(corpus_dir),
    }
