"""Facial landmark ingestion and contour accentuation.

Landmark detection itself happens out of process: an external detector
exports a JSON document (schema below) and this module strokes the named
feature contours onto the image with configurable thickness and darkening,
so the features survive the resolution and contrast filters downstream.

Landmark file schema (UTF-8 JSON)::

    {
      "points": [[x, y], ...],                  # normalized [0,1] coordinates
      "contours": {
        "left_eyebrow":  {"indices": [...], "closed": false},
        "right_eyebrow": {"indices": [...], "closed": false},
        "left_iris":     {"indices": [...], "closed": true},
        "right_iris":    {"indices": [...], "closed": true},
        "outer_lips":    {"indices": [...], "closed": true},
        "inner_lips":    {"indices": [...], "closed": true}
      }
    }

Exactly the six contour names above are recognized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._kernels import polyline_distance_field
from .imagecore import Image

CONTOUR_NAMES = (
    "left_eyebrow",
    "right_eyebrow",
    "left_iris",
    "right_iris",
    "outer_lips",
    "inner_lips",
)
IRIS_CONTOURS = frozenset({"left_iris", "right_iris"})

# Closed contours narrower than this many implant pixels are rendered as a
# filled convex polygon: a stroked ring at that scale would vanish.
FILL_SPAN_IMPLANT_PX = 3.0


class LandmarkError(Exception):
    """Base class for landmark ingestion errors."""


class LandmarkFormatError(LandmarkError):
    """File is not valid JSON or does not match the schema."""


class LandmarkIndexError(LandmarkError):
    """A contour references a point index outside the points array."""


class LandmarkCoordinateError(LandmarkError):
    """A point lies outside the normalized [0,1] x [0,1] square."""


class UnknownContourError(LandmarkError):
    """A contour name outside the six recognized ones."""


class MissingContourError(LandmarkError):
    """A required contour is absent from the file."""


@dataclass(frozen=True)
class Contour:
    indices: tuple
    closed: bool


@dataclass(frozen=True)
class LandmarkSet:
    """Indexed facial contour polylines in normalized image coordinates."""

    points: np.ndarray
    contours: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
            raise LandmarkCoordinateError("landmark coordinates must lie in [0,1]^2")
        object.__setattr__(self, "points", pts)
        for name, contour in self.contours.items():
            if name not in CONTOUR_NAMES:
                raise UnknownContourError(f"unrecognized contour name: {name!r}")
            if len(contour.indices) < 2:
                raise LandmarkFormatError(f"contour {name!r} needs >= 2 points")
            for idx in contour.indices:
                if not 0 <= idx < len(pts):
                    raise LandmarkIndexError(
                        f"contour {name!r} references point {idx} "
                        f"but only {len(pts)} points exist"
                    )

    def contour_points(self, name: str) -> np.ndarray:
        """(K, 2) normalized coordinates of one contour."""
        return self.points[np.array(self.contours[name].indices, dtype=np.intp)]


@dataclass(frozen=True)
class EnhanceStyle:
    """Stroke thickness and coloring for feature accentuation.

    In absolute mode stroked pixels take `absolute_value`; in relative mode
    they take `darken_factor` times the feature's own mean luminance.
    """

    thickness_implant_px: float
    color_mode: str = "absolute"
    absolute_value: float = 0.0
    darken_factor: float = 0.5

    def __post_init__(self):
        if self.thickness_implant_px <= 0:
            raise ValueError(
                f"thickness must be positive, got {self.thickness_implant_px}"
            )
        if self.color_mode not in ("absolute", "relative"):
            raise ValueError(f"color_mode must be absolute|relative, got {self.color_mode!r}")
        if not 0.0 <= self.absolute_value <= 1.0:
            raise ValueError(f"absolute_value must lie in [0,1], got {self.absolute_value}")
        if not 0.0 <= self.darken_factor <= 1.0:
            raise ValueError(f"darken_factor must lie in [0,1], got {self.darken_factor}")


def load_landmarks(path) -> LandmarkSet:
    """Load and validate a landmark JSON file. All six contours are required."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LandmarkFormatError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LandmarkFormatError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict) or "points" not in doc or "contours" not in doc:
        raise LandmarkFormatError(f"{path}: expected object with 'points' and 'contours'")
    points = doc["points"]
    if not isinstance(points, list) or any(
        not isinstance(p, list) or len(p) != 2 for p in points
    ):
        raise LandmarkFormatError(f"{path}: 'points' must be a list of [x, y] pairs")
    raw_contours = doc["contours"]
    if not isinstance(raw_contours, dict):
        raise LandmarkFormatError(f"{path}: 'contours' must be an object")
    for name in raw_contours:
        if name not in CONTOUR_NAMES:
            raise UnknownContourError(f"{path}: unrecognized contour name {name!r}")
    for name in CONTOUR_NAMES:
        if name not in raw_contours:
            raise MissingContourError(f"{path}: missing required contour {name!r}")
    contours = {}
    for name, entry in raw_contours.items():
        if (
            not isinstance(entry, dict)
            or not isinstance(entry.get("indices"), list)
            or not isinstance(entry.get("closed"), bool)
        ):
            raise LandmarkFormatError(
                f"{path}: contour {name!r} must be {{'indices': [...], 'closed': bool}}"
            )
        if any(not isinstance(i, int) or isinstance(i, bool) for i in entry["indices"]):
            raise LandmarkFormatError(f"{path}: contour {name!r} indices must be integers")
        contours[name] = Contour(tuple(entry["indices"]), entry["closed"])
    return LandmarkSet(np.asarray(points, dtype=np.float64), contours)


def _convex_hull(pts: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices in CCW order."""
    pts = np.unique(pts, axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(points):
        chain = []
        for p in points:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 0:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _convex_inside(hull: np.ndarray, height: int, width: int) -> np.ndarray:
    """Boolean mask of pixel centers inside a CCW convex polygon."""
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    inside = np.ones((height, width), dtype=bool)
    n = len(hull)
    for k in range(n):
        ax, ay = hull[k]
        bx, by = hull[(k + 1) % n]
        cross = (bx - ax) * (ys[:, None] - ay) - (by - ay) * (xs[None, :] - ax)
        inside &= cross >= 0.0
    return inside


def _contour_coverage(verts_px, closed, is_iris, half_width, grid_scale, height, width):
    """Anti-aliased coverage in [0,1] for one stroked (or filled) contour."""
    band = max(half_width, 1.0) + 1.0
    dist = polyline_distance_field(verts_px, closed, height, width, band)
    coverage = np.clip(half_width + 0.5 - dist, 0.0, 1.0)
    span_px = (verts_px.max(axis=0) - verts_px.min(axis=0)).max() / grid_scale
    if is_iris and closed and span_px < FILL_SPAN_IMPLANT_PX and len(verts_px) >= 3:
        hull = _convex_hull(verts_px)
        if len(hull) >= 3:
            inside = _convex_inside(hull, height, width)
            signed = np.where(inside, -dist, dist)
            fill = np.clip(0.5 - signed, 0.0, 1.0)
            coverage = np.maximum(coverage, fill)
    return coverage, dist


def enhance_features(
    img: Image, lm: LandmarkSet, style: EnhanceStyle, grid_extent: float
) -> Image:
    """Stroke every landmark contour onto the image.

    Stroke width is `thickness_implant_px` scaled by the number of samples
    per implant pixel (img.width / grid_extent). Relative coloring samples
    the mean of the ORIGINAL image within 1 sample of the contour, so
    overlapping strokes cannot feed back into each other; where strokes
    overlap the darker value wins.
    """
    if grid_extent <= 0:
        raise ValueError(f"grid_extent must be positive, got {grid_extent}")
    height, width = img.height, img.width
    grid_scale = width / grid_extent
    half_width = style.thickness_implant_px * grid_scale / 2.0
    original = img.pixels
    coverage_all = np.zeros((height, width), dtype=np.float64)
    value_all = np.ones((height, width), dtype=np.float64)
    for name in CONTOUR_NAMES:
        if name not in lm.contours:
            continue
        contour = lm.contours[name]
        verts = lm.contour_points(name) * np.array([width, height], dtype=np.float64)
        coverage, dist = _contour_coverage(
            verts, contour.closed, name in IRIS_CONTOURS,
            half_width, grid_scale, height, width,
        )
        if style.color_mode == "absolute":
            value = style.absolute_value
        else:
            near = dist <= 1.0
            if not near.any():
                # Degenerate contour between pixel centers: sample the nearest pixel.
                j = min(width - 1, max(0, int(verts[0, 0])))
                i = min(height - 1, max(0, int(verts[0, 1])))
                near = np.zeros_like(dist, dtype=bool)
                near[i, j] = True
            value = style.darken_factor * float(original[near].mean())
        touched = coverage > 0.0
        value_all[touched] = np.minimum(value_all[touched], value)
        coverage_all = np.maximum(coverage_all, coverage)
    blended = original * (1.0 - coverage_all) + value_all * coverage_all
    if style.color_mode == "relative":
        # relative strokes darken; a blend against the feature mean must not
        # lift pixels that are already darker than the stroke value
        blended = np.minimum(blended, original)
    return Image(np.clip(blended, 0.0, 1.0))
