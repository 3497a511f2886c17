"""Synthetic stimuli: Landolt C optotypes, contrast-sensitivity charts, and a
matched-filter orientation oracle.

The optotype follows ISO 8596 proportions (gap = stroke = diameter / 5) and
is sized in implant-pixel units so acuity statements like "a 0.8-pixel gap"
translate directly into geometry. Charts sweep spatial frequency along x and
contrast along y on log scales; frequency is expressed in cycles per image
(the chart has no intrinsic viewing distance, so cycles per degree are out
of scope here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imagecore import Image

ORIENTATIONS = ("up", "down", "left", "right")

# ISO 8596: outer diameter = 5 gap widths, stroke = 1 gap width.
DIAMETER_IN_GAPS = 5.0
DEFAULT_GRID_EXTENT = 20.0
DEFAULT_SUPERSAMPLE = 4


@dataclass(frozen=True)
class LandoltSpec:
    """One Landolt C sized in implant pixels on a square field."""

    gap_pixels: float
    orientation: str = "right"
    grid_extent: float = DEFAULT_GRID_EXTENT
    raster_size: int = 0  # 0 -> 10 samples per implant pixel

    def __post_init__(self):
        if self.gap_pixels <= 0:
            raise ValueError(f"gap must be positive, got {self.gap_pixels}")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        if self.grid_extent <= 0:
            raise ValueError(f"grid_extent must be positive, got {self.grid_extent}")
        if self.raster_size == 0:
            object.__setattr__(self, "raster_size", int(round(self.grid_extent)) * 10)
        if self.raster_size < 2 * self.grid_extent:
            raise ValueError(
                f"raster_size {self.raster_size} cannot resolve grid extent "
                f"{self.grid_extent} (need >= 2 samples per implant pixel)"
            )
        if self.diameter_pixels > self.grid_extent:
            raise ValueError(
                f"optotype diameter {self.diameter_pixels} implant px exceeds "
                f"the {self.grid_extent} px field"
            )

    @property
    def diameter_pixels(self) -> float:
        return DIAMETER_IN_GAPS * self.gap_pixels

    def with_orientation(self, orientation: str) -> "LandoltSpec":
        return LandoltSpec(self.gap_pixels, orientation, self.grid_extent, self.raster_size)


@dataclass(frozen=True)
class CampbellRobsonSpec:
    """Chirped grating: frequency log-swept along x, contrast log-swept along y.

    Contrast is maximal at the bottom row. Degenerate ranges (min == max)
    produce a uniform-frequency or uniform-contrast chart.
    """

    raster_size: int = 512
    freq_range: tuple = (2.0, 50.0)
    contrast_range: tuple = (0.01, 1.0)
    mean_luminance: float = 0.5

    def __post_init__(self):
        if self.raster_size < 2:
            raise ValueError(f"raster_size must be >= 2, got {self.raster_size}")
        f0, f1 = self.freq_range
        c0, c1 = self.contrast_range
        if f0 <= 0 or f1 <= 0 or f0 > f1:
            raise ValueError(f"freq_range must satisfy 0 < min <= max, got {self.freq_range}")
        if not (0 < c0 <= c1 <= 1):
            raise ValueError(
                f"contrast_range must satisfy 0 < min <= max <= 1, got {self.contrast_range}"
            )
        if not 0.0 <= self.mean_luminance <= 1.0:
            raise ValueError(f"mean_luminance must lie in [0,1], got {self.mean_luminance}")


def _gap_mask(dx, dy, orientation: str, half_gap: float):
    """Subsamples lying in the radial slot that forms the C's opening."""
    if orientation == "right":
        return (dx > 0) & (np.abs(dy) <= half_gap)
    if orientation == "left":
        return (dx < 0) & (np.abs(dy) <= half_gap)
    if orientation == "down":
        return (dy > 0) & (np.abs(dx) <= half_gap)
    return (dy < 0) & (np.abs(dx) <= half_gap)


def render_landolt(
    spec: LandoltSpec,
    supersample: int = DEFAULT_SUPERSAMPLE,
    invert: bool = False,
) -> Image:
    """Render the optotype: dark ring (0) on a light field (1).

    Geometry is evaluated on a supersampled grid and box-averaged down, so
    sub-pixel gap widths land as fractional coverage. `invert` flips the
    polarity to a white letter on a black field.
    """
    if supersample < 1:
        raise ValueError("supersample must be >= 1")
    n = spec.raster_size
    scale = n / spec.grid_extent  # samples per implant pixel
    gap = spec.gap_pixels * scale
    outer_r = DIAMETER_IN_GAPS * gap / 2.0
    inner_r = outer_r - gap
    center = n / 2.0

    ss = supersample
    coords = (np.arange(n * ss, dtype=np.float64) + 0.5) / ss - center
    dx = coords[None, :]
    dy = coords[:, None]
    rr = dx * dx + dy * dy
    ring = (rr >= inner_r * inner_r) & (rr <= outer_r * outer_r)
    letter = ring & ~_gap_mask(dx, dy, spec.orientation, gap / 2.0)
    coverage = letter.reshape(n, ss, n, ss).mean(axis=(1, 3))
    values = coverage if invert else 1.0 - coverage
    return Image(values)


def render_campbell_robson(spec: CampbellRobsonSpec) -> Image:
    """Render the chart with a continuously integrated chirp phase."""
    n = spec.raster_size
    x = (np.arange(n, dtype=np.float64) + 0.5) / n
    y = (np.arange(n, dtype=np.float64) + 0.5) / n
    f0, f1 = spec.freq_range
    if f1 == f0:
        cycles = f0 * x
    else:
        log_ratio = math.log(f1 / f0)
        cycles = f0 * (np.exp(x * log_ratio) - 1.0) / log_ratio
    c0, c1 = spec.contrast_range
    contrast = c0 * (c1 / c0) ** y if c1 != c0 else np.full_like(y, c0)
    values = spec.mean_luminance + 0.5 * contrast[:, None] * np.sin(
        2.0 * math.pi * cycles[None, :]
    )
    return Image(np.clip(values, 0.0, 1.0))


def normalized_cross_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Zero-mean NCC of two equal-shape rasters; 0 when either is constant."""
    av = a.ravel() - a.mean()
    bv = b.ravel() - b.mean()
    denom = np.linalg.norm(av) * np.linalg.norm(bv)
    if denom == 0.0:
        return 0.0
    return float(np.dot(av, bv) / denom)


def classify_gap_orientation(img: Image, spec: LandoltSpec, degrade=None) -> str:
    """Matched-filter orientation read-out.

    Renders the four clean orientation templates, pushes each through the
    same degradation pipeline the probe image went through (identity when
    None), and returns the orientation with maximal normalized
    cross-correlation. Ties resolve in ORIENTATIONS order.
    """
    best_name = ORIENTATIONS[0]
    best_score = -np.inf
    for name in ORIENTATIONS:
        template = render_landolt(spec.with_orientation(name))
        if degrade is not None:
            template = degrade(template)
        score = normalized_cross_correlation(img.pixels, template.pixels)
        if score > best_score:
            best_score = score
            best_name = name
    return best_name


def landolt_sheet(
    gaps,
    grid_extent: float = DEFAULT_GRID_EXTENT,
    raster_size: int = 0,
    invert: bool = False,
) -> Image:
    """Tile a row per gap size x a column per orientation into one sheet."""
    rows = []
    for gap in gaps:
        tiles = [
            render_landolt(
                LandoltSpec(gap, orientation, grid_extent, raster_size), invert=invert
            ).pixels
            for orientation in ORIENTATIONS
        ]
        rows.append(np.hstack(tiles))
    return Image(np.vstack(rows))
