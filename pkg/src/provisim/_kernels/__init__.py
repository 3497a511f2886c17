"""Rasterization kernels with a compiled core and a pure-numpy fallback.

The distance-field computation behind anti-aliased contour stroking is the
one bespoke per-pixel loop in the package (FFT and pointwise stages are
already vectorized). When the Cython extension has been built it is used
automatically; otherwise the numpy implementation takes over. Both expose
the same contract and are benchmarked against each other in
benchmarks/bench_kernels.py.
"""

from . import numpy_backend

try:
    from . import _distfield as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "numpy"


def polyline_distance_field(vertices, closed, height, width, band):
    """Distance from every pixel center to a polyline, exact within `band`.

    Parameters
    ----------
    vertices : (K, 2) float array
        Polyline vertices as (x, y) in sample coordinates, where pixel
        (row i, col j) has its center at (j + 0.5, i + 0.5).
    closed : bool
        Close the polyline with a segment from the last vertex to the first.
    height, width : int
        Output raster shape.
    band : float
        Pixels farther than this from every segment keep the fill value
        (+inf); distances at or below the band are exact.

    Returns
    -------
    (height, width) float64 array of distances in samples.
    """
    impl = _compiled if _compiled is not None else numpy_backend
    return impl.polyline_distance_field(vertices, closed, height, width, band)


def available_backends():
    """Name -> callable map of every backend importable in this environment."""
    backends = {"numpy": numpy_backend.polyline_distance_field}
    if _compiled is not None:
        backends["compiled"] = _compiled.polyline_distance_field
    return backends
