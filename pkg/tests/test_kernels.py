import math

import numpy as np
import pytest

from provisim._kernels import BACKEND, available_backends, polyline_distance_field

BACKENDS = available_backends()


def brute_force_distance(vertices, closed, height, width):
    """Independent per-pixel point-to-segment oracle in plain Python."""
    verts = [tuple(v) for v in vertices]
    segs = list(zip(verts, verts[1:] + ([verts[0]] if closed else [])))
    out = np.empty((height, width))
    for i in range(height):
        for j in range(width):
            px, py = j + 0.5, i + 0.5
            best = math.inf
            for (ax, ay), (bx, by) in segs:
                dx, dy = bx - ax, by - ay
                seg_len2 = dx * dx + dy * dy
                t = 0.0 if seg_len2 == 0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / seg_len2))
                qx, qy = px - ax - t * dx, py - ay - t * dy
                best = min(best, math.hypot(qx, qy))
            out[i, j] = best
    return out


def random_polyline(rng, k, lo=2.0, hi=28.0):
    return rng.uniform(lo, hi, size=(k, 2))


class TestDistanceField:
    @pytest.mark.parametrize("name", sorted(BACKENDS))
    @pytest.mark.parametrize("closed", [False, True])
    def test_matches_bruteforce_within_band(self, name, closed):
        rng = np.random.default_rng(hash((name, closed)) % 2**32)
        verts = random_polyline(rng, 6)
        band = 5.0
        field = BACKENDS[name](verts, closed, 30, 30, band)
        exact = brute_force_distance(verts, closed, 30, 30)
        inside = exact <= band
        assert np.abs(field[inside] - exact[inside]).max() < 1e-9
        # outside the band only under-coverage would be a bug
        assert np.all(field[~inside] >= exact[~inside] - 1e-9)

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_degenerate_segment_is_point_distance(self, name):
        verts = np.array([[10.0, 10.0], [10.0, 10.0]])
        field = BACKENDS[name](verts, False, 20, 20, 50.0)
        xs = np.arange(20) + 0.5
        expected = np.hypot(xs[None, :] - 10.0, xs[:, None] - 10.0)
        assert np.allclose(field, expected, atol=1e-12)

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_rejects_bad_vertices(self, name):
        with pytest.raises(ValueError):
            BACKENDS[name](np.zeros((1, 2)), False, 8, 8, 2.0)
        with pytest.raises(ValueError):
            BACKENDS[name](np.zeros((3, 3)), False, 8, 8, 2.0)

    def test_backends_agree_bitwise(self):
        if len(BACKENDS) < 2:
            pytest.skip("compiled kernel not built")
        rng = np.random.default_rng(99)
        for closed in (False, True):
            verts = random_polyline(rng, 9, lo=-4.0, hi=40.0)  # partly off-raster
            fields = {
                name: fn(verts, closed, 36, 36, 4.0) for name, fn in BACKENDS.items()
            }
            a, b = fields["numpy"], fields["compiled"]
            assert np.array_equal(np.isinf(a), np.isinf(b))
            finite = np.isfinite(a)
            assert np.array_equal(a[finite], b[finite])

    def test_selected_backend_is_exported(self):
        assert BACKEND in BACKENDS
        verts = np.array([[2.0, 2.0], [12.0, 9.0]])
        assert np.array_equal(
            polyline_distance_field(verts, False, 16, 16, 3.0),
            BACKENDS[BACKEND](verts, False, 16, 16, 3.0),
        )
