# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled distance-field kernel: per-segment scalar loops over bounded windows."""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor, sqrt

cnp.import_array()


def polyline_distance_field(vertices, bint closed, int height, int width, double band):
    verts = np.ascontiguousarray(vertices, dtype=np.float64)
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 2:
        raise ValueError(f"vertices must be (K>=2, 2), got shape {verts.shape}")
    out = np.full((height, width), np.inf, dtype=np.float64)

    cdef double[:, ::1] v = verts
    cdef double[:, ::1] o = out
    cdef Py_ssize_t n = verts.shape[0]
    cdef Py_ssize_t n_seg = n if closed else n - 1
    cdef Py_ssize_t k, i, j, i0, i1, j0, j1
    cdef double ax, ay, bx, by, dx, dy, seg_len2
    cdef double px, py, rx, ry, t, qx, qy, dist
    cdef double lo_x, hi_x, lo_y, hi_y

    for k in range(n_seg):
        ax = v[k, 0]
        ay = v[k, 1]
        bx = v[(k + 1) % n, 0]
        by = v[(k + 1) % n, 1]
        lo_x = ax if ax < bx else bx
        hi_x = ax if ax > bx else bx
        lo_y = ay if ay < by else by
        hi_y = ay if ay > by else by
        j0 = <Py_ssize_t>floor(lo_x - band - 0.5)
        j1 = <Py_ssize_t>ceil(hi_x + band - 0.5) + 1
        i0 = <Py_ssize_t>floor(lo_y - band - 0.5)
        i1 = <Py_ssize_t>ceil(hi_y + band - 0.5) + 1
        if j0 < 0:
            j0 = 0
        if i0 < 0:
            i0 = 0
        if j1 > width - 1:
            j1 = width - 1
        if i1 > height - 1:
            i1 = height - 1
        dx = bx - ax
        dy = by - ay
        seg_len2 = dx * dx + dy * dy
        for i in range(i0, i1 + 1):
            py = i + 0.5
            for j in range(j0, j1 + 1):
                px = j + 0.5
                rx = px - ax
                ry = py - ay
                if seg_len2 > 0.0:
                    t = (rx * dx + ry * dy) / seg_len2
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                else:
                    t = 0.0
                qx = rx - t * dx
                qy = ry - t * dy
                dist = sqrt(qx * qx + qy * qy)
                if dist < o[i, j]:
                    o[i, j] = dist
    return out
