# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython box kernels: the compiled backend.

Same contracts as _kernels_py; selected automatically at import when the
extension is built.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def iou_matrix(boxes_a, boxes_b):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(boxes_a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(boxes_b, dtype=np.float64)
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((na, nb), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double ax1, ay1, ax2, ay2, area_a, bx1, by1, bx2, by2, area_b
    cdef double iw, ih, inter
    for i in range(na):
        ax1 = a[i, 0]
        ay1 = a[i, 1]
        ax2 = ax1 + a[i, 2]
        ay2 = ay1 + a[i, 3]
        area_a = a[i, 2] * a[i, 3]
        for j in range(nb):
            bx1 = b[j, 0]
            by1 = b[j, 1]
            bx2 = bx1 + b[j, 2]
            by2 = by1 + b[j, 3]
            iw = (ax2 if ax2 < bx2 else bx2) - (ax1 if ax1 > bx1 else bx1)
            if iw <= 0:
                continue
            ih = (ay2 if ay2 < by2 else by2) - (ay1 if ay1 > by1 else by1)
            if ih <= 0:
                continue
            inter = iw * ih
            area_b = b[j, 2] * b[j, 3]
            out[i, j] = inter / (area_a + area_b - inter)
    return out


def contains_mask(boxes, double px, double py):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(boxes, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] out = np.zeros(n, dtype=np.bool_)
    cdef Py_ssize_t i
    for i in range(n):
        if b[i, 0] <= px < b[i, 0] + b[i, 2] and b[i, 1] <= py < b[i, 1] + b[i, 3]:
            out[i] = True
    return out


def greedy_dedup_mask(boxes, double iou_threshold):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(boxes, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] keep = np.zeros(n, dtype=np.bool_)
    if n == 0:
        return keep
    areas = b[:, 2] * b[:, 3]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.lexsort(
        (np.arange(n), -areas)
    ).astype(np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ious = iou_matrix(b, b)
    cdef Py_ssize_t oi, i, j
    cdef bint ok
    for oi in range(n):
        i = order[oi]
        ok = True
        for j in range(n):
            if keep[j] and ious[i, j] >= iou_threshold:
                ok = False
                break
        if ok:
            keep[i] = True
    return keep
