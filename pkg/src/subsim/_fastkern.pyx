# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled core for the trajectory miss-distance kernel.

Arithmetic deliberately mirrors the numpy fallback term by term so the two
backends agree bit for bit: position = (x + u*tk) + (0.5*a)*(tk*tk), squared
distance accumulated as dx*dx + dy*dy, single sqrt of the minimum.
"""

import numpy as np

from libc.math cimport INFINITY, sqrt


def miss_distance_batch(double[:, ::1] states, double[:, ::1] obs_xy, double dt):
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t n_pts = obs_xy.shape[0]
    miss_arr = np.empty(n, dtype=np.float64)
    idx_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] miss = miss_arr
    cdef Py_ssize_t[::1] idx = idx_arr
    cdef Py_ssize_t i, k, best_k
    cdef double x, u, hax, y, v, hay, tk, tk2, dx, dy, d2, best
    with nogil:
        for i in range(n):
            x = states[i, 0]
            u = states[i, 1]
            hax = 0.5 * states[i, 2]
            y = states[i, 3]
            v = states[i, 4]
            hay = 0.5 * states[i, 5]
            best = INFINITY
            best_k = 0
            for k in range(n_pts):
                tk = k * dt
                tk2 = tk * tk
                dx = (x + u * tk + hax * tk2) - obs_xy[k, 0]
                dy = (y + v * tk + hay * tk2) - obs_xy[k, 1]
                d2 = dx * dx + dy * dy
                if d2 < best:
                    best = d2
                    best_k = k
            miss[i] = sqrt(best)
            idx[i] = best_k
    return miss_arr, idx_arr
