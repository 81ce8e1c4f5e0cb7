"""Hot numeric kernels with a compiled core and a pure-numpy fallback.

The single performance-critical operation in the package is evaluating the
miss distance of a batch of constant-acceleration states against a fixed
observer track.  A Cython implementation (`subsim._fastkern`) is used when it
was built; otherwise a chunked numpy implementation with identical arithmetic
takes over.  Set ``SUBSIM_BACKEND=numpy`` or ``SUBSIM_BACKEND=cython`` to
force one side (checked once at import).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from . import _fastkern as _ext
except ImportError:  # extension not built
    _ext = None

_FORCED = os.environ.get("SUBSIM_BACKEND", "").strip().lower()
if _FORCED in ("cython", "ext", "compiled") and _ext is None:
    raise ImportError("SUBSIM_BACKEND forces the compiled backend but subsim._fastkern is not built")
_USE_EXT = _ext is not None and _FORCED not in ("numpy", "python")

# Chunk size for the fallback keeps temporaries around ~50 MB.
_BLOCK_ELEMS = 6_000_000


def active_backend() -> str:
    """Name of the backend answering `miss_distance_batch`."""
    return "cython" if _USE_EXT else "numpy"


def _as_c_f64(a, name, ndim):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {a.shape}")
    return a


def miss_distance_batch_numpy(states: np.ndarray, obs_xy: np.ndarray, dt: float):
    """Numpy fallback: closed-form positions, pointwise distance, min per row."""
    n = states.shape[0]
    n_pts = obs_xy.shape[0]
    tk = np.arange(n_pts, dtype=np.float64) * dt
    tk2 = tk * tk
    miss = np.empty(n, dtype=np.float64)
    idx = np.empty(n, dtype=np.intp)
    block = max(1, _BLOCK_ELEMS // max(n_pts, 1))
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        s = states[lo:hi]
        dx = (s[:, 0:1] + s[:, 1:2] * tk + (0.5 * s[:, 2:3]) * tk2) - obs_xy[:, 0]
        dy = (s[:, 3:4] + s[:, 4:5] * tk + (0.5 * s[:, 5:6]) * tk2) - obs_xy[:, 1]
        d2 = dx * dx + dy * dy
        k = np.argmin(d2, axis=1)  # first index on ties
        idx[lo:hi] = k
        miss[lo:hi] = np.sqrt(d2[np.arange(hi - lo), k])
    return miss, idx


def miss_distance_batch(states: np.ndarray, obs_xy: np.ndarray, dt: float):
    """Miss distance of each state's trajectory against a fixed observer track.

    Each row of `states` is a kinematic state [x, u, a_x, y, v, a_y] whose
    planar position at step k is evaluated in closed form at t = k*dt and
    compared against `obs_xy[k]` (the precomputed observer positions).

    Returns (miss, index): the minimum pointwise distance per state and the
    step index where it occurs (smallest index on ties).
    """
    states = _as_c_f64(states, "states", 2)
    obs_xy = _as_c_f64(obs_xy, "obs_xy", 2)
    if states.shape[1] != 6:
        raise ValueError(f"states must have 6 columns, got {states.shape[1]}")
    if obs_xy.shape[1] != 2:
        raise ValueError(f"obs_xy must have 2 columns, got {obs_xy.shape[1]}")
    if obs_xy.shape[0] == 0:
        raise ValueError("obs_xy must contain at least one point")
    if _USE_EXT:
        return _ext.miss_distance_batch(states, obs_xy, float(dt))
    return miss_distance_batch_numpy(states, obs_xy, float(dt))
