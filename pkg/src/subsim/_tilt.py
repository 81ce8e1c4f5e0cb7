"""Resolution of the chain target scale shared by both Metropolis kernels.

The conditional chains reward candidates that move the response toward zero
through a Gaussian factor exp(-response^2 / (2 sigma^2)).  By default sigma is
the problem's fixed geometric scale (disc radius / protected radius); it can
also be coupled to the per-level threshold ("threshold") or pinned to any
positive float.
"""

from __future__ import annotations

from typing import Optional, Union

TiltSpec = Union[None, float, str]

THRESHOLD_COUPLED = "threshold"


def resolve_tilt(spec: TiltSpec, fixed_scale: float, threshold: float) -> float:
    """Turn a tilt specification into the sigma used at the current level."""
    if spec is None:
        return fixed_scale
    if isinstance(spec, str):
        if spec == THRESHOLD_COUPLED:
            return threshold
        raise ValueError(f"unknown tilt specification {spec!r}; use a float or 'threshold'")
    value = float(spec)
    if not value > 0:
        raise ValueError(f"tilt scale must be positive, got {value}")
    return value
