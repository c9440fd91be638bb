"""
Planar Geometry Primitives

Vectors are numpy arrays whose last axis has length 2; every function here
accepts a single vector or any stack of them. Rotations are 2x2 arrays.
"""

import logging

import numpy as np

from models.errors import DegenerateVector

logger = logging.getLogger(__name__)

# Shortest vector that may be normalized
EPS0 = 1e-9


def norm(v: np.ndarray) -> np.ndarray:
    """Euclidean length along the last axis."""
    v = np.asarray(v, dtype=float)
    return np.hypot(v[..., 0], v[..., 1])


def rot2(theta) -> np.ndarray:
    """Counterclockwise rotation matrix (stacked when theta is an array)."""
    cos, sin = np.cos(theta), np.sin(theta)
    return np.stack(
        [np.stack([cos, -sin], axis=-1), np.stack([sin, cos], axis=-1)], axis=-2
    )


def rotate(theta, v: np.ndarray) -> np.ndarray:
    """Rotate vector(s) ``v`` by ``theta`` radians."""
    v = np.asarray(v, dtype=float)
    cos, sin = np.cos(theta), np.sin(theta)
    return np.stack(
        [cos * v[..., 0] - sin * v[..., 1], sin * v[..., 0] + cos * v[..., 1]],
        axis=-1,
    )


def unit(v: np.ndarray) -> np.ndarray:
    """
    Normalize vector(s) to unit length.

    Args:
        v: Array of shape (..., 2)

    Returns:
        Array of the same shape with unit rows

    Raises:
        DegenerateVector: if any row is no longer than EPS0
    """
    v = np.asarray(v, dtype=float)
    n = norm(v)
    shortest = float(np.min(n))
    if shortest <= EPS0:
        raise DegenerateVector(shortest)
    if shortest <= 10 * EPS0:
        logger.warning(f"Link of length {shortest:.3e} is close to degenerate")
    return v / n[..., None]


def cross2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Scalar cross product u_x v_y - u_y v_x."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def dot2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.arctan2(np.sin(angle), np.cos(angle))
    return np.where(wrapped <= -np.pi, np.pi, wrapped)


def signed_angle(u: np.ndarray, v: np.ndarray):
    """Counterclockwise angle from ``u`` to ``v`` in (-pi, pi]."""
    uh, vh = unit(u), unit(v)
    angle = np.arctan2(cross2(uh, vh), dot2(uh, vh))
    angle = np.where(angle <= -np.pi, np.pi, angle)
    return float(angle) if np.ndim(angle) == 0 else angle
