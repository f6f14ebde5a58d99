"""
Angular geometry on (yaw, pitch) gaze directions.
"""
import numpy as np


def to_unit_vectors(gaze: np.ndarray) -> np.ndarray:
    """(..., 2) yaw/pitch degrees -> (..., 3) unit direction vectors."""
    yaw = np.radians(gaze[..., 0])
    pitch = np.radians(gaze[..., 1])
    cos_p = np.cos(pitch)
    return np.stack([cos_p * np.sin(yaw), np.sin(pitch), cos_p * np.cos(yaw)], axis=-1)


def angular_distance_deg(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Great-circle angle between gaze directions, in degrees.

    Uses atan2(|u x v|, u . v), which stays accurate for tiny angles.
    NaN inputs give NaN.
    """
    u = to_unit_vectors(np.asarray(a, dtype=np.float64))
    v = to_unit_vectors(np.asarray(b, dtype=np.float64))
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.degrees(np.arctan2(cross, dot))
