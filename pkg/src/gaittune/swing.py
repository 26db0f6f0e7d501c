"""Quintic swing-foot trajectories between consecutive footsteps.

Quintics (not cubics) keep acceleration continuous at the boundaries,
which matters because the tracking controller penalizes foot velocities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SwingTrajectory", "plan_swing"]


def _quintic(p0, v0, a0, p1, v1, a1, T):
    """Coefficients (c0..c5) of the quintic matching both endpoint states."""
    c0, c1, c2 = p0, v0, a0 / 2.0
    T2, T3, T4, T5 = T**2, T**3, T**4, T**5
    A = np.array([
        [T3, T4, T5],
        [3 * T2, 4 * T3, 5 * T4],
        [6 * T, 12 * T2, 20 * T3],
    ])
    b = np.array([
        p1 - (c0 + c1 * T + c2 * T2),
        v1 - (c1 + 2 * c2 * T),
        a1 - 2 * c2,
    ])
    c3, c4, c5 = np.linalg.solve(A, b)
    return np.array([c0, c1, c2, c3, c4, c5])


def _polyval(coeffs, t):
    t = np.asarray(t, float)
    powers = np.stack([t**k for k in range(6)], axis=-1)
    return powers @ coeffs


def _polyder(coeffs):
    return np.array([k * coeffs[k] for k in range(1, 6)] + [0.0])


@dataclass(frozen=True)
class SwingTrajectory:
    """Per-axis quintic coefficients for one swing phase.

    Horizontal axes use a single quintic over [0, duration]; the vertical
    axis is two quintic segments meeting at the apex at mid-time.
    """

    coeffs_x: np.ndarray
    coeffs_y: np.ndarray
    coeffs_z_up: np.ndarray
    coeffs_z_down: np.ndarray
    apex_height: float
    duration: float

    def position(self, t):
        """Swing foot position(s) at time(s) t in [0, duration]; (..., 3)."""
        t = np.clip(np.asarray(t, float), 0.0, self.duration)
        x = _polyval(self.coeffs_x, t)
        y = _polyval(self.coeffs_y, t)
        half = self.duration / 2.0
        up = _polyval(self.coeffs_z_up, np.minimum(t, half))
        down = _polyval(self.coeffs_z_down, np.maximum(t - half, 0.0))
        z = np.where(t <= half, up, down)
        return np.stack([x, y, z], axis=-1)

    def velocity(self, t):
        t = np.clip(np.asarray(t, float), 0.0, self.duration)
        x = _polyval(_polyder(self.coeffs_x), t)
        y = _polyval(_polyder(self.coeffs_y), t)
        half = self.duration / 2.0
        up = _polyval(_polyder(self.coeffs_z_up), np.minimum(t, half))
        down = _polyval(_polyder(self.coeffs_z_down), np.maximum(t - half, 0.0))
        z = np.where(t <= half, up, down)
        return np.stack([x, y, z], axis=-1)


def plan_swing(start: tuple[float, float], end: tuple[float, float],
               apex: float, duration: float) -> SwingTrajectory:
    """Plan one swing phase from `start` to `end` (planar points, [m]).

    Horizontal: quintic with zero boundary velocity and acceleration.
    Vertical: two quintics 0 -> apex -> 0 with zero velocity at the
    endpoints and at the apex, zero acceleration at the ground contacts.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    if apex <= 0:
        raise ValueError("apex must be > 0")
    if not np.all(np.isfinite([*start, *end, apex, duration])):
        raise ValueError("non-finite swing endpoints")
    half = duration / 2.0
    return SwingTrajectory(
        coeffs_x=_quintic(start[0], 0, 0, end[0], 0, 0, duration),
        coeffs_y=_quintic(start[1], 0, 0, end[1], 0, 0, duration),
        coeffs_z_up=_quintic(0, 0, 0, apex, 0, 0, half),
        coeffs_z_down=_quintic(apex, 0, 0, 0, 0, 0, half),
        apex_height=apex,
        duration=duration,
    )
