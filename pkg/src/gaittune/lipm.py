"""Linear inverted pendulum model: state propagation, ZMP and required friction.

The horizontal CoM is modeled per axis as a triple integrator driven by
jerk; the vertical CoM is held at a constant height, which makes the ZMP
affine in the CoM state and keeps the downstream gait problem convex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ComState", "LipmParams", "ZmpPoint", "propagate", "zmp_of", "rcof_of"]


def _require_finite(name, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class ComState:
    """Horizontal CoM state: position, velocity, acceleration per axis (x, y)."""

    position: tuple[float, float]
    velocity: tuple[float, float]
    acceleration: tuple[float, float]

    def __post_init__(self):
        _require_finite("ComState", self.position, self.velocity, self.acceleration)

    @staticmethod
    def zero() -> "ComState":
        return ComState((0.0, 0.0), (0.0, 0.0), (0.0, 0.0))

    def as_array(self) -> np.ndarray:
        """(3, 2) array with rows position/velocity/acceleration."""
        return np.array([self.position, self.velocity, self.acceleration])


@dataclass(frozen=True)
class LipmParams:
    """Pendulum constants: CoM height, gravity and sample period."""

    com_height: float = 0.8
    gravity: float = 9.81
    dt: float = 0.01

    def __post_init__(self):
        if not (self.com_height > 0 and self.gravity > 0 and self.dt > 0):
            raise ValueError("com_height, gravity and dt must all be > 0")

    @property
    def omega_sq(self) -> float:
        return self.gravity / self.com_height


@dataclass(frozen=True)
class ZmpPoint:
    z_x: float
    z_y: float

    def __post_init__(self):
        _require_finite("ZmpPoint", self.z_x, self.z_y)

    def as_array(self) -> np.ndarray:
        return np.array([self.z_x, self.z_y])


def propagate(state: ComState, jerk: tuple[float, float], params: LipmParams,
              dt: float | None = None) -> ComState:
    """Exact zero-order-hold triple-integrator update per axis.

    The jerk is held constant over the interval, so the update is exact for
    the continuous-time model (no integrator drift).
    """
    _require_finite("jerk", jerk)
    h = params.dt if dt is None else dt
    if h <= 0:
        raise ValueError("dt must be > 0")
    p = np.asarray(state.position, float)
    v = np.asarray(state.velocity, float)
    a = np.asarray(state.acceleration, float)
    j = np.asarray(jerk, float)
    p_next = p + v * h + a * h**2 / 2.0 + j * h**3 / 6.0
    v_next = v + a * h + j * h**2 / 2.0
    a_next = a + j * h
    return ComState(tuple(p_next), tuple(v_next), tuple(a_next))


def zmp_of(state: ComState, params: LipmParams) -> ZmpPoint:
    """LIPM zero moment point: z = c - (h/g) * c_ddot per axis."""
    k = params.com_height / params.gravity
    return ZmpPoint(
        state.position[0] - k * state.acceleration[0],
        state.position[1] - k * state.acceleration[1],
    )


def rcof_of(state: ComState, params: LipmParams) -> float:
    """Required coefficient of friction for a LIPM (zero vertical acceleration).

    The ground reaction force is m * (c_ddot + g e_z), so the
    tangential-to-normal ratio is ||c_ddot|| / g.
    """
    ax, ay = state.acceleration
    return math.hypot(ax, ay) / params.gravity
