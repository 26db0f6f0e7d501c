"""Reduced nonlinear plant: 3-D point mass on a massless leg with force saturation.

Stands in for a full-body simulation. Contact physics is realized as
clamps on the commanded ground reaction force: unilateral normal force,
friction-cone limit on the tangential force, and (optionally) a tip-over
limit that restricts the tangential force to what a center of pressure
inside the foot box can transmit. Pushes are injected as external forces
over time windows; falls are detected from CoM height and a
capturability criterion.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import math
import numpy as np

__all__ = ["PlantParams", "Disturbance", "PlantState", "PlantTrace",
           "PlantCommand", "step", "simulate", "active_push_force"]


@dataclass(frozen=True)
class PlantParams:
    """Plant constants plus the mismatch knobs the outer loop exercises."""

    mass: float = 41.0
    gravity: float = 9.81
    mu_surface: float = 0.4
    foot_half_length: float = 0.1
    foot_half_width: float = 0.05
    sim_dt: float = 0.001
    nominal_height: float = 0.8
    mass_scale: float = 1.0           # plant mass = mass * mass_scale
    com_height_offset: float = 0.0    # plant equilibrium height offset
    couple_cop_to_force: bool = True  # tip-over limit on tangential force
    slip_damping: float = 100.0       # [N*s/m] foot slide viscosity while slipping
    fall_height_fraction: float = 0.6
    fall_dwell: float = 0.3           # seconds the capturability test must fail

    def __post_init__(self):
        if self.mass <= 0 or self.sim_dt <= 0:
            raise ValueError("mass and sim_dt must be > 0")
        if self.mu_surface < 0:
            raise ValueError("mu_surface must be >= 0")

    @property
    def effective_mass(self) -> float:
        return self.mass * self.mass_scale


@dataclass(frozen=True)
class Disturbance:
    """External push: constant force over [start, end)."""

    force: tuple[float, float, float]
    start: float
    end: float
    kind: str = "push"

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError("disturbance end must be > start")


def active_push_force(disturbances, t: float) -> np.ndarray:
    f = np.zeros(3)
    for d in disturbances:
        if d.start <= t < d.end:
            f += np.asarray(d.force, float)
    return f


@dataclass
class PlantState:
    position: np.ndarray          # (3,) CoM
    velocity: np.ndarray          # (3,)
    stance_foot: np.ndarray       # (2,) planar stance foot center
    contact_mode: str = "stick"   # stick | slip

    def copy(self) -> "PlantState":
        return PlantState(self.position.copy(), self.velocity.copy(),
                          self.stance_foot.copy(), self.contact_mode)


@dataclass(frozen=True)
class PlantCommand:
    force: np.ndarray             # (3,) desired ground reaction force
    cop: np.ndarray               # (2,) desired center of pressure


@dataclass
class PlantTrace:
    """Realized closed-loop trajectory at the plan's sample times."""

    times: np.ndarray             # (N,)
    com_pos: np.ndarray           # (N, 3)
    com_vel: np.ndarray           # (N, 3)
    applied_force: np.ndarray     # (N, 3)
    cop: np.ndarray               # (N, 2)
    contact_mode: np.ndarray      # (N,) str
    fell: bool = False
    fall_time: float | None = None
    final_height: float = 0.0
    saturation_events: int = 0
    slip_accum: float = 0.0       # cumulative stance-foot slide distance [m]
    controller_diverged: bool = False

    @property
    def horizontal_velocity(self) -> np.ndarray:
        return self.com_vel[:, :2]

    def to_rows(self) -> list[dict]:
        rows = []
        for k in range(len(self.times)):
            rows.append({
                "t": self.times[k],
                "c_x": self.com_pos[k, 0], "c_y": self.com_pos[k, 1],
                "c_z": self.com_pos[k, 2],
                "cd_x": self.com_vel[k, 0], "cd_y": self.com_vel[k, 1],
                "cd_z": self.com_vel[k, 2],
                "f_x": self.applied_force[k, 0],
                "f_y": self.applied_force[k, 1],
                "f_z": self.applied_force[k, 2],
                "cop_x": self.cop[k, 0], "cop_y": self.cop[k, 1],
                "mode": self.contact_mode[k],
                "fell": int(self.fell and self.fall_time is not None
                            and self.times[k] >= self.fall_time),
            })
        return rows


def _clamp_command(state: PlantState, command: PlantCommand,
                   params: PlantParams):
    """Apply contact saturation; returns (applied force, clamped CoP, mode, shortfall)."""
    f = np.asarray(command.force, float).copy()
    f[2] = max(f[2], 0.0)
    cop = np.clip(
        np.asarray(command.cop, float),
        state.stance_foot - (params.foot_half_length, params.foot_half_width),
        state.stance_foot + (params.foot_half_length, params.foot_half_width),
    )
    saturated = False

    if params.couple_cop_to_force:
        # moment balance about the CoP: f_t * z_c = f_z * (c_xy - cop), so a
        # CoP confined to the foot box bounds the transmissible tangential force
        z_c = max(state.position[2], 1e-6)
        lo = f[2] * (state.position[:2] - state.stance_foot
                     - (params.foot_half_length, params.foot_half_width)) / z_c
        hi = f[2] * (state.position[:2] - state.stance_foot
                     + (params.foot_half_length, params.foot_half_width)) / z_c
        clipped = np.clip(f[:2], lo, hi)
        if np.any(np.abs(clipped - f[:2]) > 1e-12):
            saturated = True
        f[:2] = clipped

    mode = "stick"
    demand_t = f[:2].copy()
    limit = params.mu_surface * f[2]
    norm_t = math.hypot(f[0], f[1])
    if norm_t > limit:
        f[:2] *= 0.0 if norm_t == 0 else limit / norm_t
        mode = "slip"
        saturated = True
    # friction-cone shortfall: the part of the tangential demand the
    # contact cannot transmit; while slipping the foot slides against it
    excess = demand_t - f[:2]
    shortfall = float(np.linalg.norm(excess))
    return f, cop, mode, saturated, shortfall, excess


def step(state: PlantState, command: PlantCommand, params: PlantParams,
         disturbances=(), t: float = 0.0) -> PlantState:
    """One semi-implicit Euler step under the saturated command plus pushes."""
    new_state, _ = step_detailed(state, command, params, disturbances, t)
    return new_state


def step_detailed(state: PlantState, command: PlantCommand,
                  params: PlantParams, disturbances=(), t: float = 0.0):
    f, cop, mode, saturated, shortfall, excess = _clamp_command(
        state, command, params)
    m = params.effective_mass
    push = active_push_force(disturbances, t)
    acc = f / m + push / m - np.array([0.0, 0.0, params.gravity])
    h = params.sim_dt
    vel = state.velocity + acc * h
    pos = state.position + vel * h
    foot = state.stance_foot.copy()
    slide = 0.0
    if mode == "slip" and shortfall > 0.0:
        # viscous Coulomb slide: the foot creeps against the untransmitted
        # tangential demand (pushing off too hard slides the foot back)
        slide = shortfall / params.slip_damping * h
        foot -= slide * excess / shortfall
    new_state = PlantState(pos, vel, foot, mode)
    info = {"applied_force": f, "cop": cop, "mode": mode,
            "saturated": saturated, "shortfall": shortfall, "slide": slide}
    return new_state, info


def _capturability_margin(state: PlantState, cop: np.ndarray,
                          params: PlantParams) -> float:
    """Positive when the CoM-to-CoP distance exceeds the allowed radius."""
    dist = float(np.linalg.norm(state.position[:2] - cop))
    h = max(params.nominal_height + params.com_height_offset, 1e-6)
    speed = float(np.linalg.norm(state.velocity[:2]))
    radius = (math.sqrt(h / params.gravity) * speed
              + math.hypot(params.foot_half_length, params.foot_half_width))
    return dist - radius


def simulate(plan, controller, params: PlantParams,
             disturbances=()) -> PlantTrace:
    """Run the tracking controller against the plant over the plan horizon.

    ``controller`` is a tracking-controller handle exposing
    ``control_dt`` and ``command(t, state) -> PlantCommand``. The trace is
    recorded at the plan's sample times; on a fall the remaining velocity
    samples hold the fall-time value and the final height is the height at
    the fall instant.
    """
    if plan.n_samples < 1:
        raise ValueError("plan horizon must be > 0")
    n = plan.n_samples
    dt_plan = plan.dt
    h_nom = params.nominal_height + params.com_height_offset

    state = PlantState(
        position=np.array([plan.initial_state.position[0],
                           plan.initial_state.position[1], h_nom]),
        velocity=np.array([plan.initial_state.velocity[0],
                           plan.initial_state.velocity[1], 0.0]),
        stance_foot=plan.footsteps[0].copy(),
    )

    times = plan.times.copy()
    com_pos = np.zeros((n, 3))
    com_vel = np.zeros((n, 3))
    forces = np.zeros((n, 3))
    cops = np.zeros((n, 2))
    modes = np.array(["stick"] * n, dtype=object)

    control_dt = controller.control_dt
    substeps = max(1, int(round(control_dt / params.sim_dt)))
    n_periods = int(math.ceil(times[-1] / control_dt))
    record_every = max(1, int(round(dt_plan / params.sim_dt)))

    fell = False
    fall_time = None
    final_height = h_nom
    sat_events = 0
    slip_accum = 0.0
    diverged = False
    dwell = 0.0
    k_rec = 0
    step_count = 0
    command = PlantCommand(np.array([0.0, 0.0, params.effective_mass * params.gravity]),
                           state.stance_foot.copy())
    step_period = int(round(plan.task.step_duration / params.sim_dt)) \
        if plan.task is not None else None

    for period in range(n_periods):
        t = period * control_dt
        if not fell:
            try:
                command = controller.command(t, state)
            except FloatingPointError:
                diverged = True
            if command is None or not np.all(np.isfinite(command.force)):
                diverged = True
            if diverged:
                command = PlantCommand(
                    np.array([0.0, 0.0, params.effective_mass * params.gravity]),
                    state.stance_foot.copy())
        for sub in range(substeps):
            t_sub = t + sub * params.sim_dt
            if step_count >= n * record_every:
                break
            # instantaneous support exchange at step boundaries
            if (step_period and step_count > 0 and step_count % step_period == 0
                    and not fell):
                s_idx = min(step_count // step_period, len(plan.footsteps) - 1)
                state.stance_foot = plan.footsteps[s_idx].copy()
            state, info = step_detailed(state, command, params,
                                        disturbances, t_sub)
            step_count += 1
            if info["saturated"]:
                sat_events += 1
            slip_accum += info["slide"]
            if not fell:
                if _capturability_margin(state, info["cop"], params) > 0:
                    dwell += params.sim_dt
                else:
                    dwell = 0.0
                height_fallen = state.position[2] < (
                    params.fall_height_fraction * h_nom)
                if height_fallen or dwell >= params.fall_dwell:
                    fell = True
                    fall_time = t_sub + params.sim_dt
                    # a capturable-region exit ends on the ground just like a
                    # height-triggered fall; record the collapsed height
                    final_height = min(float(state.position[2]),
                                       params.fall_height_fraction * h_nom)
            if step_count % record_every == 0 and k_rec < n:
                com_pos[k_rec] = state.position
                com_vel[k_rec] = state.velocity
                forces[k_rec] = info["applied_force"]
                cops[k_rec] = info["cop"]
                modes[k_rec] = info["mode"]
                k_rec += 1
                if fell:
                    break
        if fell and k_rec > 0:
            break

    if fell and k_rec > 0:
        # hold remaining samples at the fall-time values
        com_pos[k_rec:] = com_pos[k_rec - 1]
        com_vel[k_rec:] = com_vel[k_rec - 1]
        cops[k_rec:] = cops[k_rec - 1]
        modes[k_rec:] = modes[k_rec - 1]
    elif not fell:
        final_height = float(state.position[2])

    return PlantTrace(
        times=times, com_pos=com_pos, com_vel=com_vel,
        applied_force=forces, cop=cops, contact_mode=modes,
        fell=fell, fall_time=fall_time, final_height=final_height,
        saturation_events=sat_events, slip_accum=slip_accum,
        controller_diverged=diverged,
    )
