"""Receding-horizon box-constrained iterative LQR tracking of a gait plan.

The controller optimizes a short window of plant commands at each control
period, warm-starting from the previous solution shifted by one period,
and emits the first optimized control. Controls are ``(f_z, cop_x,
cop_y)``; the tangential ground force follows from the pendulum geometry
``f_t = f_z (c_xy - cop) / c_z``, which keeps the model smooth and makes
the foot box on the CoP a plain control box constraint.

The Gaussian-noise channel of full iLQG is dropped: the optimizer is the
deterministic iLQR variant with box constraints; robustness enters
through the outer weight-tuning loop, not process-noise modeling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math
import numpy as np

from gaittune.plant import PlantCommand, PlantParams
from gaittune import tracking_fast

__all__ = [
    "TrackerCost", "TrackerConfig", "Policy", "linearize", "box_qp",
    "backward_pass", "forward_pass", "ilqr_solve", "IlqgTracker",
    "track_plan", "smooth_abs",
]

NX = 6  # [px, py, pz, vx, vy, vz]
NU = 3  # [f_z, cop_x, cop_y]


def smooth_abs(x, eps: float):
    """Differentiable |x| surrogate: sqrt(x^2 + eps^2) - eps."""
    return np.sqrt(np.square(x) + eps**2) - eps


@dataclass(frozen=True)
class TrackerCost:
    """Stage-cost weights on the reduced plant's observables."""

    w_pos: float = 100.0       # smooth-abs on horizontal CoM position error
    w_vel: float = 800.0       # quadratic on horizontal CoM velocity error
    w_cop: float = 20.0        # quadratic CoP deviation from foot center
    w_force: float = 1e-6      # quadratic effort on f_z about hover
    w_height: float = 50.0     # quadratic CoM height deviation
    w_vz: float = 2.0          # quadratic vertical velocity
    eps: float = 0.01          # smooth-abs sharpness [m]

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if any(w < 0 for w in (self.w_pos, self.w_vel, self.w_cop,
                               self.w_force, self.w_height, self.w_vz)):
            raise ValueError("cost weights must be >= 0")


@dataclass(frozen=True)
class TrackerConfig:
    horizon: float = 0.4          # [s]
    control_dt: float = 0.01      # [s]
    f_max_factor: float = 2.5     # f_z upper bound = factor * m * g
    max_iters: int = 3
    backtrack: float = 0.5
    min_step: float = 1e-3
    cost_tol: float = 1e-7
    reg_init: float = 1e-6
    reg_floor: float = 1e-9
    reg_up: float = 10.0
    reg_down: float = 0.5

    def __post_init__(self):
        if self.horizon <= 0 or self.control_dt <= 0:
            raise ValueError("horizon and control_dt must be > 0")

    @property
    def n_stages(self) -> int:
        return max(1, int(round(self.horizon / self.control_dt)))


@dataclass
class Policy:
    """Feedforward sequence and time-varying feedback gains."""

    u_ff: np.ndarray    # (H, NU)
    gains: np.ndarray   # (H, NU, NX)
    expected_decrease: tuple[float, float] = (0.0, 0.0)  # (dV1, dV2)


def point_mass_dynamics(x, u, dt, mass, gravity):
    """Semi-implicit Euler of the point mass on a massless leg; batched."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    p, v = x[..., :3], x[..., 3:]
    f_z = u[..., 0]
    cop = u[..., 1:3]
    z_c = np.maximum(p[..., 2], 0.2)
    a_xy = f_z[..., None] * (p[..., :2] - cop) / (mass * z_c[..., None])
    a_z = f_z / mass - gravity
    acc = np.concatenate([a_xy, a_z[..., None]], axis=-1)
    v_new = v + acc * dt
    p_new = p + v_new * dt
    return np.concatenate([p_new, v_new], axis=-1)


def linearize(dynamics, x0, u0, dt, eps: float = 1e-6):
    """Central finite-difference Jacobians of ``dynamics(x, u, dt)``.

    Works for any state/control dimension; the dynamics callable must
    accept batched inputs along the leading axis.
    """
    x0 = np.asarray(x0, float)
    u0 = np.asarray(u0, float)
    nx, nu = x0.shape[-1], u0.shape[-1]
    ex = np.eye(nx) * eps
    eu = np.eye(nu) * eps
    xs = np.concatenate([x0 + ex, x0 - ex,
                         np.tile(x0, (2 * nu, 1))], axis=0)
    us = np.concatenate([np.tile(u0, (2 * nx, 1)),
                         u0 + eu, u0 - eu], axis=0)
    out = dynamics(xs, us, dt)
    a_mat = (out[:nx] - out[nx:2 * nx]).T / (2 * eps)
    b_mat = (out[2 * nx:2 * nx + nu] - out[2 * nx + nu:]).T / (2 * eps)
    return a_mat, b_mat


def _linearize_all(dynamics, xs, us, dt, eps: float = 1e-6):
    """Stacked FD Jacobians for a whole trajectory in one batched call."""
    h, nx = xs.shape
    nu = us.shape[1]
    npert = 2 * (nx + nu)
    xb = np.repeat(xs[:, None, :], npert, axis=1)
    ub = np.repeat(us[:, None, :], npert, axis=1)
    for i in range(nx):
        xb[:, 2 * i, i] += eps
        xb[:, 2 * i + 1, i] -= eps
    for j in range(nu):
        ub[:, 2 * nx + 2 * j, j] += eps
        ub[:, 2 * nx + 2 * j + 1, j] -= eps
    out = dynamics(xb.reshape(-1, nx), ub.reshape(-1, nu), dt)
    out = out.reshape(h, npert, nx)
    a_seq = np.empty((h, nx, nx))
    b_seq = np.empty((h, nx, nu))
    for i in range(nx):
        a_seq[:, :, i] = (out[:, 2 * i] - out[:, 2 * i + 1]) / (2 * eps)
    for j in range(nu):
        b_seq[:, :, j] = (out[:, 2 * nx + 2 * j] - out[:, 2 * nx + 2 * j + 1]) \
            / (2 * eps)
    return a_seq, b_seq


class TrackingCostModel:
    """Analytic stage cost and its quadratic expansion along a reference."""

    def __init__(self, cost: TrackerCost, pos_ref, vel_ref, foot_ref,
                 height_ref: float, hover_force: float):
        self.cost = cost
        self.pos_ref = np.asarray(pos_ref, float)    # (H+1, 2)
        self.vel_ref = np.asarray(vel_ref, float)    # (H+1, 2)
        self.foot_ref = np.asarray(foot_ref, float)  # (H+1, 2)
        self.height_ref = height_ref
        self.hover_force = hover_force

    def stage(self, x, u, k):
        c = self.cost
        e_p = x[:2] - self.pos_ref[k]
        e_v = x[3:5] - self.vel_ref[k]
        e_h = x[2] - self.height_ref
        val = (c.w_pos * np.sum(smooth_abs(e_p, c.eps))
               + c.w_vel * np.sum(e_v**2)
               + c.w_height * e_h**2 + c.w_vz * x[5]**2)
        if u is not None:
            e_cop = u[1:3] - self.foot_ref[k]
            val += (c.w_cop * np.sum(e_cop**2)
                    + c.w_force * (u[0] - self.hover_force)**2)
        return float(val)

    def total(self, xs, us):
        c = self.cost
        h = len(us)
        e_p = xs[:, :2] - self.pos_ref[:h + 1]
        e_v = xs[:, 3:5] - self.vel_ref[:h + 1]
        e_h = xs[:, 2] - self.height_ref
        val = (c.w_pos * np.sum(smooth_abs(e_p, c.eps))
               + c.w_vel * np.sum(e_v**2)
               + c.w_height * np.sum(e_h**2) + c.w_vz * np.sum(xs[:, 5]**2))
        e_cop = us[:, 1:3] - self.foot_ref[:h]
        val += (c.w_cop * np.sum(e_cop**2)
                + c.w_force * np.sum((us[:, 0] - self.hover_force)**2))
        return float(val)

    def expand_all(self, xs, us):
        """Vectorized quadratic expansion along a trajectory.

        Returns (lx (H+1,NX), lu (H,NU), lxx (H+1,NX,NX), luu (H,NU,NU),
        lux (H,NU,NX)); the last state row is the terminal expansion.
        """
        c = self.cost
        h = len(us)
        lx = np.zeros((h + 1, NX))
        lxx = np.zeros((h + 1, NX, NX))
        e_p = xs[:, :2] - self.pos_ref[:h + 1]
        root = np.sqrt(e_p**2 + c.eps**2)
        lx[:, :2] = c.w_pos * e_p / root
        lxx[:, 0, 0] = c.w_pos * c.eps**2 / root[:, 0]**3
        lxx[:, 1, 1] = c.w_pos * c.eps**2 / root[:, 1]**3
        lx[:, 3:5] = 2 * c.w_vel * (xs[:, 3:5] - self.vel_ref[:h + 1])
        lxx[:, 3, 3] = lxx[:, 4, 4] = 2 * c.w_vel
        lx[:, 2] = 2 * c.w_height * (xs[:, 2] - self.height_ref)
        lxx[:, 2, 2] = 2 * c.w_height
        lx[:, 5] = 2 * c.w_vz * xs[:, 5]
        lxx[:, 5, 5] = 2 * c.w_vz
        lu = np.zeros((h, NU))
        luu = np.zeros((h, NU, NU))
        lu[:, 1:3] = 2 * c.w_cop * (us[:, 1:3] - self.foot_ref[:h])
        luu[:, 1, 1] = luu[:, 2, 2] = 2 * c.w_cop
        lu[:, 0] = 2 * c.w_force * (us[:, 0] - self.hover_force)
        luu[:, 0, 0] = 2 * c.w_force
        lux = np.zeros((h, NU, NX))
        return lx, lu, lxx, luu, lux

    def expand(self, x, u, k):
        """Gradients and Hessians (lx, lu, lxx, luu, lux) at (x, u)."""
        c = self.cost
        lx = np.zeros(NX)
        lxx = np.zeros((NX, NX))
        e_p = x[:2] - self.pos_ref[k]
        root = np.sqrt(e_p**2 + c.eps**2)
        lx[:2] = c.w_pos * e_p / root
        lxx[0, 0] = c.w_pos * c.eps**2 / root[0]**3
        lxx[1, 1] = c.w_pos * c.eps**2 / root[1]**3
        lx[3:5] = 2 * c.w_vel * (x[3:5] - self.vel_ref[k])
        lxx[3, 3] = lxx[4, 4] = 2 * c.w_vel
        lx[2] = 2 * c.w_height * (x[2] - self.height_ref)
        lxx[2, 2] = 2 * c.w_height
        lx[5] = 2 * c.w_vz * x[5]
        lxx[5, 5] = 2 * c.w_vz
        if u is None:
            return lx, None, lxx, None, None
        lu = np.zeros(NU)
        luu = np.zeros((NU, NU))
        lu[1:3] = 2 * c.w_cop * (u[1:3] - self.foot_ref[k])
        luu[1, 1] = luu[2, 2] = 2 * c.w_cop
        lu[0] = 2 * c.w_force * (u[0] - self.hover_force)
        luu[0, 0] = 2 * c.w_force
        lux = np.zeros((NU, NX))
        return lx, lu, lxx, luu, lux


def box_qp(q_uu, q_u, lo, hi, max_iters: int = 30):
    """Projected-Newton minimization of 0.5 d'Qd + q'd over lo <= d <= hi.

    Returns (d, free_mask). Assumes q_uu symmetric positive definite.
    """
    d = np.clip(np.zeros_like(q_u), lo, hi)
    free = np.ones_like(q_u, dtype=bool)
    for _ in range(max_iters):
        g = q_u + q_uu @ d
        clamped = ((d <= lo + 1e-12) & (g > 0)) | ((d >= hi - 1e-12) & (g < 0))
        free = ~clamped
        if np.max(np.abs(g[free]), initial=0.0) < 1e-10:
            break
        step = np.zeros_like(d)
        if np.any(free):
            step[free] = np.linalg.solve(q_uu[np.ix_(free, free)], g[free])
        d_new = np.clip(d - step, lo, hi)
        if np.max(np.abs(d_new - d)) < 1e-12:
            d = d_new
            break
        d = d_new
    return d, free


class BackwardPassFailure(Exception):
    """Non-positive-definite control Hessian at some stage."""


def backward_pass(a_seq, b_seq, quad, u_seq, lo_seq, hi_seq,
                  reg: float) -> Policy:
    """Riccati sweep with per-stage box-constrained control minimization.

    ``quad`` is the vectorized cost expansion (lx, lu, lxx, luu, lux) with
    the terminal expansion in the last state row.
    """
    lx, lu, lxx, luu, lux = quad
    h = len(u_seq)
    v_x = lx[h].copy()
    v_xx = lxx[h].copy()
    u_ff = np.zeros((h, NU))
    gains = np.zeros((h, NU, NX))
    dv1 = 0.0
    dv2 = 0.0
    reg_eye = reg * np.eye(NU)
    for k in range(h - 1, -1, -1):
        a_mat, b_mat = a_seq[k], b_seq[k]
        vxx_a = v_xx @ a_mat
        q_x = lx[k] + a_mat.T @ v_x
        q_u = lu[k] + b_mat.T @ v_x
        q_xx = lxx[k] + a_mat.T @ vxx_a
        q_ux = lux[k] + b_mat.T @ vxx_a
        q_uu = luu[k] + b_mat.T @ (v_xx @ b_mat) + reg_eye
        q_uu = 0.5 * (q_uu + q_uu.T)
        try:
            np.linalg.cholesky(q_uu)
        except np.linalg.LinAlgError:
            raise BackwardPassFailure(f"Quu not PD at stage {k}")
        lo = lo_seq[k] - u_seq[k]
        hi = hi_seq[k] - u_seq[k]
        # fast path: unconstrained Newton step already inside the box
        d_free = -np.linalg.solve(q_uu, q_u)
        if np.all(d_free >= lo) and np.all(d_free <= hi):
            d = d_free
            gain = -np.linalg.solve(q_uu, q_ux)
        else:
            d, free = box_qp(q_uu, q_u, lo, hi)
            gain = np.zeros((NU, NX))
            if np.any(free):
                idx = np.flatnonzero(free)
                gain[idx] = -np.linalg.solve(q_uu[np.ix_(idx, idx)], q_ux[idx])
        u_ff[k] = d
        gains[k] = gain
        dv1 += float(d @ q_u)
        dv2 += 0.5 * float(d @ q_uu @ d)
        quu_d = q_uu @ d
        quu_g = q_uu @ gain
        v_x = q_x + gain.T @ (quu_d + q_u) + q_ux.T @ d
        v_xx = q_xx + gain.T @ quu_g + gain.T @ q_ux + q_ux.T @ gain
        v_xx = 0.5 * (v_xx + v_xx.T)
    return Policy(u_ff=u_ff, gains=gains, expected_decrease=(dv1, dv2))


def forward_pass(dynamics, dt, cost_model, x0, x_nom, u_nom, policy,
                 lo_seq, hi_seq, step: float):
    """Line-searched rollout: u = u_nom + step * u_ff + K (x - x_nom), boxed."""
    h = len(u_nom)
    xs = np.zeros((h + 1, NX))
    us = np.zeros((h, NU))
    xs[0] = x0
    for k in range(h):
        u = u_nom[k] + step * policy.u_ff[k] + policy.gains[k] @ (xs[k] - x_nom[k])
        us[k] = np.clip(u, lo_seq[k], hi_seq[k])
        xs[k + 1] = dynamics(xs[k], us[k], dt)
    return xs, us, cost_model.total(xs, us)


def ilqr_solve(dynamics, dt, cost_model, x0, u_init, lo_seq, hi_seq,
               config: TrackerConfig, jacobians=None):
    """Iterate backward/forward passes until the cost settles.

    Returns (xs, us, cost, info). The cost over accepted iterations is
    non-increasing by construction (rejected passes keep the incumbent).
    ``jacobians(xs, us, dt) -> (A_seq, B_seq)``, when given, replaces the
    finite-difference linearization in the hot path.
    """
    h = len(u_init)
    us = np.clip(np.asarray(u_init, float), lo_seq, hi_seq)
    xs = np.zeros((h + 1, NX))
    xs[0] = x0
    for k in range(h):
        xs[k + 1] = dynamics(xs[k], us[k], dt)
    cost = cost_model.total(xs, us)
    reg = config.reg_init
    iters = 0
    costs = [cost]
    for _ in range(config.max_iters):
        if jacobians is not None:
            a_seq, b_seq = jacobians(xs[:-1], us, dt)
        else:
            a_seq, b_seq = _linearize_all(dynamics, xs[:-1], us, dt)
        quad = cost_model.expand_all(xs, us)
        policy = None
        for _ in range(12):
            try:
                policy = backward_pass(a_seq, b_seq, quad, us,
                                       lo_seq, hi_seq, reg)
                break
            except BackwardPassFailure:
                reg = max(reg * config.reg_up, 1e-6)
        if policy is None:
            break
        dv1, dv2 = policy.expected_decrease
        if -(dv1 + dv2) < config.cost_tol:
            # already converged; skip the rollout
            iters += 1
            break
        improved = False
        step = 1.0
        while step >= config.min_step:
            xs_new, us_new, cost_new = forward_pass(
                dynamics, dt, cost_model, x0, xs[:-1], us, policy,
                lo_seq, hi_seq, step)
            dv1, dv2 = policy.expected_decrease
            expected = -(step * dv1 + step**2 * dv2)
            if cost_new <= cost and (cost - cost_new) >= 0.1 * max(expected, 0.0) * step:
                xs, us, cost = xs_new, us_new, cost_new
                improved = True
                break
            step *= config.backtrack
        iters += 1
        if improved:
            reg = max(reg * config.reg_down, config.reg_floor)
            costs.append(cost)
            if len(costs) >= 2 and costs[-2] - costs[-1] < config.cost_tol:
                break
        else:
            # all backtracking steps rejected: return best-so-far
            break
    return xs, us, cost, {"iterations": iters, "costs": costs, "reg": reg}


def _ilqr_fast(model: TrackingCostModel, mass, gravity, dt, x0, u_init,
               lo_seq, hi_seq, config: TrackerConfig, jacobians):
    """Same iteration as ``ilqr_solve`` on the compiled point-mass kernels."""
    c = model.cost
    h = len(u_init)
    zero_ff = np.zeros((h, NU))
    zero_gains = np.zeros((h, NU, NX))
    args = (dt, mass, gravity, model.pos_ref, model.vel_ref, model.foot_ref,
            model.height_ref, model.hover_force, c.w_pos, c.w_vel, c.w_cop,
            c.w_force, c.w_height, c.w_vz, c.eps)
    u_init = np.clip(np.asarray(u_init, float), lo_seq, hi_seq)
    xs, us, cost = tracking_fast.rollout_core(
        x0, np.zeros((h, NX)), u_init, zero_ff, zero_gains,
        lo_seq, hi_seq, 0.0, *args)
    reg = config.reg_init
    iters = 0
    costs = [cost]
    for _ in range(config.max_iters):
        a_seq, b_seq = jacobians(xs[:-1], us, dt)
        lx, lu, lxx, luu, _ = model.expand_all(xs, us)
        ok = False
        for _ in range(12):
            u_ff, gains, dv1, dv2, ok = tracking_fast.backward_core(
                a_seq, b_seq, lx, lu, lxx, luu, us, lo_seq, hi_seq, reg)
            if ok:
                break
            reg = max(reg * config.reg_up, 1e-6)
        if not ok:
            break
        if -(dv1 + dv2) < config.cost_tol:
            iters += 1
            break
        improved = False
        step = 1.0
        while step >= config.min_step:
            xs_new, us_new, cost_new = tracking_fast.rollout_core(
                x0, xs[:-1], us, u_ff, gains, lo_seq, hi_seq, step, *args)
            expected = -(step * dv1 + step**2 * dv2)
            if cost_new <= cost and (cost - cost_new) >= 0.1 * max(expected, 0.0) * step:
                xs, us, cost = xs_new, us_new, cost_new
                improved = True
                break
            step *= config.backtrack
        iters += 1
        if improved:
            reg = max(reg * config.reg_down, config.reg_floor)
            costs.append(cost)
            if len(costs) >= 2 and costs[-2] - costs[-1] < config.cost_tol:
                break
        else:
            break
    return xs, us, cost, {"iterations": iters, "costs": costs, "reg": reg}


class IlqgTracker:
    """Receding-horizon tracking controller handle for the plant simulator."""

    def __init__(self, plan, plant_params: PlantParams,
                 config: TrackerConfig | None = None,
                 cost: TrackerCost | None = None):
        self.plan = plan
        self.params = plant_params
        self.config = config or TrackerConfig()
        self.cost = cost or TrackerCost()
        self.control_dt = self.config.control_dt
        m = plant_params.effective_mass
        g = plant_params.gravity
        self._hover = m * g
        self._mass = m
        self._gravity = g
        h = self.config.n_stages
        self._u_nom = np.tile([self._hover, 0.0, 0.0], (h, 1))
        self._u_nom[:, 1:] = plan.footsteps[0]
        self._last_command = PlantCommand(
            np.array([0.0, 0.0, self._hover]), plan.footsteps[0].copy())
        self.flagged_samples: list[float] = []
        self.history: list[tuple[float, PlantCommand]] = []
        self.diagnostics: list[dict] = []

    def _dynamics(self, x, u, dt):
        return point_mass_dynamics(x, u, dt, self._mass, self._gravity)

    def _jacobians(self, xs, us, dt):
        """Closed-form Jacobians of the point-mass model, all stages at once."""
        h = len(us)
        m = self._mass
        p_xy = xs[:, :2]
        p_z = xs[:, 2]
        f_z = us[:, 0]
        cop = us[:, 1:3]
        z_c = np.maximum(p_z, 0.2)
        interior = (p_z > 0.2).astype(float)
        dadp = np.zeros((h, 3, 3))
        coef = f_z / (m * z_c)
        dadp[:, 0, 0] = coef
        dadp[:, 1, 1] = coef
        dadp[:, :2, 2] = (-f_z[:, None] * (p_xy - cop)
                          / (m * z_c**2)[:, None]) * interior[:, None]
        dadu = np.zeros((h, 3, 3))
        dadu[:, :2, 0] = (p_xy - cop) / (m * z_c)[:, None]
        dadu[:, 2, 0] = 1.0 / m
        dadu[:, 0, 1] = -coef
        dadu[:, 1, 2] = -coef
        eye3 = np.eye(3)
        a_seq = np.zeros((h, NX, NX))
        a_seq[:, :3, :3] = eye3 + dt**2 * dadp
        a_seq[:, :3, 3:] = dt * eye3
        a_seq[:, 3:, :3] = dt * dadp
        a_seq[:, 3:, 3:] = eye3
        b_seq = np.zeros((h, NX, NU))
        b_seq[:, :3, :] = dt**2 * dadu
        b_seq[:, 3:, :] = dt * dadu
        return a_seq, b_seq

    def _window_refs(self, t: float):
        """Plan references and CoP boxes over [t, t + horizon]."""
        h = self.config.n_stages
        plan = self.plan
        dt = self.control_dt
        n = plan.n_samples
        times = t + np.arange(h + 1) * dt
        # stage j spans [times[j], times[j] + dt); its support foot is the
        # one of the plan interval just after times[j]
        idx = np.clip(np.floor(times / plan.dt + 1e-9).astype(int), 0, n - 1)
        # piecewise-linear CoM references between plan samples; the plan's
        # first sample is one plan step after the initial state
        knots = np.concatenate([[0.0], plan.times])
        p0 = np.asarray(plan.initial_state.position)[:2]
        v0 = np.asarray(plan.initial_state.velocity)[:2]
        pos_knots = np.vstack([p0, plan.com_pos[:, :2]])
        vel_knots = np.vstack([v0, plan.com_vel[:, :2]])
        pos_ref = np.column_stack(
            [np.interp(times, knots, pos_knots[:, i]) for i in range(2)])
        vel_ref = np.column_stack(
            [np.interp(times, knots, vel_knots[:, i]) for i in range(2)])
        foot_ref = plan.footsteps[plan.foot_index[idx]]
        task = plan.task
        half = np.array([task.foot_half_length, task.foot_half_width]) \
            if task is not None else np.array([0.1, 0.05])
        lo = np.zeros((h, NU))
        hi = np.zeros((h, NU))
        lo[:, 0] = 0.0
        hi[:, 0] = self.config.f_max_factor * self._hover
        lo[:, 1:] = foot_ref[:h] - half
        hi[:, 1:] = foot_ref[:h] + half
        return pos_ref, vel_ref, foot_ref, lo, hi

    def command(self, t: float, state) -> PlantCommand:
        """Optimize the window starting at t and emit the first control."""
        pos_ref, vel_ref, foot_ref, lo, hi = self._window_refs(t)
        height_ref = self.params.nominal_height + self.params.com_height_offset
        model = TrackingCostModel(self.cost, pos_ref, vel_ref, foot_ref,
                                  height_ref, self._hover)
        x0 = np.concatenate([state.position, state.velocity])
        try:
            if tracking_fast.HAVE_NUMBA:
                xs, us, cost, info = _ilqr_fast(
                    model, self._mass, self._gravity, self.control_dt, x0,
                    self._u_nom, lo, hi, self.config, self._jacobians)
            else:
                xs, us, cost, info = ilqr_solve(
                    self._dynamics, self.control_dt, model, x0, self._u_nom,
                    lo, hi, self.config, jacobians=self._jacobians)
        except (np.linalg.LinAlgError, FloatingPointError):
            self.flagged_samples.append(t)
            return self._last_command
        if not np.all(np.isfinite(us)):
            self.flagged_samples.append(t)
            return self._last_command
        # warm start for the next period: shift by one stage
        self._u_nom = np.vstack([us[1:], us[-1:]])
        u0 = us[0]
        f_z = u0[0]
        cop = u0[1:3]
        z_c = max(state.position[2], 0.2)
        f_t = f_z * (state.position[:2] - cop) / z_c
        cmd = PlantCommand(np.array([f_t[0], f_t[1], f_z]), cop.copy())
        self._last_command = cmd
        self.history.append((t, cmd))
        self.diagnostics.append(
            {"t": t, "iterations": info["iterations"],
             "cost": cost, "reg": info["reg"]})
        return cmd


def track_plan(plan, plant_params: PlantParams,
               config: TrackerConfig | None = None,
               cost: TrackerCost | None = None, disturbances=()):
    """Convenience: run the tracker against the plant over the whole plan.

    Returns (trace, tracker); the tracker's ``history`` holds the emitted
    per-period force/CoP commands.
    """
    from gaittune.plant import simulate

    tracker = IlqgTracker(plan, plant_params, config, cost)
    trace = simulate(plan, tracker, plant_params, disturbances)
    return trace, tracker
