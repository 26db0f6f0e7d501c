"""Convex gait QP: CoM jerks + footstep locations under ZMP/friction/reach constraints.

The decision vector is ``[jerk_x (N), jerk_y (N), step_dx (n), step_dy (n)]``
where the footstep variables are displacements between consecutive
footsteps. The objective trades off velocity tracking (alpha), ZMP
centering on the active foot (beta) and required coefficient of friction
(gamma); all three constraint families (support polygon, friction
pyramid, reachable area) are affine in the decision vector, so the
problem stays a QP with no integer variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gaittune.lipm import ComState, LipmParams, propagate
from gaittune.swing import SwingTrajectory, plan_swing

__all__ = [
    "GaitWeights", "GaitTask", "QpProblem", "QpSolution", "GaitPlan",
    "build_problem", "solve_qp", "plan_gait", "verify_plan", "QpError",
]

SQRT2 = math.sqrt(2.0)
TILT = SQRT2 - 1.0  # slope of the inscribed-octagon faces


class QpError(RuntimeError):
    """Raised when the gait QP cannot be built or solved."""


@dataclass(frozen=True)
class GaitWeights:
    """Tunable cost weights; the hyper-parameter vector of the outer loop.

    Two-weight mode ties the x/y entries of each pair together.
    """

    alpha_x: float = 1.0
    alpha_y: float = 1.0
    beta_x: float = 0.0
    beta_y: float = 0.0
    gamma_x: float = 0.0
    gamma_y: float = 0.0

    def __post_init__(self):
        vals = self.as_array()
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError(f"weights must be finite and >= 0, got {vals}")

    @staticmethod
    def uniform(alpha: float, beta: float, gamma: float) -> "GaitWeights":
        return GaitWeights(alpha, alpha, beta, beta, gamma, gamma)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha_x, self.alpha_y, self.beta_x,
                         self.beta_y, self.gamma_x, self.gamma_y])


@dataclass(frozen=True)
class GaitTask:
    """Walking task definition: reference velocity, step schedule, geometry.

    ``velocity_profile``, when given, overrides ``desired_velocity`` with a
    piecewise-constant (N, 2) reference sampled at the plan rate.
    ``initial_foot`` is the pose the first decided footstep is reachable
    from; ``initial_side`` is which foot it is ("left"/"right").
    Lateral displacement bounds apply toward the swing side and flip sign
    with the alternating stance.
    """

    desired_velocity: tuple[float, float] = (0.0, 0.0)
    n_steps: int = 10
    step_duration: float = 0.8
    foot_half_length: float = 0.1
    foot_half_width: float = 0.05
    reach_x: tuple[float, float] = (-0.3, 0.85)
    reach_y: tuple[float, float] = (0.1, 0.35)
    mu_max: float = 0.4
    initial_foot: tuple[float, float] = (0.0, -0.1)
    initial_side: str = "right"
    swing_apex: float = 0.05
    velocity_profile: np.ndarray | None = None
    alternate_sides: bool = True

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.step_duration <= 0:
            raise ValueError("step_duration must be > 0")
        if self.foot_half_length <= 0 or self.foot_half_width <= 0:
            raise ValueError("foot dimensions must be > 0")
        if self.mu_max <= 0:
            raise ValueError("mu_max must be > 0")
        if self.initial_side not in ("left", "right"):
            raise ValueError("initial_side must be 'left' or 'right'")

    def samples_per_step(self, dt: float) -> int:
        k = int(round(self.step_duration / dt))
        if k < 1:
            raise QpError("step_duration shorter than one sample period")
        return k

    def horizon(self, dt: float) -> int:
        return self.n_steps * self.samples_per_step(dt)

    def step_side(self, i: int) -> str:
        """Side of decided footstep i (1-based); sides alternate from the start."""
        flip = i % 2 == 1
        if self.initial_side == "right":
            return "left" if flip else "right"
        return "right" if flip else "left"

    def lateral_bounds(self, i: int) -> tuple[float, float]:
        """Displacement bounds along y for decided step i (1-based)."""
        lo, hi = self.reach_y
        if not self.alternate_sides:
            return (-hi, hi)
        if self.step_side(i) == "left":
            return (lo, hi)
        return (-hi, -lo)

    def reference_velocity(self, dt: float) -> np.ndarray:
        """(N, 2) piecewise-constant velocity reference at the plan samples."""
        n = self.horizon(dt)
        if self.velocity_profile is not None:
            prof = np.asarray(self.velocity_profile, float)
            if prof.shape != (n, 2):
                raise QpError(
                    f"velocity_profile shape {prof.shape} != ({n}, 2)")
            return prof
        return np.tile(np.asarray(self.desired_velocity, float), (n, 1))


@dataclass
class QpProblem:
    """Condensed QP: minimize 0.5 x'Hx + q'x  s.t.  G x <= h.

    Carries the affine maps needed to reconstruct trajectories from a
    solution (``s_pos``/``s_vel``/``s_acc`` map jerks to states, ``e_foot``
    maps displacements to the per-sample active-foot position).
    """

    hessian: np.ndarray
    linear: np.ndarray
    ineq_matrix: np.ndarray
    ineq_bound: np.ndarray
    row_family: np.ndarray  # str label per inequality row
    n_samples: int
    n_steps: int
    dt: float
    s_pos: np.ndarray
    s_vel: np.ndarray
    s_acc: np.ndarray
    base: dict
    e_foot: np.ndarray
    ridge: float

    @property
    def dim(self) -> int:
        return self.hessian.shape[0]


@dataclass
class QpSolution:
    x: np.ndarray
    status: str  # optimal | max_iterations | infeasible
    duals: np.ndarray | None
    kkt: dict
    active_set: np.ndarray


def _jerk_maps(n: int, dt: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lower-triangular maps from jerks to acc/vel/pos at samples 1..N.

    Exact zero-order-hold: jerk i acts on [t_i, t_i + dt] and then
    propagates ballistically to the sample time.
    """
    k = np.arange(1, n + 1)[:, None]
    i = np.arange(n)[None, :]
    s = (k - 1 - i) * dt  # elapsed time after the jerk's own interval
    mask = i <= k - 1
    s_acc = np.where(mask, dt, 0.0)
    s_vel = np.where(mask, dt**2 / 2.0 + dt * s, 0.0)
    s_pos = np.where(mask, dt**3 / 6.0 + dt**2 / 2.0 * s + dt * s**2 / 2.0, 0.0)
    return s_pos, s_vel, s_acc


def _base_states(initial: ComState, n: int, dt: float):
    """Zero-jerk (ballistic) trajectories from the initial state, per axis."""
    t = np.arange(1, n + 1)[:, None] * dt
    p0 = np.asarray(initial.position, float)
    v0 = np.asarray(initial.velocity, float)
    a0 = np.asarray(initial.acceleration, float)
    pos = p0 + v0 * t + a0 * t**2 / 2.0
    vel = v0 + a0 * t
    acc = np.tile(a0, (n, 1))
    return pos, vel, acc


def _friction_faces() -> list[tuple[float, float, float]]:
    """(nx, ny, rhs_scale) half-planes bounding horizontal acceleration.

    Axis and diagonal faces state the published pyramid; the tilted faces
    are the inscribed octagon with vertices on the circle of radius
    mu_max * g, which keeps the Euclidean RCoF within mu_max.
    """
    faces = []
    for sx in (1.0, -1.0):
        faces.append((sx, 0.0, 1.0))
        faces.append((0.0, sx, 1.0))
    for sx in (1.0, -1.0):
        for sy in (1.0, -1.0):
            faces.append((sx, sy, SQRT2))
            faces.append((sx, sy * TILT, 1.0))
            faces.append((sx * TILT, sy, 1.0))
    return faces


def build_problem(task: GaitTask, weights: GaitWeights, initial: ComState,
                  params: LipmParams) -> QpProblem:
    """Assemble the condensed gait QP for the given task and weights."""
    dt = params.dt
    n = task.horizon(dt)
    if n < 1:
        raise QpError("empty horizon")
    k_per = task.samples_per_step(dt)
    ns = task.n_steps
    dim = 2 * n + 2 * ns

    s_pos, s_vel, s_acc = _jerk_maps(n, dt)
    pos0, vel0, acc0 = _base_states(initial, n, dt)
    hg = params.com_height / params.gravity
    s_zmp = s_pos - hg * s_acc
    zmp0 = pos0 - hg * acc0

    # step index per sample (0-based), active decided foot = index + 1
    step_idx = np.arange(n) // k_per
    # e_foot[k, j] = 1 if decided displacement j (0-based) contributes to the
    # active foot at sample k: foot_s = f0 + sum_{j <= s} u_j
    e_foot = (np.arange(ns)[None, :] <= step_idx[:, None]).astype(float)
    f0 = np.asarray(task.initial_foot, float)

    v_ref = task.reference_velocity(dt)

    hess = np.zeros((dim, dim))
    lin = np.zeros(dim)
    sl_j = [slice(0, n), slice(n, 2 * n)]          # jerk blocks per axis
    sl_u = [slice(2 * n, 2 * n + ns), slice(2 * n + ns, dim)]
    alphas = (weights.alpha_x, weights.alpha_y)
    betas = (weights.beta_x, weights.beta_y)
    gammas = (weights.gamma_x, weights.gamma_y)

    for ax in (0, 1):
        a_w, b_w, g_w = alphas[ax], betas[ax], gammas[ax]
        if a_w > 0:
            hess[sl_j[ax], sl_j[ax]] += 2.0 * a_w * (s_vel.T @ s_vel)
            lin[sl_j[ax]] += 2.0 * a_w * s_vel.T @ (vel0[:, ax] - v_ref[:, ax])
        if b_w > 0:
            # residual = (s_zmp j + zmp0) - (e_foot u + f0)
            m = np.concatenate([s_zmp, -e_foot], axis=1)
            const = zmp0[:, ax] - f0[ax]
            idx = np.r_[np.arange(sl_j[ax].start, sl_j[ax].stop),
                        np.arange(sl_u[ax].start, sl_u[ax].stop)]
            hess[np.ix_(idx, idx)] += 2.0 * b_w * (m.T @ m)
            lin[idx] += 2.0 * b_w * m.T @ const
        if g_w > 0:
            g2 = g_w / params.gravity**2
            hess[sl_j[ax], sl_j[ax]] += 2.0 * g2 * (s_acc.T @ s_acc)
            lin[sl_j[ax]] += 2.0 * g2 * s_acc.T @ acc0[:, ax]

    rows, rhs, fam = [], [], []
    mu_g = task.mu_max * params.gravity

    # friction pyramid on horizontal acceleration
    for nx, ny, scale in _friction_faces():
        block = np.zeros((n, dim))
        if nx:
            block[:, sl_j[0]] = nx * s_acc
        if ny:
            block[:, sl_j[1]] = ny * s_acc
        rows.append(block)
        rhs.append(scale * mu_g - nx * acc0[:, 0] - ny * acc0[:, 1])
        fam.extend(["friction"] * n)

    # ZMP inside the active support foot box (affine in the footstep vars)
    half = (task.foot_half_length, task.foot_half_width)
    for ax in (0, 1):
        for sgn in (1.0, -1.0):
            block = np.zeros((n, dim))
            block[:, sl_j[ax]] = sgn * s_zmp
            block[:, sl_u[ax]] = -sgn * e_foot
            rows.append(block)
            rhs.append(half[ax] - sgn * (zmp0[:, ax] - f0[ax]))
            fam.extend(["support_polygon"] * n)

    # reachable-area box on step displacements
    rx_lo, rx_hi = task.reach_x
    for i in range(ns):
        y_lo, y_hi = task.lateral_bounds(i + 1)
        for ax, (lo, hi) in ((0, (rx_lo, rx_hi)), (1, (y_lo, y_hi))):
            col = sl_u[ax].start + i
            for sgn, bound in ((1.0, hi), (-1.0, -lo)):
                row = np.zeros(dim)
                row[col] = sgn
                rows.append(row[None, :])
                rhs.append(np.array([bound]))
                fam.append("reachable_area")

    g_mat = np.vstack(rows)
    h_vec = np.concatenate(rhs)

    ridge = 0.0
    if _min_eig_estimate(hess) < 1e-10:
        ridge = 1e-9
        hess = hess + 2.0 * ridge * np.eye(dim)

    return QpProblem(
        hessian=hess, linear=lin, ineq_matrix=g_mat, ineq_bound=h_vec,
        row_family=np.array(fam), n_samples=n, n_steps=ns, dt=dt,
        s_pos=s_pos, s_vel=s_vel, s_acc=s_acc,
        base={"pos": pos0, "vel": vel0, "acc": acc0, "zmp": zmp0,
              "f0": f0, "step_idx": step_idx, "v_ref": v_ref},
        e_foot=e_foot, ridge=ridge,
    )


def _min_eig_estimate(hess: np.ndarray) -> float:
    if hess.shape[0] <= 800:
        return float(np.linalg.eigvalsh(hess)[0])
    return float(np.min(np.diag(hess)))


def _kkt_residuals(hess, lin, g_mat, h_vec, x, z) -> dict:
    grad = hess @ x + lin + g_mat.T @ z
    slack = h_vec - g_mat @ x
    return {
        "stationarity": float(np.max(np.abs(grad))),
        "primal": float(max(0.0, -np.min(slack, initial=0.0))),
        "complementarity": float(np.max(np.abs(z * slack), initial=0.0)),
        "dual": float(max(0.0, -np.min(z, initial=0.0))),
    }


def _polish(hess, lin, g_mat, h_vec, x, z, tol):
    """Active-set refinement: exact equality solve + nonnegative duals.

    Interior-point solutions carry O(tol) residuals; re-solving on the
    identified active set tightens them to near machine precision.
    """
    from scipy.optimize import nnls

    slack = h_vec - g_mat @ x
    zmax = max(1.0, float(np.max(z, initial=0.0)))
    active = np.flatnonzero((slack < 1e-6) | (z > 1e-6 * zmax))
    dim = hess.shape[0]
    ga = g_mat[active]
    kkt = np.block([[hess, ga.T], [ga, np.zeros((len(active), len(active)))]])
    rhs = np.concatenate([-lin, h_vec[active]])
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    x_new = sol[:dim]
    # duals: nonnegative least squares for stationarity
    lam, _ = nnls(ga.T, -(hess @ x_new + lin)) if len(active) else (np.zeros(0), 0.0)
    z_new = np.zeros_like(z)
    z_new[active] = lam
    return x_new, z_new, active


def solve_qp(problem: QpProblem, tolerance: float = 1e-8) -> QpSolution:
    """Solve the QP via interior point (cvxopt) plus active-set polish.

    The contract is the KKT residual bound, not the algorithm; residuals
    are recomputed independently of the solver's own reporting.
    """
    import cvxopt

    hess, lin = problem.hessian, problem.linear
    g_mat, h_vec = problem.ineq_matrix, problem.ineq_bound

    opts = {
        "show_progress": False,
        "abstol": min(tolerance, 1e-9),
        "reltol": min(tolerance, 1e-9),
        "feastol": min(tolerance, 1e-9),
        "maxiters": 200,
        "refinement": 2,
    }
    hess_reg = hess
    ridge = problem.ridge
    result = None
    for _ in range(6):
        try:
            result = cvxopt.solvers.qp(
                cvxopt.matrix(hess_reg), cvxopt.matrix(lin),
                cvxopt.matrix(g_mat), cvxopt.matrix(h_vec), options=opts)
            break
        except (ValueError, ZeroDivisionError, ArithmeticError):
            ridge = max(ridge * 10.0, 1e-9)
            hess_reg = hess + 2.0 * ridge * np.eye(problem.dim)
    if result is None:
        raise QpError("QP solver failed repeatedly despite regularization")

    status = result["status"]
    if status in ("primal infeasible", "dual infeasible"):
        return QpSolution(x=np.full(problem.dim, np.nan), status="infeasible",
                          duals=None, kkt={}, active_set=np.zeros(0, int))

    x = np.array(result["x"]).ravel()
    z = np.array(result["z"]).ravel()
    kkt = _kkt_residuals(hess_reg, lin, g_mat, h_vec, x, z)

    x_p, z_p, active = _polish(hess_reg, lin, g_mat, h_vec, x, z, tolerance)
    kkt_p = _kkt_residuals(hess_reg, lin, g_mat, h_vec, x_p, z_p)
    if (kkt_p["primal"] <= max(kkt["primal"], tolerance)
            and kkt_p["stationarity"] <= kkt["stationarity"]
            and kkt_p["complementarity"] <= max(kkt["complementarity"], tolerance)):
        x, z, kkt = x_p, z_p, kkt_p
    else:
        slack = h_vec - g_mat @ x
        zmax = max(1.0, float(np.max(z, initial=0.0)))
        active = np.flatnonzero((slack < 1e-6) | (z > 1e-6 * zmax))

    ok = (kkt["stationarity"] <= tolerance * max(1.0, np.linalg.norm(lin, np.inf))
          and kkt["primal"] <= tolerance
          and kkt["complementarity"] <= tolerance * max(1.0, abs(float(x @ (hess @ x)))))
    final = "optimal" if (status == "optimal" or ok) else "max_iterations"
    return QpSolution(x=x, status=final, duals=z, kkt=kkt, active_set=active)


@dataclass
class GaitPlan:
    """Time-sampled output of the gait QP plus swing trajectories."""

    times: np.ndarray            # (N,)
    com_pos: np.ndarray          # (N, 2)
    com_vel: np.ndarray          # (N, 2)
    com_acc: np.ndarray          # (N, 2)
    zmp: np.ndarray              # (N, 2)
    rcof: np.ndarray             # (N,)
    footsteps: np.ndarray        # (n_steps, 2) decided foot centers
    foot_index: np.ndarray       # (N,) active decided foot, 0-based
    initial_foot: np.ndarray     # (2,)
    initial_state: ComState
    v_ref: np.ndarray            # (N, 2)
    swings: list[SwingTrajectory] = field(default_factory=list)
    qp_cost: float = 0.0
    solve_status: str = "optimal"
    task: GaitTask | None = None
    params: LipmParams | None = None
    jerks: np.ndarray | None = None  # (N, 2)

    @property
    def n_samples(self) -> int:
        return len(self.times)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def foot_center(self, k: int) -> np.ndarray:
        return self.footsteps[self.foot_index[k]]

    def to_rows(self) -> list[dict]:
        """One dict per sample, the CSV schema of the plan export."""
        rows = []
        for k in range(self.n_samples):
            rows.append({
                "t": self.times[k],
                "c_x": self.com_pos[k, 0], "c_y": self.com_pos[k, 1],
                "cd_x": self.com_vel[k, 0], "cd_y": self.com_vel[k, 1],
                "cdd_x": self.com_acc[k, 0], "cdd_y": self.com_acc[k, 1],
                "z_x": self.zmp[k, 0], "z_y": self.zmp[k, 1],
                "rcof": self.rcof[k],
                "foot_id": int(self.foot_index[k]),
                "foot_x": self.foot_center(k)[0],
                "foot_y": self.foot_center(k)[1],
            })
        return rows

    def to_dict(self) -> dict:
        """Structured document for the simulator / JSON export."""
        return {
            "dt": self.dt,
            "qp_cost": self.qp_cost,
            "solve_status": self.solve_status,
            "initial_foot": self.initial_foot.tolist(),
            "footsteps": self.footsteps.tolist(),
            "samples": self.to_rows(),
        }


def plan_gait(task: GaitTask, weights: GaitWeights, initial: ComState,
              params: LipmParams, tolerance: float = 1e-8) -> GaitPlan:
    """Plan a gait: build, solve and reconstruct trajectories."""
    prob = build_problem(task, weights, initial, params)
    sol = solve_qp(prob, tolerance)
    if sol.status == "infeasible":
        raise QpError(_describe_infeasibility(prob))
    n, ns = prob.n_samples, prob.n_steps
    jx, jy = sol.x[:n], sol.x[n:2 * n]
    ux, uy = sol.x[2 * n:2 * n + ns], sol.x[2 * n + ns:]

    jerks = np.stack([jx, jy], axis=1)
    pos = prob.base["pos"] + np.stack([prob.s_pos @ jx, prob.s_pos @ jy], axis=1)
    vel = prob.base["vel"] + np.stack([prob.s_vel @ jx, prob.s_vel @ jy], axis=1)
    acc = prob.base["acc"] + np.stack([prob.s_acc @ jx, prob.s_acc @ jy], axis=1)
    hg = params.com_height / params.gravity
    zmp = pos - hg * acc
    rcof = np.linalg.norm(acc, axis=1) / params.gravity
    feet = prob.base["f0"] + np.cumsum(np.stack([ux, uy], axis=1), axis=0)
    times = np.arange(1, n + 1) * prob.dt

    foot_samples = feet[prob.base["step_idx"]]
    v_ref = prob.base["v_ref"]
    w = weights
    cost = (w.alpha_x * np.sum((vel[:, 0] - v_ref[:, 0])**2)
            + w.alpha_y * np.sum((vel[:, 1] - v_ref[:, 1])**2)
            + w.beta_x * np.sum((zmp[:, 0] - foot_samples[:, 0])**2)
            + w.beta_y * np.sum((zmp[:, 1] - foot_samples[:, 1])**2)
            + (w.gamma_x * np.sum(acc[:, 0]**2)
               + w.gamma_y * np.sum(acc[:, 1]**2)) / params.gravity**2)

    swings = _plan_swings(task, feet)
    return GaitPlan(
        times=times, com_pos=pos, com_vel=vel, com_acc=acc, zmp=zmp,
        rcof=rcof, footsteps=feet, foot_index=prob.base["step_idx"],
        initial_foot=prob.base["f0"].copy(), initial_state=initial,
        v_ref=v_ref, swings=swings, qp_cost=float(cost),
        solve_status=sol.status, task=task, params=params, jerks=jerks,
    )


def _plan_swings(task: GaitTask, feet: np.ndarray) -> list[SwingTrajectory]:
    """Swing of each step: the previous stance foot travels two steps ahead."""
    ns = len(feet)
    origins = np.vstack([np.asarray(task.initial_foot), feet[:-1]])
    swings = []
    for s in range(ns):
        start = origins[s]
        if s + 1 < ns:
            target = feet[s + 1]
        else:
            side = 1.0 if task.step_side(ns) == "right" else -1.0
            # park the swing foot beside the final stance at nominal width
            target = feet[-1] + np.array([0.0, side * 2 * task.reach_y[0]])
        swings.append(plan_swing(tuple(start), tuple(target),
                                 task.swing_apex, task.step_duration))
    return swings


def _describe_infeasibility(prob: QpProblem) -> str:
    fams = ", ".join(sorted(set(prob.row_family.tolist())))
    return ("gait QP infeasible; constraint families present: " + fams)


def verify_plan(plan: GaitPlan, tol: float = 1e-7) -> dict:
    """Independent feasibility check, re-integrating the jerks step by step.

    Uses the scalar propagate loop, not the solver's condensed matrices.
    Returns the worst violation per constraint family (negative = margin).
    """
    task, params = plan.task, plan.params
    state = plan.initial_state
    worst = {"support_polygon": -np.inf, "friction": -np.inf,
             "reachable_area": -np.inf, "reconstruction": 0.0}
    mu_g = task.mu_max * params.gravity
    for k in range(plan.n_samples):
        state = propagate(state, tuple(plan.jerks[k]), params)
        err = max(
            np.max(np.abs(np.asarray(state.position) - plan.com_pos[k])),
            np.max(np.abs(np.asarray(state.velocity) - plan.com_vel[k])),
            np.max(np.abs(np.asarray(state.acceleration) - plan.com_acc[k])),
        )
        worst["reconstruction"] = max(worst["reconstruction"], float(err))
        hg = params.com_height / params.gravity
        z = np.asarray(state.position) - hg * np.asarray(state.acceleration)
        foot = plan.foot_center(k)
        worst["support_polygon"] = max(
            worst["support_polygon"],
            float(abs(z[0] - foot[0]) - task.foot_half_length),
            float(abs(z[1] - foot[1]) - task.foot_half_width),
        )
        ax, ay = state.acceleration
        worst["friction"] = max(
            worst["friction"],
            abs(ax) - mu_g, abs(ay) - mu_g,
            abs(ax) + abs(ay) - SQRT2 * mu_g,
            math.hypot(ax, ay) - mu_g,
        )
    prev = plan.initial_foot
    for i, foot in enumerate(plan.footsteps):
        dx, dy = foot - prev
        y_lo, y_hi = task.lateral_bounds(i + 1)
        worst["reachable_area"] = max(
            worst["reachable_area"],
            dx - task.reach_x[1], task.reach_x[0] - dx,
            dy - y_hi, y_lo - dy,
        )
        prev = foot
    worst["feasible"] = all(worst[f] <= tol for f in
                            ("support_polygon", "friction", "reachable_area"))
    return worst
