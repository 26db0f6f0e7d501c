"""Shared test helpers: random gait tasks and independent QP oracle."""

import numpy as np

from gaittune.lipm import ComState, LipmParams
from gaittune.qp import GaitTask, GaitWeights


def random_gait_instance(seed: int, n_steps_max: int = 4):
    """A randomized but feasible gait task/weights/initial-state triple."""
    rng = np.random.default_rng(seed)
    side = str(rng.choice(["left", "right"]))
    task = GaitTask(
        desired_velocity=(float(rng.uniform(-0.3, 1.2)),
                          float(rng.uniform(-0.2, 0.2))),
        n_steps=int(rng.integers(2, n_steps_max + 1)),
        step_duration=float(rng.choice([0.6, 0.8, 1.0])),
        mu_max=float(rng.uniform(0.3, 0.6)),
        initial_side=side,
        initial_foot=(0.0, -0.1 if side == "right" else 0.1),
    )
    # CoM starts near the double-support center, the reachable spot for
    # either foot's first support polygon
    initial = ComState(
        position=(float(rng.uniform(-0.02, 0.02)),
                  float(rng.uniform(-0.02, 0.02))),
        velocity=(float(rng.uniform(-0.1, 0.3)), float(rng.uniform(-0.1, 0.1))),
        acceleration=(0.0, 0.0),
    )
    weights = GaitWeights.uniform(
        1.0, float(rng.uniform(0.0, 100.0)), float(rng.uniform(0.0, 100.0)))
    params = LipmParams(com_height=0.8, gravity=9.81, dt=0.1)
    return task, weights, initial, params


def dual_projected_gradient_qp(hess, lin, g_mat, h_vec, iters=200_000,
                               tol=1e-12):
    """First-order oracle for min 0.5 x'Hx + q'x s.t. Gx <= h (H PD).

    Projected gradient on the dual (z >= 0 is the only constraint, so the
    projection is a clip); completely independent of the package solver.
    """
    h_inv = np.linalg.inv(hess)
    a = g_mat @ h_inv @ g_mat.T
    b = g_mat @ h_inv @ lin + h_vec
    step = 1.0 / max(np.linalg.eigvalsh(a)[-1], 1e-12)
    z = np.zeros(len(h_vec))
    for _ in range(iters):
        grad = a @ z + b
        z_new = np.maximum(z - step * grad, 0.0)
        if np.max(np.abs(z_new - z)) < tol:
            z = z_new
            break
        z = z_new
    x = -h_inv @ (lin + g_mat.T @ z)
    return x, z
