"""Gait QP: problem assembly, solver correctness, plan-level orderings."""

import numpy as np
import pytest

from gaittune.lipm import ComState, LipmParams
from gaittune.qp import (GaitTask, GaitWeights, QpProblem, build_problem,
                         plan_gait, solve_qp, verify_plan)

from .util import dual_projected_gradient_qp, random_gait_instance

PARAMS = LipmParams(com_height=0.8, gravity=9.81, dt=0.1)
REST = ComState((0.0, 0.0), (0.0, 0.0), (0.0, 0.0))


def small_task(**kwargs) -> GaitTask:
    base = dict(desired_velocity=(1.0, 0.0), n_steps=2, step_duration=0.8)
    base.update(kwargs)
    return GaitTask(**base)


def toy_problem(hess, lin, g_mat, h_vec) -> QpProblem:
    """Wrap a hand-built QP in the problem container (no gait semantics)."""
    dim = len(lin)
    return QpProblem(
        hessian=np.asarray(hess, float), linear=np.asarray(lin, float),
        ineq_matrix=np.asarray(g_mat, float), ineq_bound=np.asarray(h_vec, float),
        row_family=np.array(["toy"] * len(h_vec)), n_samples=1, n_steps=1,
        dt=0.1, s_pos=np.zeros((1, 1)), s_vel=np.zeros((1, 1)),
        s_acc=np.zeros((1, 1)), base={}, e_foot=np.zeros((1, 1)), ridge=0.0)


class TestBuildProblem:
    def test_decision_dimension_example(self):
        # [DERIVED] n_steps=2, dt=0.1, T_step=0.8 -> 2*16 jerks + 2*2 feet = 36
        prob = build_problem(small_task(), GaitWeights.uniform(1, 1, 1),
                             REST, PARAMS)
        assert prob.dim == 36
        assert prob.n_samples == 16

    def test_zero_weight_hessian_blocks(self):
        # [TRIVIAL] weights (1,0,0): no beta/gamma quadratic contribution,
        # so the footstep block carries only the ridge regularizer
        prob = build_problem(small_task(), GaitWeights.uniform(1.0, 0.0, 0.0),
                             REST, PARAMS)
        n = prob.n_samples
        foot_block = prob.hessian[2 * n:, 2 * n:]
        np.testing.assert_allclose(
            foot_block, 2.0 * prob.ridge * np.eye(2 * prob.n_steps), atol=0.0)
        np.testing.assert_allclose(prob.hessian[:2 * n, 2 * n:], 0.0, atol=0.0)
        assert prob.ridge > 0.0  # singular without it

    def test_friction_rhs_example(self):
        # [DERIVED] mu_max=0.4, g=9.81 -> axis rows with RHS 3.924 m/s^2
        prob = build_problem(small_task(), GaitWeights.uniform(1, 0, 0),
                             REST, PARAMS)
        friction_rhs = prob.ineq_bound[prob.row_family == "friction"]
        assert np.min(friction_rhs) == pytest.approx(3.924, abs=1e-12)
        # diagonal faces scale by sqrt(2)
        assert np.max(friction_rhs) == pytest.approx(3.924 * np.sqrt(2.0),
                                                     abs=1e-12)

    def test_all_constraint_families_present(self):
        prob = build_problem(small_task(), GaitWeights.uniform(1, 1, 1),
                             REST, PARAMS)
        assert set(prob.row_family) == {"friction", "support_polygon",
                                       "reachable_area"}


class TestSolver:
    def test_1d_active_constraint(self):
        # [TRIVIAL] min x^2 s.t. x >= 1 -> x = 1
        prob = toy_problem([[2.0]], [0.0], [[-1.0]], [-1.0])
        sol = solve_qp(prob)
        assert sol.x[0] == pytest.approx(1.0, abs=1e-8)
        assert 0 in sol.active_set

    def test_1d_clamped_box(self):
        # [TRIVIAL] min (x-2)^2 s.t. 0 <= x <= 1 -> x = 1
        prob = toy_problem([[2.0]], [-4.0], [[1.0], [-1.0]], [1.0, 0.0])
        sol = solve_qp(prob)
        assert sol.x[0] == pytest.approx(1.0, abs=1e-8)

    def test_matches_projected_gradient_oracle(self):
        # [DERIVED] random 10-D PD QP, 5 inequalities, 1e-6 agreement
        rng = np.random.default_rng(0)
        for trial in range(5):
            m = rng.normal(size=(10, 10))
            hess = m @ m.T + 10.0 * np.eye(10)
            lin = rng.normal(size=10)
            g_mat = rng.normal(size=(5, 10))
            h_vec = rng.uniform(-0.5, 0.5, size=5)
            sol = solve_qp(toy_problem(hess, lin, g_mat, h_vec))
            x_ref, _ = dual_projected_gradient_qp(hess, lin, g_mat, h_vec)
            np.testing.assert_allclose(sol.x, x_ref, atol=1e-6)

    def test_kkt_residuals_on_gait_tasks(self):
        for seed in range(5):
            task, weights, initial, params = random_gait_instance(seed)
            prob = build_problem(task, weights, initial, params)
            sol = solve_qp(prob)
            assert sol.status == "optimal"
            assert sol.kkt["stationarity"] <= 1e-6 * max(
                1.0, np.linalg.norm(prob.linear, np.inf))
            assert sol.kkt["primal"] <= 1e-6
            assert sol.kkt["complementarity"] <= 1e-6 * max(
                1.0, abs(float(sol.x @ (prob.hessian @ sol.x))))
            assert sol.kkt["dual"] <= 1e-12


class TestPlanGait:
    def test_standing_is_optimal(self):
        # [TRIVIAL] rest over the foot center, velocity reference zero:
        # zero jerk is optimal, ZMP stays on the foot centers
        task = small_task(desired_velocity=(0.0, 0.0), alternate_sides=False)
        initial = ComState((0.0, -0.1), (0.0, 0.0), (0.0, 0.0))
        plan = plan_gait(task, GaitWeights.uniform(1.0, 0.0, 0.0), initial,
                         PARAMS)
        assert plan.qp_cost <= 1e-9
        foot = plan.footsteps[plan.foot_index]
        assert np.max(np.abs(plan.zmp - foot)) <= 1e-6

    def test_zmp_touches_boundary_without_beta(self):
        # [PAPER-shaped ordering] beta=gamma=0, v=1: ZMP rides the support
        # boundary (within 2 mm) somewhere along the plan
        plan = plan_gait(small_task(n_steps=4),
                         GaitWeights.uniform(1.0, 0.0, 0.0), REST, PARAMS)
        foot = plan.footsteps[plan.foot_index]
        margin = np.minimum(
            0.1 - np.abs(plan.zmp[:, 0] - foot[:, 0]),
            0.05 - np.abs(plan.zmp[:, 1] - foot[:, 1]))
        assert np.min(margin) <= 0.002

    def test_gamma_sweep_orderings(self):
        # [PAPER-shaped ordering] gamma 0 -> 30: max RCoF strictly decreases
        # and mean step length decreases
        task = small_task(n_steps=4)
        rcofs, steps = [], []
        for g in (0.0, 30.0):
            plan = plan_gait(task, GaitWeights.uniform(1.0, 0.0, g), REST,
                             PARAMS)
            rcofs.append(float(np.max(plan.rcof)))
            prev = np.vstack([plan.initial_foot, plan.footsteps[:-1]])
            steps.append(float(np.mean(np.abs(plan.footsteps[:, 0]
                                              - prev[:, 0]))))
        assert rcofs[1] < rcofs[0]
        assert steps[1] <= steps[0]

    def test_pareto_monotonicity_beta(self):
        # increasing beta never increases the ZMP-centering sum
        task = small_task(n_steps=3)
        sums = []
        for b in (0.0, 10.0, 70.0, 1000.0):
            plan = plan_gait(task, GaitWeights.uniform(1.0, b, 0.0), REST,
                             PARAMS)
            foot = plan.footsteps[plan.foot_index]
            sums.append(float(np.sum((plan.zmp - foot) ** 2)))
        assert all(a >= b - 1e-9 for a, b in zip(sums, sums[1:]))

    def test_pareto_monotonicity_gamma(self):
        # increasing gamma never increases the RCoF sum
        task = small_task(n_steps=3)
        sums = []
        for g in (0.0, 10.0, 30.0, 1000.0):
            plan = plan_gait(task, GaitWeights.uniform(1.0, 0.0, g), REST,
                             PARAMS)
            sums.append(float(np.sum(plan.rcof ** 2)))
        assert all(a >= b - 1e-9 for a, b in zip(sums, sums[1:]))

    def test_independent_feasibility_checker(self):
        # every returned plan passes the re-integrating verifier at 10x tol
        for seed in range(6):
            task, weights, initial, params = random_gait_instance(seed + 100)
            plan = plan_gait(task, weights, initial, params)
            report = verify_plan(plan, tol=1e-7)
            assert report["feasible"], report
            assert report["reconstruction"] <= 1e-8

    def test_determinism(self):
        task, weights, initial, params = random_gait_instance(7)
        p1 = plan_gait(task, weights, initial, params)
        p2 = plan_gait(task, weights, initial, params)
        np.testing.assert_array_equal(p1.com_pos, p2.com_pos)
        np.testing.assert_array_equal(p1.footsteps, p2.footsteps)
        np.testing.assert_array_equal(p1.jerks, p2.jerks)

    def test_swings_attached_and_consistent(self):
        plan = plan_gait(small_task(n_steps=3),
                         GaitWeights.uniform(1.0, 10.0, 0.0), REST, PARAMS)
        assert len(plan.swings) == 3
        for s, swing in enumerate(plan.swings[:-1]):
            # each swing lands where the next-but-one stance is planted
            np.testing.assert_allclose(
                swing.position(swing.duration)[:2], plan.footsteps[s + 1],
                atol=1e-9)

    def test_velocity_profile_shape_checked(self):
        task = small_task(velocity_profile=np.zeros((3, 2)))
        with pytest.raises(Exception):
            plan_gait(task, GaitWeights.uniform(1, 0, 0), REST, PARAMS)

    def test_invalid_weights_rejected(self):
        with pytest.raises(ValueError):
            GaitWeights(alpha_x=-1.0)
        with pytest.raises(ValueError):
            GaitWeights(beta_x=float("nan"))
