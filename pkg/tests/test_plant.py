"""Reduced plant: contact clamps, pushes, sliding foot, fall detection."""

import numpy as np
import pytest

from gaittune.lipm import ComState, LipmParams
from gaittune.plant import (Disturbance, PlantCommand, PlantParams,
                            PlantState, active_push_force, simulate, step,
                            step_detailed)
from gaittune.qp import GaitTask, GaitWeights, plan_gait

MG = 41.0 * 9.81


def hover_state(y=0.0):
    return PlantState(position=np.array([0.0, y, 0.8]),
                      velocity=np.zeros(3),
                      stance_foot=np.array([0.0, y]))


def hover_command():
    return PlantCommand(np.array([0.0, 0.0, MG]), np.array([0.0, 0.0]))


class TestClamps:
    def test_hover_equilibrium(self):
        # [TRIVIAL] commanded force = m g e_z, no push -> state unchanged
        params = PlantParams()
        state = hover_state()
        out = step(state, hover_command(), params)
        np.testing.assert_allclose(out.position, state.position, atol=1e-12)
        np.testing.assert_allclose(out.velocity, 0.0, atol=1e-12)

    def test_friction_clamp_definition(self):
        # [TRIVIAL] tangential demand 0.5 f_z at mu=0.15 -> applied 0.15 f_z;
        # coupling disabled because this example isolates the friction cone
        params = PlantParams(mu_surface=0.15, couple_cop_to_force=False)
        cmd = PlantCommand(np.array([0.5 * MG, 0.0, MG]), np.array([0.0, 0.0]))
        _, info = step_detailed(hover_state(), cmd, params)
        assert info["mode"] == "slip"
        assert info["applied_force"][0] == pytest.approx(0.15 * MG, rel=1e-12)
        assert info["applied_force"][1] == 0.0
        assert info["saturated"]

    def test_negative_normal_force_clipped(self):
        params = PlantParams()
        cmd = PlantCommand(np.array([0.0, 0.0, -100.0]), np.array([0.0, 0.0]))
        _, info = step_detailed(hover_state(), cmd, params)
        assert info["applied_force"][2] == 0.0

    def test_cop_clipped_to_foot_box(self):
        params = PlantParams()
        cmd = PlantCommand(np.array([0.0, 0.0, MG]), np.array([0.5, -0.5]))
        _, info = step_detailed(hover_state(), cmd, params)
        np.testing.assert_allclose(info["cop"], [0.1, -0.05], atol=1e-12)

    def test_saturation_never_amplifies(self):
        rng = np.random.default_rng(0)
        params = PlantParams(mu_surface=0.3)
        for _ in range(50):
            f = np.array([rng.normal(0, 300), rng.normal(0, 300),
                          rng.uniform(-100, 1000)])
            cmd = PlantCommand(f, rng.normal(0, 0.2, 2))
            _, info = step_detailed(hover_state(), cmd, params)
            applied = info["applied_force"]
            assert np.linalg.norm(applied[:2]) <= np.linalg.norm(f[:2]) + 1e-9
            assert applied[2] >= 0.0

    def test_applied_tangential_within_cone(self):
        rng = np.random.default_rng(1)
        params = PlantParams(mu_surface=0.25)
        for _ in range(30):
            cmd = PlantCommand(np.array([rng.normal(0, 500),
                                         rng.normal(0, 500),
                                         rng.uniform(0, 800)]),
                               np.zeros(2))
            _, info = step_detailed(hover_state(), cmd, params)
            f = info["applied_force"]
            assert np.linalg.norm(f[:2]) <= 0.25 * f[2] + 1e-9

    def test_slip_transmission_monotone_in_mu(self):
        cmd = PlantCommand(np.array([0.4 * MG, 0.1 * MG, MG]), np.zeros(2))
        norms = []
        for mu in (0.05, 0.15, 0.3, 0.6):
            params = PlantParams(mu_surface=mu, couple_cop_to_force=False)
            _, info = step_detailed(hover_state(), cmd, params)
            norms.append(float(np.linalg.norm(info["applied_force"][:2])))
        assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))

    def test_tipover_coupling_limits_tangential(self):
        # with the CoM over the foot center, |f_t| <= f_z * half_extent / z_c
        params = PlantParams()  # coupling on
        cmd = PlantCommand(np.array([0.5 * MG, 0.0, MG]), np.zeros(2))
        _, info = step_detailed(hover_state(), cmd, params)
        f = info["applied_force"]
        assert f[0] == pytest.approx(MG * 0.1 / 0.8, rel=1e-9)


class TestPush:
    def test_impulse_velocity_change(self):
        # [DERIVED] 60 N lateral for 0.2 s on a 41 kg mass -> 0.2927 m/s.
        # Coupling is off: once the CoM drifts outside the foot box the
        # moment balance transmits extra tangential force, which is the
        # tip-over physics, not the impulse being tested here.
        params = PlantParams(couple_cop_to_force=False)
        push = [Disturbance(force=(0.0, 60.0, 0.0), start=0.0, end=0.2)]
        state = hover_state()
        n_active = 0
        for k in range(300):
            t = k * params.sim_dt
            n_active += active_push_force(push, t)[1] > 0.0
            state = step(state, hover_command(), params, push, t)
        assert state.velocity[1] == pytest.approx(
            n_active * 60.0 * params.sim_dt / 41.0, rel=1e-12)
        assert state.velocity[1] == pytest.approx(0.2927, abs=2e-3)

    def test_active_push_window(self):
        d = Disturbance(force=(1.0, 0.0, 0.0), start=1.0, end=2.0)
        assert active_push_force([d], 0.5)[0] == 0.0
        assert active_push_force([d], 1.0)[0] == 1.0
        assert active_push_force([d], 2.0)[0] == 0.0

    def test_disturbance_window_validated(self):
        with pytest.raises(ValueError):
            Disturbance(force=(0, 0, 0), start=1.0, end=1.0)


class TestEnergyAndSlide:
    def test_horizontal_velocity_constant_without_tangential_force(self):
        # [TRIVIAL] energy sanity: zero tangential command, zero push
        params = PlantParams()
        state = PlantState(position=np.array([0.0, 0.0, 0.8]),
                           velocity=np.array([0.3, -0.2, 0.0]),
                           stance_foot=np.zeros(2))
        for k in range(100):
            prev = state.velocity[:2].copy()
            state = step(state, PlantCommand(np.array([0.0, 0.0, MG]),
                                             state.position[:2].copy()),
                         params)
            np.testing.assert_allclose(state.velocity[:2], prev, atol=1e-12)

    def test_sliding_foot_moves_against_shortfall(self):
        params = PlantParams(mu_surface=0.1, couple_cop_to_force=False,
                             slip_damping=100.0)
        cmd = PlantCommand(np.array([0.5 * MG, 0.0, MG]), np.zeros(2))
        state, info = step_detailed(hover_state(), cmd, params)
        shortfall = (0.5 - 0.1) * MG
        expected_slide = shortfall / 100.0 * params.sim_dt
        assert info["slide"] == pytest.approx(expected_slide, rel=1e-9)
        # foot creeps opposite the untransmitted +x demand
        assert state.stance_foot[0] == pytest.approx(-expected_slide, rel=1e-9)

    def test_no_slide_when_sticking(self):
        params = PlantParams()
        state, info = step_detailed(hover_state(), hover_command(), params)
        assert info["slide"] == 0.0
        np.testing.assert_array_equal(state.stance_foot, [0.0, 0.0])


class _ConstantController:
    """Trivial controller handle for simulate()."""

    control_dt = 0.01

    def __init__(self, force):
        self.force = np.asarray(force, float)

    def command(self, t, state):
        return PlantCommand(self.force.copy(), state.stance_foot.copy())


def _standing_plan():
    task = GaitTask(desired_velocity=(0.0, 0.0), n_steps=2,
                    alternate_sides=False)
    initial = ComState((0.0, -0.1), (0.0, 0.0), (0.0, 0.0))
    return plan_gait(task, GaitWeights.uniform(1, 0, 0), initial,
                     LipmParams(dt=0.05))


class TestSimulate:
    def test_hover_controller_stands(self):
        plan = _standing_plan()
        trace = simulate(plan, _ConstantController([0.0, 0.0, MG]),
                         PlantParams())
        assert not trace.fell
        assert trace.final_height == pytest.approx(0.8, abs=1e-6)
        assert len(trace.times) == plan.n_samples

    def test_zero_force_falls_with_held_samples(self):
        plan = _standing_plan()
        trace = simulate(plan, _ConstantController([0.0, 0.0, 0.0]),
                         PlantParams())
        assert trace.fell
        assert trace.fall_time is not None
        # free fall to 0.6*0.8 = 0.48 m takes sqrt(2*0.32/g) ~ 0.26 s
        assert trace.fall_time == pytest.approx(0.26, abs=0.02)
        assert trace.final_height <= 0.6 * 0.8 + 1e-9
        # velocity samples after the fall hold the fall-time value
        k_fall = np.searchsorted(trace.times, trace.fall_time)
        tail = trace.com_vel[min(k_fall, len(trace.times) - 1):]
        assert np.ptp(tail, axis=0).max() <= 1e-12

    def test_trace_rows_schema(self):
        plan = _standing_plan()
        trace = simulate(plan, _ConstantController([0.0, 0.0, MG]),
                         PlantParams())
        rows = trace.to_rows()
        assert len(rows) == plan.n_samples
        assert {"t", "c_z", "cd_x", "f_z", "cop_x", "mode", "fell"} <= set(rows[0])

    def test_determinism(self):
        plan = _standing_plan()
        t1 = simulate(plan, _ConstantController([0.0, 0.0, MG]), PlantParams())
        t2 = simulate(plan, _ConstantController([0.0, 0.0, MG]), PlantParams())
        np.testing.assert_array_equal(t1.com_pos, t2.com_pos)
        np.testing.assert_array_equal(t1.com_vel, t2.com_vel)


class TestParamsValidation:
    @pytest.mark.parametrize("kwargs", [
        {"mass": 0.0}, {"sim_dt": 0.0}, {"mu_surface": -0.1}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PlantParams(**kwargs)

    def test_effective_mass(self):
        assert PlantParams(mass_scale=1.2).effective_mass == pytest.approx(
            41.0 * 1.2)
