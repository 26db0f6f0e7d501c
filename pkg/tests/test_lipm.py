"""LIPM kinematics: exact propagation, ZMP and required friction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaittune.lipm import ComState, LipmParams, ZmpPoint, propagate, rcof_of, zmp_of

PARAMS = LipmParams(com_height=0.8, gravity=9.81, dt=0.1)

# subnormals are excluded: |a|/g underflows to exactly 0.0 for
# |a| < ~2.5e-323, which breaks "RCoF zero iff static" at the float
# boundary without saying anything about the model
finite = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False,
                   allow_infinity=False, allow_subnormal=False)


def make_state(p=(0.0, 0.0), v=(0.0, 0.0), a=(0.0, 0.0)) -> ComState:
    return ComState(tuple(p), tuple(v), tuple(a))


# ---------------------------------------------------------------------------
# propagate
# ---------------------------------------------------------------------------

class TestPropagate:
    def test_zero_dynamics(self):
        # [TRIVIAL] state=(0,0,0), jerk=0, dt=0.1 -> (0,0,0)
        out = propagate(make_state(), (0.0, 0.0), PARAMS)
        assert out.as_array() == pytest.approx(np.zeros((3, 2)), abs=0.0)

    def test_constant_velocity(self):
        # [TRIVIAL] vel=1, jerk=0, dt=0.1 -> pos=0.1, vel=1, acc=0
        out = propagate(make_state(v=(1.0, 0.0)), (0.0, 0.0), PARAMS)
        assert out.position[0] == pytest.approx(0.1, abs=1e-15)
        assert out.velocity[0] == pytest.approx(1.0, abs=0.0)
        assert out.acceleration[0] == pytest.approx(0.0, abs=0.0)

    def test_unit_jerk_closed_form(self):
        # [DERIVED] state=0, jerk=6, dt=1 -> pos=1, vel=3, acc=6
        out = propagate(make_state(), (6.0, 6.0), PARAMS, dt=1.0)
        for ax in (0, 1):
            assert out.position[ax] == pytest.approx(1.0, abs=1e-14)
            assert out.velocity[ax] == pytest.approx(3.0, abs=1e-14)
            assert out.acceleration[ax] == pytest.approx(6.0, abs=1e-14)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            propagate(make_state(), (0.0, 0.0), PARAMS, dt=0.0)

    def test_rejects_nonfinite_jerk(self):
        with pytest.raises(ValueError):
            propagate(make_state(), (float("nan"), 0.0), PARAMS)

    @given(p=finite, v=finite, a=finite, j=finite,
           k=st.integers(min_value=1, max_value=8))
    @settings(max_examples=60, deadline=None)
    def test_composition_equals_one_big_step(self, p, v, a, j, k):
        # exactness: k steps of dt under constant jerk == one step of k*dt
        state0 = make_state((p, -p), (v, v), (a, 2 * a))
        jerk = (j, -j)
        state = state0
        for _ in range(k):
            state = propagate(state, jerk, PARAMS)
        big = propagate(state0, jerk, PARAMS, dt=k * PARAMS.dt)
        np.testing.assert_allclose(state.as_array(), big.as_array(),
                                   rtol=0.0, atol=1e-9)

    @given(v=finite, a=finite, j=finite)
    @settings(max_examples=40, deadline=None)
    def test_matches_polynomial_evaluation(self, v, a, j):
        # cubic-polynomial trajectory is reproduced exactly at the sample
        t = PARAMS.dt
        out = propagate(make_state((0, 0), (v, 0), (a, 0)), (j, 0.0), PARAMS)
        assert out.position[0] == pytest.approx(
            v * t + a * t**2 / 2 + j * t**3 / 6, rel=1e-13, abs=1e-13)


# ---------------------------------------------------------------------------
# zmp_of
# ---------------------------------------------------------------------------

class TestZmp:
    def test_static_equilibrium(self):
        z = zmp_of(make_state(), PARAMS)
        assert (z.z_x, z.z_y) == (0.0, 0.0)

    def test_zero_acceleration_is_identity(self):
        z = zmp_of(make_state(p=(0.1, 0.0)), PARAMS)
        assert z.z_x == pytest.approx(0.1, abs=0.0)
        assert z.z_y == pytest.approx(0.0, abs=0.0)

    def test_unit_acceleration_value(self):
        # [DERIVED] c=0, acc=(1,0), h=0.8, g=9.81 -> z_x = -0.8/9.81
        z = zmp_of(make_state(a=(1.0, 0.0)), PARAMS)
        assert z.z_x == pytest.approx(-0.8 / 9.81, abs=1e-12)
        assert z.z_x == pytest.approx(-0.08155, abs=5e-6)
        assert z.z_y == 0.0

    @given(p1=finite, a1=finite, p2=finite, a2=finite)
    @settings(max_examples=40, deadline=None)
    def test_affine_in_state(self, p1, a1, p2, a2):
        s1 = make_state(p=(p1, 0), a=(a1, 0))
        s2 = make_state(p=(p2, 0), a=(a2, 0))
        s12 = make_state(p=(p1 + p2, 0), a=(a1 + a2, 0))
        z1, z2, z12 = (zmp_of(s, PARAMS).as_array() for s in (s1, s2, s12))
        z0 = zmp_of(make_state(), PARAMS).as_array()
        np.testing.assert_allclose(z12, z1 + z2 - z0, rtol=0, atol=1e-10)

    @given(ax=finite, ay=finite)
    @settings(max_examples=40, deadline=None)
    def test_offset_magnitude(self, ax, ay):
        # ||z - c|| = (h/g) * ||acc||
        s = make_state(p=(0.3, -0.2), a=(ax, ay))
        z = zmp_of(s, PARAMS).as_array()
        offset = np.linalg.norm(z - np.array(s.position))
        expected = PARAMS.com_height / PARAMS.gravity * math.hypot(ax, ay)
        assert offset == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            ZmpPoint(float("inf"), 0.0)


# ---------------------------------------------------------------------------
# rcof_of
# ---------------------------------------------------------------------------

class TestRcof:
    def test_zero_acceleration(self):
        assert rcof_of(make_state(), PARAMS) == 0.0

    def test_gravity_acceleration_gives_one(self):
        assert rcof_of(make_state(a=(9.81, 0.0)), PARAMS) == pytest.approx(
            1.0, abs=1e-15)

    def test_three_four_five(self):
        # [DERIVED] acc=(3,4) -> mu = 5/9.81
        mu = rcof_of(make_state(a=(3.0, 4.0)), PARAMS)
        assert mu == pytest.approx(5.0 / 9.81, abs=1e-12)
        assert mu == pytest.approx(0.5097, abs=5e-5)

    @given(ax=finite, ay=finite)
    @settings(max_examples=40, deadline=None)
    def test_nonnegative_and_zero_iff_static(self, ax, ay):
        mu = rcof_of(make_state(a=(ax, ay)), PARAMS)
        assert mu >= 0.0
        assert (mu == 0.0) == (ax == 0.0 and ay == 0.0)


class TestParams:
    def test_omega_sq(self):
        assert PARAMS.omega_sq == pytest.approx(9.81 / 0.8, abs=1e-12)

    @pytest.mark.parametrize("kwargs", [
        {"com_height": 0.0}, {"gravity": -1.0}, {"dt": 0.0}])
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ValueError):
            LipmParams(**kwargs)
