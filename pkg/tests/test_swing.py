"""Quintic swing-foot trajectories."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaittune.swing import plan_swing

coord = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False,
                  allow_infinity=False)


class TestExamples:
    def test_degenerate_swing_is_identically_zero(self):
        # [TRIVIAL] from=to=(0,0) -> horizontal polynomials identically zero
        traj = plan_swing((0.0, 0.0), (0.0, 0.0), apex=0.05, duration=0.8)
        t = np.linspace(0.0, 0.8, 101)
        pos = traj.position(t)
        np.testing.assert_allclose(pos[:, 0], 0.0, atol=1e-12)
        np.testing.assert_allclose(pos[:, 1], 0.0, atol=1e-12)

    def test_midpoint_is_halfway(self):
        # [TRIVIAL] symmetric boundary conditions -> midpoint (0+0.3)/2
        traj = plan_swing((0.0, 0.0), (0.3, 0.0), apex=0.05, duration=0.8)
        pos = traj.position(0.4)
        assert pos[0] == pytest.approx(0.15, abs=1e-12)

    def test_apex_exact_at_midtime(self):
        traj = plan_swing((0.0, 0.0), (0.3, 0.1), apex=0.07, duration=0.8)
        assert traj.position(0.4)[2] == pytest.approx(0.07, abs=1e-12)

    @pytest.mark.parametrize("kwargs", [
        {"apex": 0.0}, {"apex": -0.1}, {"duration": 0.0}])
    def test_invalid_arguments_rejected(self, kwargs):
        args = {"start": (0.0, 0.0), "end": (0.3, 0.0),
                "apex": 0.05, "duration": 0.8}
        args.update(kwargs)
        with pytest.raises(ValueError):
            plan_swing(**args)


class TestBoundaryConditions:
    @given(x0=coord, y0=coord, x1=coord, y1=coord,
           apex=st.floats(min_value=0.01, max_value=0.2),
           duration=st.floats(min_value=0.2, max_value=2.0))
    @settings(max_examples=50, deadline=None)
    def test_endpoints_and_rest_boundary(self, x0, y0, x1, y1, apex, duration):
        traj = plan_swing((x0, y0), (x1, y1), apex, duration)
        p0 = traj.position(0.0)
        p1 = traj.position(duration)
        np.testing.assert_allclose(p0, [x0, y0, 0.0], atol=1e-12)
        np.testing.assert_allclose(p1, [x1, y1, 0.0], atol=1e-12)
        v0 = traj.velocity(0.0)
        v1 = traj.velocity(duration)
        np.testing.assert_allclose(v0, 0.0, atol=1e-10)
        np.testing.assert_allclose(v1, 0.0, atol=1e-10)

    @given(apex=st.floats(min_value=0.01, max_value=0.2))
    @settings(max_examples=25, deadline=None)
    def test_max_height_equals_apex(self, apex):
        traj = plan_swing((0.0, 0.0), (0.4, 0.1), apex, duration=0.8)
        t = np.linspace(0.0, 0.8, 4001)
        z = traj.position(t)[:, 2]
        assert np.max(z) == pytest.approx(apex, abs=1e-9)
        assert np.min(z) >= -1e-9

    def test_clamped_outside_domain(self):
        traj = plan_swing((0.0, 0.0), (0.3, 0.0), apex=0.05, duration=0.8)
        np.testing.assert_allclose(traj.position(-1.0), traj.position(0.0),
                                   atol=0.0)
        np.testing.assert_allclose(traj.position(9.0), traj.position(0.8),
                                   atol=0.0)

    def test_velocity_matches_finite_difference(self):
        traj = plan_swing((0.0, 0.0), (0.35, 0.12), apex=0.06, duration=0.8)
        eps = 1e-6
        for t in (0.13, 0.31, 0.55, 0.71):
            fd = (traj.position(t + eps) - traj.position(t - eps)) / (2 * eps)
            np.testing.assert_allclose(traj.velocity(t), fd, atol=1e-6)
