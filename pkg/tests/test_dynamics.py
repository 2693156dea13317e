import math

import numpy as np
import pytest
from pydantic import ValidationError

from hydromonitor.sim.dynamics import (
    Domain,
    DomainParams,
    OUParams,
    VehicleState,
    ou_step,
    step_vehicle,
    wrap_angle,
)


@pytest.fixture
def slow_air():
    return DomainParams.air().model_copy(update={"tau_v": 0.5})


class TestStepVehicle:
    def test_velocity_lag(self, slow_air):
        nxt = step_vehicle(VehicleState(0.0, 0.0, 0.0), [1.0, 0.0], slow_air)
        assert nxt.v == pytest.approx(0.1, abs=1e-12)

    def test_zero_command_fixed_point(self):
        state = VehicleState(1.0, -2.0, 0.5)
        assert step_vehicle(state, [0.0, 0.0], DomainParams.air()) == state

    def test_heading_wraps(self):
        dom = DomainParams.air()
        nxt = step_vehicle(VehicleState(0.0, 0.0, 3.10, w=1.0), [0.0, 1.0], dom)
        assert nxt.w == pytest.approx(1.0)
        assert nxt.heading == pytest.approx(3.15 - 2 * math.pi, abs=1e-9)

    def test_commands_are_clamped(self):
        dom = DomainParams.air()
        state = VehicleState(0.0, 0.0, 0.0)
        for _ in range(400):
            state = step_vehicle(state, [5.0, -9.0], dom)
            assert 0.0 <= state.v <= dom.v_max
            assert abs(state.w) <= dom.w_max
            assert -math.pi < state.heading <= math.pi

    @pytest.mark.parametrize("domain", [Domain.AIR, Domain.WATER])
    def test_lag_converges_to_v_max(self, domain):
        dom = DomainParams.preset(domain)
        state = VehicleState(0.0, 0.0, 0.0)
        for _ in range(int(math.ceil(10 * dom.tau_v / dom.dt))):
            state = step_vehicle(state, [dom.v_max, 0.0], dom)
        assert state.v >= 0.99 * dom.v_max

    def test_disturbance_is_added(self):
        dom = DomainParams.air()
        nxt = step_vehicle(VehicleState(0.0, 0.0, 0.0), [0.0, 0.0], dom, disturbance=(0.2, -0.4))
        assert nxt.x == pytest.approx(0.2 * dom.dt)
        assert nxt.y == pytest.approx(-0.4 * dom.dt)

    def test_water_is_slower_than_air(self):
        assert DomainParams.water().tau_v > DomainParams.air().tau_v


class TestWrapAngle:
    @pytest.mark.parametrize("angle,expected", [
        (0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi), (7.0, 7.0 - 2 * math.pi),
    ])
    def test_values(self, angle, expected):
        assert wrap_angle(angle) == pytest.approx(expected)

    def test_in_range_angle_is_untouched(self):
        assert wrap_angle(1.234567) == 1.234567


class TestOU:
    def test_deterministic_decay(self):
        p = OUParams(theta=1.0, sigma=0.0)
        np.testing.assert_allclose(ou_step(np.array([1.0, 0.0]), p, 0.1, np.zeros(2)), [0.9, 0.0])

    def test_frozen_process(self):
        p = OUParams(theta=0.0, sigma=0.0)
        d = np.array([0.3, -0.2])
        np.testing.assert_array_equal(ou_step(d, p, 0.05, np.array([1.5, -0.7])), d)

    def test_mean_matches_drift(self):
        p = OUParams(theta=0.5, mu=(0.1, -0.1), sigma=0.05)
        d = np.array([1.0, 0.5])
        noise = np.random.default_rng(0).standard_normal((100_000, 2))
        samples = ou_step(np.broadcast_to(d, noise.shape), p, 0.05, noise)
        expected = d + p.theta * (np.array(p.mu) - d) * 0.05
        np.testing.assert_allclose(samples.mean(axis=0), expected, rtol=0.01)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValidationError):
            OUParams(sigma=-1.0)


def test_invalid_domain_params_rejected():
    with pytest.raises(ValidationError):
        DomainParams(dt=0.0)
