"""Tests for the rolling subsystem: orientation kinematics, support-point
geometry, the assembled equations of motion, and the observers. Oracles:
finite differences along trajectories, the classical planar rolling-ring
closed form, energy conservation, and brute-force support-point search."""

import math

import numpy as np
import pytest

from ringtumble import tumbling
from ringtumble.cascade import CascadeModel, ShapeDrive
from ringtumble.errors import DegenerateContact, SingularMassMatrix
from ringtumble.ode import IntegratorConfig, integrate_adaptive
from ringtumble.posture import (
    InertiaTriple,
    RingProperties,
    polar_radius,
    ring_inertia,
    solve_conjugate_axis,
)
from ringtumble.tumbling import (
    PCX,
    PCY,
    PHI_DOT,
    PSI_DOT,
    THETA_DOT,
    GroundReaction,
    ShapeKinematics,
    SlopeGeometry,
    angular_momentum,
    body_angular_velocity,
    euler_rate_matrix,
    evaluate_dynamics,
    ground_reaction,
    heading_series,
    initial_tumbling_state,
    rotation_matrix,
    support_point,
    tumbling_rhs,
)

RNG = np.random.default_rng(42)
PROPS = RingProperties(mass=6.0, perimeter=1.6)
SLOPE_15 = SlopeGeometry(alpha=np.radians(15.0))
FLAT = SlopeGeometry(alpha=0.0)
R_CIRCLE = 1.6 / (2.0 * np.pi)


def circle_setup():
    shape = ShapeKinematics(a=R_CIRCLE, b=R_CIRCLE)
    triple = ring_inertia(R_CIRCLE, R_CIRCLE, PROPS)
    return shape, triple, np.zeros(3)


class TestRotationMatrix:
    def test_identity(self):
        assert rotation_matrix(0.0, 0.0, 0.0) == pytest.approx(np.eye(3))

    def test_pure_yaw_maps_x_to_y(self):
        R = rotation_matrix(np.pi / 2.0, 0.0, 0.0)
        assert R @ np.array([1.0, 0.0, 0.0]) == pytest.approx(
            np.array([0.0, 1.0, 0.0]), abs=1e-15
        )

    def test_orthonormal_proper_random(self):
        for _ in range(1000):
            th, ps, ph = RNG.uniform(-np.pi, np.pi, 3)
            R = rotation_matrix(th, ps, ph)
            assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-12
            assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)

    def test_pairs_with_body_angular_velocity(self):
        # finite differences of R along arbitrary angle paths must match
        # skew(R @ omega_b): validates the kinematic pairing
        for _ in range(25):
            th, ps, ph = RNG.uniform(-1.2, 1.2, 3)
            rates = RNG.uniform(-2.0, 2.0, 3)
            eps = 1e-7
            Rp = rotation_matrix(th + eps * rates[0], ps + eps * rates[1], ph + eps * rates[2])
            Rm = rotation_matrix(th - eps * rates[0], ps - eps * rates[1], ph - eps * rates[2])
            R_dot = (Rp - Rm) / (2.0 * eps)
            omega_b = body_angular_velocity(th, ps, ph, *rates)
            omega_s = rotation_matrix(th, ps, ph) @ omega_b
            skew = np.array(
                [
                    [0.0, -omega_s[2], omega_s[1]],
                    [omega_s[2], 0.0, -omega_s[0]],
                    [-omega_s[1], omega_s[0], 0.0],
                ]
            )
            R = rotation_matrix(th, ps, ph)
            assert np.max(np.abs(R_dot - skew @ R)) < 1e-6


class TestBodyAngularVelocity:
    def test_zero_rates(self):
        assert np.all(body_angular_velocity(0.3, 0.8, -0.4, 0.0, 0.0, 0.0) == 0.0)

    def test_pure_roll_rate(self):
        omega = body_angular_velocity(0.0, 0.0, 0.7, 0.0, 0.0, 3.0)
        assert omega == pytest.approx(np.array([0.0, 3.0, 0.0]))

    def test_aligned_frames_decompose(self):
        omega = body_angular_velocity(0.0, 0.0, 0.0, 1.0, 2.0, 3.0)
        assert omega == pytest.approx(np.array([2.0, 3.0, 1.0]))

    def test_matches_rate_matrix(self):
        for _ in range(20):
            th, ps, ph = RNG.uniform(-1.0, 1.0, 3)
            rates = RNG.uniform(-2.0, 2.0, 3)
            direct = body_angular_velocity(th, ps, ph, *rates)
            assert direct == pytest.approx(euler_rate_matrix(ps, ph) @ rates)

    def test_rate_matrix_determinant(self):
        for ps in (-1.2, 0.0, 0.4, 1.3):
            for ph in RNG.uniform(-np.pi, np.pi, 5):
                B = euler_rate_matrix(ps, ph)
                assert np.linalg.det(B) == pytest.approx(np.cos(ps), abs=1e-12)


class TestAngularMomentum:
    def test_zero_omega(self):
        triple = InertiaTriple(0.2, 0.4, 0.2)
        assert np.all(angular_momentum(np.zeros(3), triple) == 0.0)

    def test_circle_spin_value(self):
        triple = ring_inertia(R_CIRCLE, R_CIRCLE, PROPS)
        H = angular_momentum(np.array([0.0, 2.0 * np.pi, 0.0]), triple)
        assert H == pytest.approx([0.0, 2.0 * np.pi * 6.0 * R_CIRCLE**2, 0.0])

    def test_linearity(self):
        triple = InertiaTriple(0.19, 0.39, 0.2)
        w1 = np.array([0.1, -0.2, 0.3])
        w2 = np.array([1.0, 0.5, -0.7])
        assert angular_momentum(w1 + w2, triple) == pytest.approx(
            angular_momentum(w1, triple) + angular_momentum(w2, triple)
        )


class TestSupportPoint:
    def test_circle_distance(self):
        # center-to-contact distance is R for a circular ring at any
        # orientation (the center height is lower once the ring leans)
        for _ in range(20):
            R = rotation_matrix(*RNG.uniform(-1.0, 1.0, 3))
            p, h = support_point(R_CIRCLE, R_CIRCLE, R)
            assert np.linalg.norm(p) == pytest.approx(R_CIRCLE, rel=1e-12)
            assert h <= R_CIRCLE + 1e-12

    def test_aligned_frames(self):
        p, h = support_point(0.32, 0.21, np.eye(3))
        assert p == pytest.approx(np.array([0.0, 0.0, -0.21]))
        assert h == pytest.approx(0.21)

    def test_brute_force_lowest_point(self):
        thetas = np.linspace(0.0, 2.0 * np.pi, 10_000, endpoint=False)
        for _ in range(10):
            a, b = RNG.uniform(0.15, 0.38, 2)
            R = rotation_matrix(*RNG.uniform(-1.0, 1.0, 3))
            p, h = support_point(a, b, R)
            # support point lies on the ellipse
            assert p[0] ** 2 / a**2 + p[2] ** 2 / b**2 == pytest.approx(1.0, abs=1e-10)
            # no sampled ring point sits lower than the computed support
            r = polar_radius(a, b, thetas)
            pts = np.stack([r * np.cos(thetas), np.zeros_like(r), r * np.sin(thetas)])
            z = (R @ pts)[2]
            assert (R @ p)[2] <= z.min() + 1e-8
            assert (R @ p)[2] == pytest.approx(-h, rel=1e-12)

    def test_degenerate_contact(self):
        # lean the ring flat: psi = pi/2 puts the ring plane on the slope
        R = rotation_matrix(0.0, np.pi / 2.0, 0.0)
        with pytest.raises(DegenerateContact):
            support_point(0.3, 0.2, R)


class TestTumblingRhs:
    def test_zero_gravity_rest_is_equilibrium(self):
        shape, triple, rate = circle_setup()
        slope = SlopeGeometry(alpha=0.0, g=1e-300)
        x = initial_tumbling_state(psi=0.2, phi=0.9)
        out = tumbling_rhs(x, triple, rate, shape, slope, PROPS)
        assert np.max(np.abs(out)) < 1e-12

    def test_planar_rolling_acceleration_closed_form(self):
        shape, triple, rate = circle_setup()
        x0 = initial_tumbling_state()
        rhs = lambda t, x: tumbling_rhs(x, triple, rate, shape, SLOPE_15, PROPS)
        res = integrate_adaptive(rhs, x0, (0.0, 0.5))
        dyn = evaluate_dynamics(res.y[-1], triple, rate, shape, SLOPE_15, PROPS)
        expected = 9.81 * np.sin(np.radians(15.0)) / 2.0
        assert dyn.v_cm[0] / 0.5 == pytest.approx(expected, rel=0.005)
        assert abs(dyn.v_cm[1]) < 1e-12

    def test_planar_motion_stays_planar(self):
        # psi = psi_dot = 0 with an elliptical shape: lateral contact
        # coordinate must stay identically zero
        a0 = solve_conjugate_axis(1.6, 0.3)
        shape = ShapeKinematics(a=a0, b=0.3)
        triple = ring_inertia(a0, 0.3, PROPS)
        x0 = initial_tumbling_state(phi_dot=2.0 * np.pi)
        rhs = lambda t, x: tumbling_rhs(x, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        res = integrate_adaptive(rhs, x0, (0.0, 2.0))
        assert np.max(np.abs(res.y[:, PCY])) < 1e-9
        assert np.max(np.abs(res.y[:, tumbling.THETA])) < 1e-9
        assert np.max(np.abs(res.y[:, tumbling.PSI])) < 1e-9

    def test_energy_conserved_rigid_tumble(self):
        a0 = solve_conjugate_axis(1.6, 0.3)
        shape = ShapeKinematics(a=a0, b=0.3)
        triple = ring_inertia(a0, 0.3, PROPS)
        x0 = initial_tumbling_state(phi_dot=2.0 * np.pi, psi_dot=np.pi / 6.0)
        model_rhs = lambda t, x: tumbling_rhs(x, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        res = integrate_adaptive(model_rhs, x0, (0.0, 4.0))
        energies = [
            evaluate_dynamics(res.y[i], triple, np.zeros(3), shape, SLOPE_15, PROPS).energy(SLOPE_15)
            for i in range(0, len(res.t), 25)
        ]
        scale = max(abs(e) for e in energies)
        assert max(abs(e - energies[0]) for e in energies) / scale < 1e-5

    def test_rolling_constraint_holds_by_construction(self):
        # contact velocity reconstructed from (v_cm, omega, r) for rigid runs
        a0 = solve_conjugate_axis(1.6, 0.3)
        shape = ShapeKinematics(a=a0, b=0.3)
        triple = ring_inertia(a0, 0.3, PROPS)
        x0 = initial_tumbling_state(phi_dot=2.0 * np.pi, psi_dot=np.pi / 6.0)
        rhs = lambda t, x: tumbling_rhs(x, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        res = integrate_adaptive(rhs, x0, (0.0, 1.0))
        for i in range(0, len(res.t), 10):
            dyn = evaluate_dynamics(res.y[i], triple, np.zeros(3), shape, SLOPE_15, PROPS)
            omega_s = dyn.R @ dyn.omega_b
            r_s = dyn.R @ dyn.p_body
            v_contact = dyn.v_cm + np.cross(omega_s, r_s)
            assert np.linalg.norm(v_contact) < 1e-8

    def test_mirror_symmetry(self):
        a0 = solve_conjugate_axis(1.6, 0.3)
        shape = ShapeKinematics(a=a0, b=0.3)
        triple = ring_inertia(a0, 0.3, PROPS)
        res = {}
        for sign in (+1.0, -1.0):
            x0 = initial_tumbling_state(phi_dot=2.0 * np.pi, psi_dot=sign * np.pi / 6.0)
            rhs = lambda t, x: tumbling_rhs(x, triple, np.zeros(3), shape, SLOPE_15, PROPS)
            res[sign] = integrate_adaptive(rhs, x0, (0.0, 2.0)).y[-1]
        plus, minus = res[+1.0], res[-1.0]
        assert minus[PCY] == pytest.approx(-plus[PCY], abs=1e-6)
        assert minus[tumbling.THETA] == pytest.approx(-plus[tumbling.THETA], abs=1e-6)
        assert minus[tumbling.PSI] == pytest.approx(-plus[tumbling.PSI], abs=1e-6)
        assert minus[PCX] == pytest.approx(plus[PCX], abs=1e-6)

    def test_singular_mass_matrix_near_flat(self):
        shape, triple, rate = circle_setup()
        x = initial_tumbling_state(psi=np.pi / 2.0 - 1e-9, phi_dot=1.0)
        with pytest.raises((SingularMassMatrix, DegenerateContact)):
            tumbling_rhs(x, triple, rate, shape, SLOPE_15, PROPS)


class TestDerivativeAssembly:
    """Finite-difference validation of every analytic derivative feeding
    the acceleration-level constraint, including shape deformation."""

    def _drive(self, t):
        b = 0.3 + 0.02 * math.sin(3.0 * t)
        return b, 0.06 * math.cos(3.0 * t), -0.18 * math.sin(3.0 * t)

    def _model(self):
        return CascadeModel(PROPS, SLOPE_15, ShapeDrive(b_of_t=self._drive))

    def test_com_velocity_matches_position_derivative(self):
        # the slaved v_cm must be the true derivative of the computed CoM
        # position (including the height channel) along a deforming run
        model = self._model()
        X0 = model.initial_state(0.3, initial_tumbling_state(
            phi_dot=2.0 * np.pi, psi_dot=np.pi / 6.0))
        res = integrate_adaptive(model.rhs, X0, (0.0, 0.8))
        eps = 1e-6
        for t in (0.21, 0.43, 0.65):
            com_p = model.dynamics_at(t + eps, res(t + eps)).com_position
            com_m = model.dynamics_at(t - eps, res(t - eps)).com_position
            fd = (com_p - com_m) / (2.0 * eps)
            v = model.dynamics_at(t, res(t)).v_cm
            assert v == pytest.approx(fd, abs=2e-5)

    def test_material_contact_velocity_vanishes_while_deforming(self):
        model = self._model()
        X0 = model.initial_state(0.3, initial_tumbling_state(
            phi_dot=2.0 * np.pi, psi_dot=np.pi / 6.0))
        res = integrate_adaptive(model.rhs, X0, (0.0, 0.8))
        for t in np.linspace(0.05, 0.75, 15):
            dyn = model.dynamics_at(t, res(t))
            omega_s = dyn.R @ dyn.omega_b
            r_s = dyn.R @ dyn.p_body
            v_material = dyn.v_cm + np.cross(omega_s, r_s) + dyn.R @ dyn.v_def
            assert np.linalg.norm(v_material) < 1e-10

    def test_com_acceleration_matches_velocity_derivative(self):
        model = self._model()
        X0 = model.initial_state(0.3, initial_tumbling_state(
            phi_dot=2.0 * np.pi, psi_dot=np.pi / 6.0))
        res = integrate_adaptive(model.rhs, X0, (0.0, 0.8))
        eps = 1e-6
        for t in (0.2, 0.5):
            v_p = model.dynamics_at(t + eps, res(t + eps)).v_cm
            v_m = model.dynamics_at(t - eps, res(t - eps)).v_cm
            fd = (v_p - v_m) / (2.0 * eps)
            dyn = model.dynamics_at(t, res(t))
            acc = dyn.com_acceleration_body(dyn.solve())
            assert dyn.R @ acc == pytest.approx(fd, abs=2e-4)

    def test_support_point_rate_matches_finite_difference(self):
        model = self._model()
        X0 = model.initial_state(0.3, initial_tumbling_state(
            phi_dot=2.0 * np.pi, psi_dot=np.pi / 6.0))
        res = integrate_adaptive(model.rhs, X0, (0.0, 0.5))
        eps = 1e-6
        for t in (0.1, 0.3):
            dyn = model.dynamics_at(t, res(t))
            p_p = model.dynamics_at(t + eps, res(t + eps)).p_body
            p_m = model.dynamics_at(t - eps, res(t - eps)).p_body
            fd = (p_p - p_m) / (2.0 * eps)
            # body-frame support rate = total minus frame rotation part
            total = dyn.p_body_dot
            assert total == pytest.approx(fd, abs=2e-5)

    def test_contact_point_migration_matches_state_derivative(self):
        model = self._model()
        X0 = model.initial_state(0.3, initial_tumbling_state(
            phi_dot=2.0 * np.pi, psi_dot=np.pi / 6.0))
        res = integrate_adaptive(model.rhs, X0, (0.0, 0.5))
        eps = 1e-6
        for t in (0.15, 0.35):
            fd = (res(t + eps)[[PCX, PCY]] - res(t - eps)[[PCX, PCY]]) / (2.0 * eps)
            rhs_val = model.rhs(t, res(t))
            assert rhs_val[[PCX, PCY]] == pytest.approx(fd, abs=2e-5)


class TestGroundReaction:
    def test_rest_on_flat_ground(self):
        shape, triple, _ = circle_setup()
        x = initial_tumbling_state()
        x_dot = tumbling_rhs(x, triple, np.zeros(3), shape, FLAT, PROPS)
        grf = ground_reaction(x, x_dot, triple, np.zeros(3), shape, FLAT, PROPS)
        assert grf.normal == pytest.approx(6.0 * 9.81, rel=1e-12)

    def test_steady_planar_rolling_on_slope(self):
        shape, triple, _ = circle_setup()
        x = initial_tumbling_state(phi_dot=4.0)
        x_dot = tumbling_rhs(x, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        grf = ground_reaction(x, x_dot, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        assert grf.normal == pytest.approx(
            6.0 * 9.81 * np.cos(np.radians(15.0)), rel=1e-12
        )

    def test_normal_is_z_component(self):
        shape, triple, _ = circle_setup()
        x = initial_tumbling_state(phi_dot=3.0, psi_dot=0.5)
        x_dot = tumbling_rhs(x, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        grf = ground_reaction(x, x_dot, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        assert grf.normal == grf.force[2]

    def test_negative_normal_reported_not_raised(self):
        # an artificial state with violent downward acceleration: the
        # observer must report the negative value rather than fail
        shape, triple, _ = circle_setup()
        x = initial_tumbling_state(psi=0.9, psi_dot=25.0, phi_dot=1.0)
        x_dot = tumbling_rhs(x, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        grf = ground_reaction(x, x_dot, triple, np.zeros(3), shape, SLOPE_15, PROPS)
        assert isinstance(grf, GroundReaction)
        assert np.isfinite(grf.normal)


class TestHeading:
    def test_straight_downhill(self):
        vx = np.ones(10)
        vy = np.zeros(10)
        assert np.all(heading_series(vx, vy) == 0.0)

    def test_pure_cross_slope(self):
        n = 5
        assert heading_series(np.zeros(n), np.ones(n)) == pytest.approx(
            np.full(n, np.pi / 2.0)
        )
        assert heading_series(np.zeros(n), -np.ones(n)) == pytest.approx(
            np.full(n, -np.pi / 2.0)
        )

    def test_diagonal(self):
        assert heading_series(np.ones(3), np.ones(3)) == pytest.approx(
            np.full(3, np.pi / 4.0)
        )

    def test_holds_previous_below_speed_floor(self):
        vx = np.array([1.0, 1e-9, 1e-9, 1.0])
        vy = np.array([1.0, 0.0, 0.0, -1.0])
        h = heading_series(vx, vy)
        assert h[1] == h[0] and h[2] == h[0]

    def test_unwrapped(self):
        t = np.linspace(0.0, 4.0 * np.pi, 200)
        h = heading_series(np.cos(t), np.sin(t))
        assert h[-1] == pytest.approx(4.0 * np.pi, abs=1e-6)
