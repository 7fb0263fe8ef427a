"""Rolling subsystem: orientation kinematics, angular momentum with a
time-varying inertia triple, support-point geometry on the inclined plane,
the 8-state rolling ODE, and the ground-reaction observer.

Frames and angles
-----------------
Everything is expressed in the slope frame: x points downhill, y across the
slope, z along the plane normal; gravity is g*(sin(alpha), 0, -cos(alpha)).
The material orientation of the ring is

    R = R_z(theta) @ R_x(psi) @ R_y(phi)

with theta the yaw about the plane normal, psi the lean about the
(intermediate) downhill axis, and phi the material rolling angle. The
rolling angle grows without bound during tumbling; this angle sequence is
singular only when the ring lies flat (|psi| -> pi/2), far from any
operating condition.

Shape versus material
---------------------
The ring's joints hold the commanded ellipse fixed in the non-spinning
shape frame R_s = R_z(theta) R_x(psi): semi-axis a along the (horizontal)
lean axis, b along the in-plane axis tilted by psi from the plane normal.
The material circulates through that shape at the rolling rate phi_dot,
like a tank tread, so the center height b*cos(psi) never wobbles with the
spin phase; a rigidly spinning eccentric ring would hop off the ground at
tumbling rates. Material points keep fixed polar-angle labels (the radial
actuators sit on body-fixed rays), so circulation advances every material
polar angle at the common rate phi_dot, and the total angular momentum
takes the diagonal form

    H = I(a, b) @ (omega_shape + phi_dot * y_hat)

in shape coordinates. The material speed at the contact vertex is
b * phi_dot. For a circle this model coincides exactly with a rigidly
spinning ring; for eccentric shapes the actuators holding the shape
against the spin exchange energy with the motion, so mechanical energy is
conserved only for circular rigid runs.

State vector (8): [theta, psi, phi, theta_dot, psi_dot, phi_dot, pcx, pcy],
where (pcx, pcy) are the in-plane coordinates of the contact point.

Pure rolling slaves the center-of-mass velocity to the state: the material
point at the contact (including its circulation and radial-deformation
velocity) is at rest. The equations of motion come from the linear and
angular momentum balances about the center of mass with the contact force
eliminated against the once-differentiated rolling constraints.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateContact, SingularMassMatrix
from .posture import InertiaTriple

# state vector indices
THETA, PSI, PHI = 0, 1, 2
THETA_DOT, PSI_DOT, PHI_DOT = 3, 4, 5
PCX, PCY = 6, 7
STATE_SIZE = 8

_PLANE_ANGLE_FLOOR = 1e-6  # rad between ring plane and slope plane
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class SlopeGeometry:
    """Incline angle (rad) and gravitational acceleration."""

    alpha: float
    g: float = 9.81

    def __post_init__(self):
        if not (0.0 <= self.alpha < np.pi / 2.0):
            raise ValueError("incline angle must lie in [0, pi/2)")
        if not self.g > 0.0:
            raise ValueError("gravity must be positive")

    @property
    def gravity_vector(self) -> np.ndarray:
        return np.array(
            [self.g * math.sin(self.alpha), 0.0, -self.g * math.cos(self.alpha)]
        )


@dataclass(frozen=True)
class ShapeKinematics:
    """Semi-axes with their first and second time derivatives."""

    a: float
    b: float
    a_dot: float = 0.0
    b_dot: float = 0.0
    a_ddot: float = 0.0
    b_ddot: float = 0.0


@dataclass(frozen=True)
class GroundReaction:
    """Contact force on the ring in the slope frame and its normal part."""

    force: np.ndarray
    normal: float


def _cross(u, v):
    return np.array(
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    )


def rotation_matrix(theta: float, psi: float, phi: float) -> np.ndarray:
    """Material body-to-slope rotation R_z(theta) R_x(psi) R_y(phi);
    orthonormal with determinant +1."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    cf, sf = math.cos(phi), math.sin(phi)
    return np.array(
        [
            [ct * cf - st * sp * sf, -st * cp, ct * sf + st * sp * cf],
            [st * cf + ct * sp * sf, ct * cp, st * sf - ct * sp * cf],
            [-cp * sf, sp, cp * cf],
        ]
    )


def shape_frame_matrix(theta: float, psi: float) -> np.ndarray:
    """Shape-frame-to-slope rotation R_z(theta) R_x(psi): the non-spinning
    frame the commanded ellipse stays aligned with."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    return np.array(
        [
            [ct, -st * cp, st * sp],
            [st, ct * cp, -ct * sp],
            [0.0, sp, cp],
        ]
    )


def euler_rate_matrix(psi: float, phi: float) -> np.ndarray:
    """Matrix B with omega_body = B @ [theta_dot, psi_dot, phi_dot] for the
    material orientation chain.

    Determinant cos(psi): the map degenerates only when the ring lies flat.
    The yaw angle itself does not appear (the outer rotation never does).
    """
    cp, sp = math.cos(psi), math.sin(psi)
    cf, sf = math.cos(phi), math.sin(phi)
    return np.array(
        [
            [-cp * sf, cf, 0.0],
            [sp, 0.0, 1.0],
            [cp * cf, sf, 0.0],
        ]
    )


def body_angular_velocity(
    theta: float,
    psi: float,
    phi: float,
    theta_dot: float,
    psi_dot: float,
    phi_dot: float,
) -> np.ndarray:
    """Body-frame material angular velocity consistent with
    ``rotation_matrix``: skew(omega_b) = R^T dR/dt. Independent of yaw."""
    cp, sp = math.cos(psi), math.sin(psi)
    cf, sf = math.cos(phi), math.sin(phi)
    return np.array(
        [
            -theta_dot * cp * sf + psi_dot * cf,
            theta_dot * sp + phi_dot,
            theta_dot * cp * cf + psi_dot * sf,
        ]
    )


def euler_rates_from_omega(psi: float, phi: float, omega_b) -> np.ndarray:
    """Inverse of ``euler_rate_matrix`` in closed form."""
    cp, sp = math.cos(psi), math.sin(psi)
    cf, sf = math.cos(phi), math.sin(phi)
    wx, wy, wz = omega_b
    theta_dot = (wz * cf - wx * sf) / cp
    psi_dot = wx * cf + wz * sf
    phi_dot = wy - theta_dot * sp
    return np.array([theta_dot, psi_dot, phi_dot])


def shape_angular_velocity(psi: float, theta_dot: float, psi_dot: float) -> np.ndarray:
    """Angular velocity of the shape frame, in shape-frame components."""
    return np.array([psi_dot, theta_dot * math.sin(psi), theta_dot * math.cos(psi)])


def angular_momentum(omega_body: np.ndarray, inertia: InertiaTriple) -> np.ndarray:
    """H_b = diag(ixx, iyy, izz) @ omega_b."""
    return inertia.as_array() * np.asarray(omega_body, dtype=float)


def support_point(a: float, b: float, rot: np.ndarray):
    """Frame-local contact offset of the ellipse on the plane z = 0.

    ``rot`` maps the frame the ellipse is axis-aligned with (semi-axis a
    along x, b along z) to the slope frame. Returns (p_local, height): the
    support point minimizing slope-frame height over the ring, and the
    center height above the plane. Raises DegenerateContact when the ring
    plane is within 1e-6 rad of the slope plane.
    """
    n = rot.T @ np.array([0.0, 0.0, 1.0])
    if math.hypot(n[0], n[2]) < _PLANE_ANGLE_FLOOR:
        raise DegenerateContact("ring plane parallel to the slope plane")
    height = math.sqrt((a * n[0]) ** 2 + (b * n[2]) ** 2)
    p_local = np.array([-a * a * n[0] / height, 0.0, -b * b * n[2] / height])
    return p_local, height


class _Dynamics:
    """One full evaluation of the rolling dynamics at a state.

    Collects every intermediate quantity (orientation, contact geometry,
    slaved center-of-mass kinematics, accelerations, contact force) so the
    RHS, the ground-reaction observer, and the trace builder share a single
    assembly. All shape-frame 3-vectors live in shape coordinates.
    """

    def __init__(self, x, inertia, inertia_rate, shape, slope, props):
        x = np.asarray(x, dtype=float)
        theta, psi, phi = x[THETA], x[PSI], x[PHI]
        theta_dot, psi_dot, phi_dot = x[THETA_DOT], x[PSI_DOT], x[PHI_DOT]
        a, b = shape.a, shape.b
        m = props.mass
        cp, sp = math.cos(psi), math.sin(psi)
        if abs(cp) < _PLANE_ANGLE_FLOOR:
            raise DegenerateContact("ring plane parallel to the slope plane")

        R_s = shape_frame_matrix(theta, psi)
        omega_s = np.array([psi_dot, theta_dot * sp, theta_dot * cp])
        # d(omega_s)/dt minus the acceleration part B_s @ [th_dd, ps_dd]
        omega_s_dot_bias = np.array([0.0, theta_dot * psi_dot * cp,
                                     -theta_dot * psi_dot * sp])

        # contact pinned at the commanded ellipse's lower z-vertex
        p_c = np.array([0.0, 0.0, -b])
        p_c_dot = np.array([0.0, 0.0, -shape.b_dot])
        height = b * cp

        # material circulation sweeps the contact vertex at speed b*phi_dot
        v_circ = np.array([-b * phi_dot, 0.0, 0.0])
        v_def = p_c_dot

        W = _cross(omega_s, p_c) + v_def + v_circ
        v_cm = -(R_s @ W)

        g_shape = R_s.T @ slope.gravity_vector
        I_diag = inertia.as_array()
        I_rate = np.asarray(inertia_rate, dtype=float)
        omega_eff = omega_s + np.array([0.0, phi_dot, 0.0])
        H = I_diag * omega_eff

        # momentum-balance residual as a linear map of the unknown
        # accelerations u = (theta_ddot, psi_ddot, phi_ddot); the mass
        # matrix is assembled by evaluating the map on basis vectors
        def residual(u):
            omega_s_dot = np.array([u[1], u[0] * sp, u[0] * cp]) + omega_s_dot_bias
            omega_eff_dot = omega_s_dot + np.array([0.0, u[2], 0.0])
            v_circ_dot = np.array(
                [-(b * u[2] + shape.b_dot * phi_dot), 0.0, 0.0]
            )
            v_def_dot = np.array([0.0, 0.0, -shape.b_ddot])
            W_dot = (_cross(omega_s_dot, p_c) + _cross(omega_s, p_c_dot)
                     + v_def_dot + v_circ_dot)
            a_cm = -(_cross(omega_s, W) + W_dot)
            f_shape = m * (a_cm - g_shape)
            momentum_lhs = (
                I_diag * omega_eff_dot
                + I_rate * omega_eff
                + _cross(omega_s, H)
            )
            return momentum_lhs - _cross(p_c, f_shape)

        N = -residual(np.zeros(3))
        M = np.empty((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = 1.0
            M[:, j] = residual(e) + N

        self.M = M
        self.N = N
        self.R_shape = R_s
        self.omega_s = omega_s
        self.omega_s_dot_bias = omega_s_dot_bias
        self.omega_b = body_angular_velocity(theta, psi, phi,
                                             theta_dot, psi_dot, phi_dot)
        self.p_c = p_c
        self.p_c_dot = p_c_dot
        self.height = height
        self.v_def = v_def
        self.v_circ = v_circ
        self.W = W
        self.v_cm = v_cm
        self.g_shape = g_shape
        self.I_diag = I_diag
        self.m = m
        self.shape = shape
        self.perimeter = props.perimeter
        self.x = x
        self.contact_xy = x[PCX:PCY + 1]

    def solve(self) -> np.ndarray:
        cond = np.linalg.cond(self.M)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise SingularMassMatrix(f"mass matrix condition number {cond:.3e}")
        return np.linalg.solve(self.M, self.N)

    def rhs(self) -> np.ndarray:
        q_ddot = self.solve()
        # contact-point migration on the plane
        pc_dot = self.v_cm + self.R_shape @ (
            _cross(self.omega_s, self.p_c) + self.p_c_dot
        )
        out = np.empty(STATE_SIZE)
        out[THETA:PHI + 1] = self.x[THETA_DOT:PHI_DOT + 1]
        out[THETA_DOT:PHI_DOT + 1] = q_ddot
        out[PCX] = pc_dot[0]
        out[PCY] = pc_dot[1]
        return out

    def com_acceleration_shape(self, q_ddot: np.ndarray) -> np.ndarray:
        sp = math.sin(self.x[PSI])
        cp = math.cos(self.x[PSI])
        omega_s_dot = (np.array([q_ddot[1], q_ddot[0] * sp, q_ddot[0] * cp])
                       + self.omega_s_dot_bias)
        v_circ_dot = np.array(
            [-(self.shape.b * q_ddot[2] + self.shape.b_dot * self.x[PHI_DOT]),
             0.0, 0.0]
        )
        v_def_dot = np.array([0.0, 0.0, -self.shape.b_ddot])
        W_dot = (_cross(omega_s_dot, self.p_c) + _cross(self.omega_s, self.p_c_dot)
                 + v_def_dot + v_circ_dot)
        return -(_cross(self.omega_s, self.W) + W_dot)

    def contact_force(self, q_ddot: np.ndarray) -> GroundReaction:
        a_cm = self.com_acceleration_shape(q_ddot)
        f_shape = self.m * (a_cm - self.g_shape)
        f_slope = self.R_shape @ f_shape
        return GroundReaction(force=f_slope, normal=float(f_slope[2]))

    @property
    def com_position(self) -> np.ndarray:
        r_slope = self.R_shape @ self.p_c
        return np.array(
            [
                self.contact_xy[0] - r_slope[0],
                self.contact_xy[1] - r_slope[1],
                self.height,
            ]
        )

    def energy(self, slope: SlopeGeometry, circulation_inertia: float | None = None) -> float:
        """Kinetic plus gravitational potential energy (world vertical).

        Kinetic part: CoM translation, shape-frame rotation, material
        circulation (coefficient from the arc-density cube integral, which
        reduces to iyy for a circle), and their coupling. For eccentric
        shapes the actuators holding the shape exchange energy with the
        motion, so this is an invariant only for circular rigid runs.
        """
        if circulation_inertia is None:
            from .posture import RingProperties, ring_circulation_inertia

            circulation_inertia = ring_circulation_inertia(
                self.shape.a, self.shape.b,
                RingProperties(mass=self.m, perimeter=self.perimeter),
            )
        com = self.com_position
        height_world = com[2] * math.cos(slope.alpha) - com[0] * math.sin(slope.alpha)
        phi_dot = self.x[PHI_DOT]
        kinetic = (
            0.5 * self.m * float(self.v_cm @ self.v_cm)
            + 0.5 * float(self.omega_s @ (self.I_diag * self.omega_s))
            + self.omega_s[1] * self.I_diag[1] * phi_dot
            + 0.5 * circulation_inertia * phi_dot * phi_dot
        )
        return kinetic + self.m * slope.g * height_world


def evaluate_dynamics(
    x,
    inertia: InertiaTriple,
    inertia_rate,
    shape: ShapeKinematics,
    slope: SlopeGeometry,
    props,
) -> _Dynamics:
    """Assemble the mass matrix, forcing vector and all contact kinematics
    at one state; shared by the RHS and the observers."""
    return _Dynamics(x, inertia, inertia_rate, shape, slope, props)


def tumbling_rhs(
    x,
    inertia: InertiaTriple,
    inertia_rate,
    shape: ShapeKinematics,
    slope: SlopeGeometry,
    props,
) -> np.ndarray:
    """Time derivative of the 8-state rolling system, x_dot = M^-1 N.

    Assembled from the linear momentum balance, the angular momentum
    balance about the center of mass (with the inertia-rate and
    circulation terms), and the once-differentiated pure-rolling
    conditions, with the contact force eliminated.
    """
    return evaluate_dynamics(x, inertia, inertia_rate, shape, slope, props).rhs()


def ground_reaction(
    x,
    x_dot,
    inertia: InertiaTriple,
    inertia_rate,
    shape: ShapeKinematics,
    slope: SlopeGeometry,
    props,
) -> GroundReaction:
    """Contact force recovered from the accelerations implied by x_dot.

    A negative normal component is a valid return value; it is the signal
    consumed by the contact-loss event detector.
    """
    dyn = evaluate_dynamics(x, inertia, inertia_rate, shape, slope, props)
    q_ddot = np.asarray(x_dot, dtype=float)[THETA_DOT:PHI_DOT + 1]
    return dyn.contact_force(q_ddot)


def heading_series(vx, vy, min_speed: float = 1e-6) -> np.ndarray:
    """Heading angle (rad, unwrapped) of the in-plane velocity along a
    trace; holds the previous value while the speed is below min_speed."""
    vx = np.asarray(vx, dtype=float)
    vy = np.asarray(vy, dtype=float)
    raw = np.arctan2(vy, vx)
    speed = np.hypot(vx, vy)
    held = np.empty_like(raw)
    prev = 0.0
    for i in range(len(raw)):
        if speed[i] > min_speed:
            prev = raw[i]
        held[i] = prev
    return np.unwrap(held)


def initial_tumbling_state(
    theta: float = 0.0,
    psi: float = 0.0,
    phi: float = 0.0,
    theta_dot: float = 0.0,
    psi_dot: float = 0.0,
    phi_dot: float = 0.0,
    pcx: float = 0.0,
    pcy: float = 0.0,
) -> np.ndarray:
    return np.array([theta, psi, phi, theta_dot, psi_dot, phi_dot, pcx, pcy])
