"""One-way coupling of the shape subsystem into the rolling subsystem.

The coupled system is integrated as a single augmented state

    X = [theta, psi, phi, theta_dot, psi_dot, phi_dot, pcx, pcy,
         x_pt, z_pt, r_pt, angle_pt, a, b]

so no interpolation is needed between the subsystems: the shape states
feed the inertia triple, its rate, and the contact geometry of the rolling
equations at every evaluation.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import posture, tumbling
from .posture import ControlInput, InertiaTriple, PostureState, RingProperties
from .tumbling import ShapeKinematics, SlopeGeometry

AUGMENTED_SIZE = tumbling.STATE_SIZE + 6
_A_IDX = tumbling.STATE_SIZE + 4
_B_IDX = tumbling.STATE_SIZE + 5


@dataclass(frozen=True)
class ShapeDrive:
    """Prescribed semi-axis signal b(t) and how the conjugate axis follows.

    mode "slaved": a(t) keeps the perimeter constant (u1 from the
    implicit-function derivative). mode "independent": a stays frozen and
    the perimeter is free to drift; a sensitivity mode only.
    """

    b_of_t: callable  # t -> (b, b_dot, b_ddot)
    mode: str = "slaved"

    def __post_init__(self):
        if self.mode not in ("slaved", "independent"):
            raise ValueError(f"unknown shape drive mode {self.mode!r}")


class CascadeModel:
    """Augmented posture + rolling dynamics for one scenario."""

    def __init__(
        self,
        props: RingProperties,
        slope: SlopeGeometry,
        drive: ShapeDrive | None = None,
        inertia_labels: str = "physical",
    ):
        self.props = props
        self.slope = slope
        self.drive = drive
        self.labels = inertia_labels
        self._frozen: tuple[InertiaTriple, float, float] | None = None

    def initial_state(self, b0: float, tumbling_state: np.ndarray) -> np.ndarray:
        a0 = posture.solve_conjugate_axis(self.props.perimeter, b0)
        pst = PostureState.from_axes(a0, b0, angle=0.0)
        if self.drive is None:
            self._frozen = (
                posture.ring_inertia(a0, b0, self.props, self.labels),
                a0,
                b0,
            )
        return np.concatenate([np.asarray(tumbling_state, dtype=float),
                               pst.as_array()])

    def shape_inputs(self, t: float, a: float, b: float):
        """(u1, u2, a_ddot, b_ddot) at time t for the current shape.

        The conjugate-axis acceleration is not part of the rolling
        equations (the contact sits on the b-vertex), so it is not
        computed here.
        """
        if self.drive is None:
            return 0.0, 0.0, 0.0, 0.0
        _, b_dot, b_ddot = self.drive.b_of_t(t)
        if self.drive.mode == "independent":
            return 0.0, b_dot, 0.0, b_ddot
        u1 = posture.slaved_axis_rate(a, b, b_dot)
        return u1, b_dot, 0.0, b_ddot

    def _coupling(self, t: float, a: float, b: float):
        """Inertia triple, its rate, and the shape kinematics at (t, a, b)."""
        if self._frozen is not None and self.drive is None:
            triple, a0, b0 = self._frozen
            return triple, np.zeros(3), ShapeKinematics(a=a0, b=b0)
        u1, u2, a_ddot, b_ddot = self.shape_inputs(t, a, b)
        triple = posture.ring_inertia(a, b, self.props, self.labels)
        rate = posture.ring_inertia_rate(a, b, u1, u2, self.props, self.labels)
        shape = ShapeKinematics(
            a=a, b=b, a_dot=u1, b_dot=u2, a_ddot=a_ddot, b_ddot=b_ddot
        )
        return triple, rate, shape

    def rhs(self, t: float, X: np.ndarray) -> np.ndarray:
        a, b = X[_A_IDX], X[_B_IDX]
        triple, rate, shape = self._coupling(t, a, b)
        x_dot = tumbling.tumbling_rhs(
            X[: tumbling.STATE_SIZE], triple, rate, shape, self.slope, self.props
        )
        pst = PostureState.from_array(X[tumbling.STATE_SIZE:])
        xi_dot = posture.posture_rhs(pst, ControlInput(shape.a_dot, shape.b_dot))
        return np.concatenate([x_dot, xi_dot])

    def dynamics_at(self, t: float, X: np.ndarray) -> tumbling._Dynamics:
        a, b = X[_A_IDX], X[_B_IDX]
        triple, rate, shape = self._coupling(t, a, b)
        return tumbling.evaluate_dynamics(
            X[: tumbling.STATE_SIZE], triple, rate, shape, self.slope, self.props
        )

    def normal_force(self, t: float, X: np.ndarray) -> float:
        dyn = self.dynamics_at(t, X)
        return dyn.contact_force(dyn.solve()).normal

    def inertia_triple(self, a: float, b: float) -> InertiaTriple:
        if self._frozen is not None and self.drive is None:
            return self._frozen[0]
        return posture.ring_inertia(a, b, self.props, self.labels)

    def energy(self, t: float, X: np.ndarray) -> float:
        return self.dynamics_at(t, X).energy(self.slope)
