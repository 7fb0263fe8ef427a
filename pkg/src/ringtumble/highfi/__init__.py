"""High-fidelity validator: the ring as 150 discrete elements on a single
6-DOF body with prescribed radial shape motion, penalty ground contact and
regularized stick-slip friction.

The per-step contact loop is the hot path; a compiled kernel is used when
available and a NumPy implementation otherwise. Set RINGTUMBLE_FORCE_PY=1
to force the fallback. Both backends perform the same operations in the
same order, so each is bitwise deterministic run to run.
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteState
from ..posture import polar_radius
from . import _core_py

if os.environ.get("RINGTUMBLE_FORCE_PY"):
    _core = _core_py
else:
    try:
        from . import _core  # type: ignore[attr-defined]
    except ImportError:
        _core = _core_py

MAX_STABLE_DT = 1e-4


def backend_name() -> str:
    """"compiled" when the extension kernel is active, else "python"."""
    return _core.BACKEND


def compiled_available() -> bool:
    try:
        from . import _core as ext  # noqa: F401
        return True
    except ImportError:
        return False


@dataclass(frozen=True)
class RingDiscretization:
    """Mirrored radial elements approximating the ring."""

    n: int = 150
    mass: float = 6.0
    half_thickness: float = 0.005

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValueError("element count must be even and at least 4")
        if not (self.mass > 0.0 and self.half_thickness > 0.0):
            raise ValueError("mass and half thickness must be positive")

    @property
    def element_mass(self) -> float:
        return self.mass / self.n

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n) / self.n


@dataclass(frozen=True)
class ContactParams:
    """Penalty-contact spring/damper and regularized friction parameters."""

    stiffness: float = 1e4
    damping: float = 1e3
    transition_width: float = 1e-3
    friction_mu: float = 5.0
    v_eps: float = 1e-3

    def __post_init__(self):
        for name in ("stiffness", "damping", "transition_width", "friction_mu", "v_eps"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class BodyState:
    """6-DOF state: center position, orientation quaternion (w, x, y, z),
    center velocity, body angular velocity. All slope-frame quantities."""

    p: np.ndarray
    q: np.ndarray
    v: np.ndarray
    omega_b: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.omega_b = np.asarray(self.omega_b, dtype=float)
        norm = math.sqrt(float(self.q @ self.q))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"quaternion norm {norm} (must be 1 within 1e-9)")
        if not all(np.all(np.isfinite(f)) for f in (self.p, self.q, self.v, self.omega_b)):
            raise ValueError("non-finite body state")

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.p, self.q, self.v, self.omega_b])

    @classmethod
    def from_array(cls, arr) -> "BodyState":
        arr = np.asarray(arr, dtype=float)
        return cls(p=arr[0:3], q=arr[3:7], v=arr[7:10], omega_b=arr[10:13])


def element_radius(a: float, b: float, theta):
    """Radial actuator extension placing an element on the ellipse at a
    body polar angle."""
    if min(a, b) < 1e-6:
        raise ValueError("degenerate shape")
    return polar_radius(a, b, theta)


def composite_inertia(disc: RingDiscretization, a: float, b: float) -> np.ndarray:
    """Inertia tensor of the discrete element set about the ring center.

    Symmetric positive definite; products of inertia vanish by the mirrored
    layout, so the tensor is diagonal up to roundoff.
    """
    th = disc.angles
    r = element_radius(a, b, th)
    x = r * np.cos(th)
    z = r * np.sin(th)
    m = disc.element_mass
    ixx = m * np.sum(z * z)
    izz = m * np.sum(x * x)
    iyy = m * np.sum(r * r)
    return np.diag([ixx, iyy, izz])


def contact_force(depth: float, depth_rate: float, params: ContactParams) -> float:
    """Normal penalty force: smoothstep(depth) * (k*depth + c*depth_rate),
    clamped to be non-adhesive. Zero for separated elements."""
    if depth <= 0.0:
        return 0.0
    u = min(depth / params.transition_width, 1.0)
    smooth = u * u * (3.0 - 2.0 * u)
    return max(smooth * (params.stiffness * depth + params.damping * depth_rate), 0.0)


def friction_force(f_n: float, v_t, params: ContactParams) -> np.ndarray:
    """Regularized stick-slip force opposing the tangential velocity, with
    magnitude mu*f_n*tanh(|v_t|/v_eps) (never exceeding mu*f_n)."""
    if f_n < 0.0:
        raise ValueError("normal force must be non-negative")
    v_t = np.asarray(v_t, dtype=float)
    speed = float(np.linalg.norm(v_t))
    if speed < 1e-12:
        return -params.friction_mu * f_n / params.v_eps * v_t
    return -params.friction_mu * f_n * math.tanh(speed / params.v_eps) / speed * v_t


def step(
    state: BodyState,
    shape: tuple[float, float, float, float],
    dt: float,
    disc: RingDiscretization,
    params: ContactParams,
    gravity_vector,
) -> BodyState:
    """One semi-implicit step of the 6-DOF system with prescribed shape
    motion (a, b, a_dot, b_dot). dt is capped by the contact stiffness
    stability bound."""
    if dt > MAX_STABLE_DT:
        raise ValueError(f"dt = {dt} exceeds the stability bound {MAX_STABLE_DT}")
    a, b, a_dot, b_dot = shape
    th = disc.angles
    new_state, _, _ = _core_py.step_arrays(
        state.as_array(), a, b, a_dot, b_dot, dt,
        np.cos(th), np.sin(th), disc.mass, disc.element_mass,
        disc.half_thickness, params.stiffness, params.damping,
        params.transition_width, params.friction_mu, params.v_eps,
        np.asarray(gravity_vector, dtype=float),
    )
    if not np.all(np.isfinite(new_state)):
        raise NonFiniteState(0)
    return BodyState.from_array(new_state)


def simulate(
    state0: BodyState,
    t0: float,
    dt: float,
    n_steps: int,
    shape_table: np.ndarray,
    disc: RingDiscretization,
    params: ContactParams,
    gravity_vector,
    record_every: int,
) -> np.ndarray:
    """Fixed-step run on the active backend.

    shape_table has n_steps + 1 rows of (a, b, a_dot, b_dot) at the step
    times. Returns the raw record array (rows of t, p, q, v, omega_b,
    f_n_total, inertia diag); n_steps must be a multiple of record_every.
    """
    if dt > MAX_STABLE_DT:
        raise ValueError(f"dt = {dt} exceeds the stability bound {MAX_STABLE_DT}")
    if n_steps % record_every:
        raise ValueError("n_steps must be a multiple of record_every")
    if shape_table.shape != (n_steps + 1, 4):
        raise ValueError("shape table must have n_steps + 1 rows of (a, b, da, db)")
    th = disc.angles
    n_rows = n_steps // record_every + 1
    out = np.empty((n_rows, _core_py.RECORD_COLS))
    status = _core.run_fixed(
        state0.as_array(), t0, dt, n_steps,
        np.ascontiguousarray(shape_table, dtype=float),
        np.ascontiguousarray(np.cos(th)), np.ascontiguousarray(np.sin(th)),
        disc.mass, disc.element_mass, disc.half_thickness,
        params.stiffness, params.damping, params.transition_width,
        params.friction_mu, params.v_eps,
        np.ascontiguousarray(gravity_vector, dtype=float),
        record_every, out,
    )
    if status >= 0:
        raise NonFiniteState(int(status))
    return out
