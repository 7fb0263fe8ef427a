"""Posture subsystem: ellipse geometry under a fixed perimeter and the
inertia output map.

The ring is a thin uniform loop of mass ``m`` and constant perimeter ``P``
lying in the body x-z plane, with semi-axis ``a`` along x and ``b`` along z.
Shape inputs are the axis rates ``u1 = da/dt`` and ``u2 = db/dt``; in the
fixed-perimeter mode ``u1`` is slaved to ``u2`` so the perimeter is an
invariant of the flow.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DegenerateEllipse, Infeasible

# Semi-axes below this are treated as a degenerate (collapsed) ellipse.
AXIS_FLOOR = 1e-6


@dataclass(frozen=True)
class RingProperties:
    """Mass and perimeter of the ring; constant over a scenario."""

    mass: float = 6.0
    perimeter: float = 1.6

    def __post_init__(self):
        if not (self.mass > 0.0 and self.perimeter > 0.0):
            raise ValueError("mass and perimeter must be positive")


@dataclass
class PostureState:
    """Hidden state of the shape subsystem.

    Attributes:
        x: x-coordinate of the tracked ring point (m)
        z: z-coordinate of the tracked ring point (m)
        r: polar radius of the tracked point (m)
        angle: polar angle of the tracked point (rad); a material label
        a: semi-axis along body x (m)
        b: semi-axis along body z (m)
    """

    x: float
    z: float
    r: float
    angle: float
    a: float
    b: float

    @classmethod
    def from_axes(cls, a: float, b: float, angle: float = 0.0) -> "PostureState":
        """Build a consistent state for the point at the given polar angle."""
        r = polar_radius(a, b, angle)
        return cls(x=r * np.cos(angle), z=r * np.sin(angle), r=r, angle=angle, a=a, b=b)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.z, self.r, self.angle, self.a, self.b])

    @classmethod
    def from_array(cls, xi) -> "PostureState":
        x, z, r, angle, a, b = (float(v) for v in xi)
        return cls(x=x, z=z, r=r, angle=angle, a=a, b=b)

    def validate(self, perimeter: float | None = None, tol: float = 1e-8) -> None:
        """Check ellipse membership, polar consistency and feasibility."""
        if not (self.a > 0.0 and self.b > 0.0 and self.r > 0.0):
            raise ValueError("semi-axes and polar radius must be positive")
        member = self.x**2 / self.a**2 + self.z**2 / self.b**2 - 1.0
        if abs(member) > tol:
            raise ValueError(f"point off the ellipse (residual {member:.3e})")
        if abs(self.x - self.r * np.cos(self.angle)) > tol or abs(
            self.z - self.r * np.sin(self.angle)
        ) > tol:
            raise ValueError("polar coordinates inconsistent with (x, z)")
        if perimeter is not None and 4.0 * max(self.a, self.b) > perimeter:
            raise Infeasible(
                f"semi-axis {max(self.a, self.b):.4f} m exceeds the degenerate "
                f"bound P/4 = {perimeter / 4.0:.4f} m"
            )


@dataclass(frozen=True)
class ControlInput:
    """Axis rates (u1, u2) = (da/dt, db/dt) in m/s."""

    u1: float
    u2: float


@dataclass(frozen=True)
class InertiaTriple:
    """Mass moments of inertia about the body axes (kg m^2).

    For a loop in the x-z plane the out-of-plane moment satisfies
    ``iyy = ixx + izz`` (perpendicular-axis identity).
    """

    ixx: float
    iyy: float
    izz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.ixx, self.iyy, self.izz])


def arc_length_density(angle, a, b):
    """Arc-length density sqrt(a^2 cos^2 + b^2 sin^2) of the ellipse at a
    polar angle. Strictly positive and pi-periodic. Accepts arrays."""
    angle = np.asarray(angle, dtype=float)
    if not (np.all(np.isfinite(angle)) and np.isfinite(a) and np.isfinite(b)):
        raise ValueError("non-finite input")
    if not (a > 0.0 and b > 0.0):
        raise ValueError("semi-axes must be positive")
    c = np.cos(angle)
    s = np.sin(angle)
    out = np.sqrt(a * a * c * c + b * b * s * s)
    return float(out) if out.ndim == 0 else out


def polar_radius(a, b, angle):
    """Polar radius of the ellipse: a*b / sqrt(b^2 cos^2 + a^2 sin^2)."""
    c = np.cos(angle)
    s = np.sin(angle)
    return a * b / np.sqrt(b * b * c * c + a * a * s * s)


def perimeter(a: float, b: float) -> float:
    """Ellipse perimeter, exact to machine precision.

    Equals the full-turn integral of ``arc_length_density``; evaluated
    through the complete elliptic integral of the second kind, which the
    test suite cross-checks against adaptive quadrature of the integrand.
    """
    if not (np.isfinite(a) and np.isfinite(b)) or a < 0.0 or b < 0.0 or a == b == 0.0:
        raise ValueError("semi-axes must be non-negative, finite, not both zero")
    hi, lo = (a, b) if a >= b else (b, a)
    m = 1.0 - (lo / hi) ** 2
    return 4.0 * hi * float(special.ellipe(m))


_GRID_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _trig_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        return _GRID_CACHE[n]
    except KeyError:
        theta = np.arange(n) * (2.0 * np.pi / n)
        pair = (np.cos(theta), np.sin(theta))
        _GRID_CACHE[n] = pair
        return pair


def _ellipse_integrals(a: float, b: float, rtol: float = 1e-12):
    """Full-turn integrals over the ellipse used by the inertia map and the
    perimeter partial derivatives, all on one shared polar-angle grid.

    Mass is uniform per unit arc length, so the second moments use the
    polar arc density sqrt(r^2 + (dr/dtheta)^2). The perimeter partials
    use the trig-parameter density (the full-turn integral value is the
    same perimeter function either way).

    Uses the periodic trapezoid rule with grid doubling until every
    integral is converged; for these smooth periodic integrands
    convergence is geometric, so the loop terminates after a few
    doublings.

    Returns a dict with keys:
        perimeter, p_a, p_b, p_aa, p_ab, p_bb  (perimeter and its partials)
        ixx_int, iyy_int, izz_int              (second moments times P/m)
        circ_int                               (arc-density cube integral)
    """
    if min(a, b) < AXIS_FLOOR:
        raise DegenerateEllipse(f"semi-axis below {AXIS_FLOOR} m: a={a}, b={b}")

    def evaluate(n: int) -> np.ndarray:
        c, s = _trig_grid(n)
        c2 = c * c
        s2 = s * s
        gam = np.sqrt(a * a * c2 + b * b * s2)
        inv = 1.0 / gam
        inv3 = inv / (gam * gam)
        D = b * b * c2 + a * a * s2
        r2 = (a * b) ** 2 / D
        r_th = -a * b * (a * a - b * b) * c * s / (D * np.sqrt(D))
        arc = np.sqrt(r2 + r_th * r_th)
        w = 2.0 * np.pi / n
        vals = np.array(
            [
                gam.sum(),
                (a * c2 * inv).sum(),
                (b * s2 * inv).sum(),
                (b * b * c2 * s2 * inv3).sum(),
                (-a * b * c2 * s2 * inv3).sum(),
                (a * a * c2 * s2 * inv3).sum(),
                (r2 * s2 * arc).sum(),  # integrand of the x-axis moment (z^2)
                (r2 * arc).sum(),
                (r2 * c2 * arc).sum(),  # integrand of the z-axis moment (x^2)
                (arc * arc * arc).sum(),
            ]
        )
        return w * vals

    n = 64
    prev = evaluate(n)
    while n <= 8192:
        n *= 2
        cur = evaluate(n)
        scale = np.maximum(np.abs(cur), 1e-300)
        if np.all(np.abs(cur - prev) <= rtol * scale + 1e-15):
            prev = cur
            break
        prev = cur
    keys = ("perimeter", "p_a", "p_b", "p_aa", "p_ab", "p_bb",
            "ixx_int", "iyy_int", "izz_int", "circ_int")
    return dict(zip(keys, prev))


def solve_conjugate_axis(target_perimeter: float, b: float) -> float:
    """Semi-axis ``a`` such that perimeter(a, b) equals the target.

    The map a -> perimeter(a, b) is strictly increasing, so the root is
    unique. Raises Infeasible when 4*b >= P (no ellipse with semi-axis b
    can have so short a perimeter).
    """
    from scipy import optimize

    if not (target_perimeter > 0.0 and b > 0.0):
        raise ValueError("perimeter and semi-axis must be positive")
    if 4.0 * b >= target_perimeter:
        raise Infeasible(
            f"semi-axis b = {b} m needs perimeter > 4b = {4.0 * b} m, "
            f"got P = {target_perimeter} m"
        )
    hi = target_perimeter / 4.0
    a = optimize.brentq(
        lambda x: perimeter(x, b) - target_perimeter, 0.0, hi, xtol=1e-15, rtol=8.9e-16
    )
    residual = abs(perimeter(a, b) - target_perimeter)
    if residual > 1e-9 * target_perimeter:
        raise RuntimeError(f"root refinement stalled (residual {residual:.3e})")
    return float(a)


def perimeter_partials(a: float, b: float) -> tuple[float, float]:
    """(dP/da, dP/db) by quadrature; both strictly positive."""
    ints = _ellipse_integrals(a, b)
    return ints["p_a"], ints["p_b"]


def slaved_axis_rate(a: float, b: float, b_dot: float) -> float:
    """Rate u1 = da/dt keeping the perimeter constant for a given db/dt.

    Implicit-function derivative of perimeter(a, b) = const.
    """
    p_a, p_b = perimeter_partials(a, b)
    return -(p_b / p_a) * b_dot


def slaved_axis_accel(
    a: float, b: float, a_dot: float, b_dot: float, b_ddot: float
) -> float:
    """Second time derivative of the slaved axis a(t) along the flow."""
    ints = _ellipse_integrals(a, b)
    p_a, p_b = ints["p_a"], ints["p_b"]
    pa_dot = ints["p_aa"] * a_dot + ints["p_ab"] * b_dot
    pb_dot = ints["p_ab"] * a_dot + ints["p_bb"] * b_dot
    return -(pb_dot * p_a - p_b * pa_dot) / (p_a * p_a) * b_dot - (p_b / p_a) * b_ddot


def posture_rhs(state: PostureState, u: ControlInput) -> np.ndarray:
    """Time derivative of the posture state under axis rates (u1, u2).

    The material polar angle is frozen (d angle/dt = 0); the polar radius
    rate follows from differentiating the ellipse membership constraint at
    fixed angle, and the Cartesian rates follow from the polar ones.
    """
    if not (np.isfinite(u.u1) and np.isfinite(u.u2)):
        raise ValueError("non-finite control input")
    a, b = state.a, state.b
    if min(a, b) < AXIS_FLOOR:
        raise DegenerateEllipse(f"semi-axis below {AXIS_FLOOR} m: a={a}, b={b}")
    c = np.cos(state.angle)
    s = np.sin(state.angle)
    # d/dt [x^2/a^2 + z^2/b^2 = 1] at frozen angle, x = r c, z = r s:
    # r_dot * (c^2/a^2 + s^2/b^2) = r * (c^2 u1/a^3 + s^2 u2/b^3)
    num = c * c * u.u1 / a**3 + s * s * u.u2 / b**3
    den = c * c / (a * a) + s * s / (b * b)
    r_dot = state.r * num / den
    return np.array([r_dot * c, r_dot * s, r_dot, 0.0, u.u1, u.u2])


def ring_inertia(
    a: float, b: float, props: RingProperties, labels: str = "physical"
) -> InertiaTriple:
    """Mass moments of inertia of the uniform ring about the ring axes.

    Mass is distributed uniformly per unit arc length. With the ring in
    the x-z plane, the physical convention assigns the z-coordinate
    integral to ixx and the x-coordinate integral to izz:

        ixx = (m/P) * int z^2 ds,   izz = (m/P) * int x^2 ds,
        iyy = (m/P) * int r^2 ds = ixx + izz.

    ``labels="swapped"`` exchanges the ixx/izz labels for compatibility
    with conventions that pair ixx with the x-coordinate integral.
    """
    if labels not in ("physical", "swapped"):
        raise ValueError(f"unknown label convention {labels!r}")
    if 4.0 * max(a, b) > props.perimeter * (1.0 + 1e-12):
        raise Infeasible(
            f"shape ({a}, {b}) incompatible with perimeter {props.perimeter}"
        )
    ints = _ellipse_integrals(a, b)
    scale = props.mass / perimeter(a, b)
    ixx = scale * ints["ixx_int"]
    iyy = scale * ints["iyy_int"]
    izz = scale * ints["izz_int"]
    if labels == "swapped":
        ixx, izz = izz, ixx
    return InertiaTriple(ixx=ixx, iyy=iyy, izz=izz)


def ring_circulation_inertia(a: float, b: float, props: RingProperties) -> float:
    """Effective inertia of the material circulating around the held shape
    at unit polar-angle rate: (m/P) * int (ds/dtheta)^2 ds.

    Equals the out-of-plane ring moment for a circle and exceeds it for
    eccentric shapes; used by the energy accounting of the rolling model.
    """
    ints = _ellipse_integrals(a, b)
    return props.mass / perimeter(a, b) * ints["circ_int"]


def ring_inertia_rate(
    a: float,
    b: float,
    a_dot: float,
    b_dot: float,
    props: RingProperties,
    labels: str = "physical",
    step: float = 1e-6,
) -> np.ndarray:
    """Chain-rule time derivative of the inertia triple along (a_dot, b_dot).

    Central finite differences on the semi-axes with a fixed step; the
    quadrature underneath is accurate enough that the difference quotient
    carries ~9 significant digits.
    """
    if a_dot == 0.0 and b_dot == 0.0:
        return np.zeros(3)

    def triple(aa, bb):
        ints = _ellipse_integrals(aa, bb)
        scale = props.mass / perimeter(aa, bb)
        return scale * np.array([ints["ixx_int"], ints["iyy_int"], ints["izz_int"]])

    d_a = (triple(a + step, b) - triple(a - step, b)) / (2.0 * step)
    d_b = (triple(a, b + step) - triple(a, b - step)) / (2.0 * step)
    rate = d_a * a_dot + d_b * b_dot
    if labels == "swapped":
        rate = rate[[2, 1, 0]]
    return rate
