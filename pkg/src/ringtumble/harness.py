"""Scenario configuration, input-signal generation, execution of both
models under identical inputs, and cross-model metrics."""

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline
from scipy.special import expit

from . import highfi, posture, tumbling
from .cascade import CascadeModel, ShapeDrive
from .errors import ChannelMismatch, ContactLoss, Infeasible, ParseError
from .ode import EventSpec, IntegratorConfig, Trace, integrate_adaptive
from .posture import RingProperties
from .tumbling import ShapeKinematics, SlopeGeometry

CSV_CHANNELS = [
    "theta", "psi", "phi", "theta_dot", "psi_dot", "phi_dot", "pcx", "pcy",
    "com_x", "com_y", "com_z", "vx", "vy", "vz", "heading_deg", "v_tumble",
    "f_n", "a", "b", "Ixx", "Iyy", "Izz",
]

# Contact damping for the discrete-element model. The printed source value
# (1e3 N*s/m) makes each element contact overdamped by a factor ~25 and the
# resulting hysteresis brakes rolling by ~14%, so the shipped default is a
# light damping that still settles the initial transient; see the benchmark
# and the cross-model acceptance runs.
DEFAULT_CONTACT_DAMPING = 5.0


@dataclass(frozen=True)
class ImpulseSignal:
    """Bump input b(t) = 4 b' s(g (t - t0)) (1 - s(g (t - t0))) + b0 with s
    the logistic function; peaks at b0 + b' at t = t0."""

    b0: float = 0.3
    b_prime: float = 0.0
    t0: float = 2.0
    gamma: float = 10.0
    mode: str = "slaved"

    def __post_init__(self):
        if not (self.b0 > 0.0 and np.isfinite(self.b_prime) and self.gamma > 0.0):
            raise ValueError("invalid impulse signal parameters")
        if self.mode not in ("slaved", "independent"):
            raise ValueError(f"unknown signal mode {self.mode!r}")

    def eval(self, t):
        """(b, db/dt, d2b/dt2) at time t; vectorized over t."""
        s = expit(self.gamma * (np.asarray(t, dtype=float) - self.t0))
        amp = 4.0 * self.b_prime
        b = amp * s * (1.0 - s) + self.b0
        b_dot = amp * self.gamma * s * (1.0 - s) * (1.0 - 2.0 * s)
        b_ddot = amp * self.gamma**2 * s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s)
        return b, b_dot, b_ddot

    @property
    def peak(self) -> float:
        return self.b0 + self.b_prime


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one experiment, shared by both models."""

    slope_deg: float = 15.0
    gravity: float = 9.81
    ring: RingProperties = field(default_factory=RingProperties)
    theta_dot0: float = 0.0
    psi_dot0: float = math.pi / 6.0
    phi_dot0: float = 2.0 * math.pi
    duration: float = 4.0
    signal: ImpulseSignal = field(default_factory=ImpulseSignal)
    rtol: float = 1e-8
    atol: float = 1e-10
    highfi_dt: float = 2e-5
    output_dt: float = 2e-3

    def __post_init__(self):
        if not (self.duration > 0.0):
            raise ValueError("duration must be positive")
        for name in ("slope_deg", "gravity", "theta_dot0", "psi_dot0", "phi_dot0",
                     "rtol", "atol", "highfi_dt", "output_dt"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not (0.0 < self.highfi_dt <= self.output_dt):
            raise ValueError("output grid must be no finer than the fixed step")

    def validate_feasibility(self) -> None:
        """Reject signals whose peak shape cannot exist on this ring."""
        P = self.ring.perimeter
        peak = self.signal.peak if self.signal.mode == "slaved" else max(
            self.signal.peak, posture.solve_conjugate_axis(P, self.signal.b0)
        )
        if 4.0 * peak >= P:
            raise Infeasible(
                f"signal peak b0 + b_prime = {self.signal.peak:g} m needs perimeter "
                f"> {4.0 * self.signal.peak:g} m (degenerate bound 4*max semi-axis), "
                f"got ring.perimeter = {P:g} m"
            )

    @property
    def slope(self) -> SlopeGeometry:
        return SlopeGeometry(alpha=math.radians(self.slope_deg), g=self.gravity)

    @property
    def has_input(self) -> bool:
        return self.signal.b_prime != 0.0

    def drive(self) -> ShapeDrive | None:
        if not self.has_input:
            return None
        return ShapeDrive(b_of_t=lambda t: self.signal.eval(t), mode=self.signal.mode)

    @property
    def output_grid(self) -> np.ndarray:
        n = int(round(self.duration / self.output_dt))
        if abs(n * self.output_dt - self.duration) > 1e-9:
            raise ValueError("duration must be a multiple of output.dt")
        return self.output_dt * np.arange(n + 1)


# --- configuration text format -------------------------------------------

_CONFIG_KEYS = {
    "slope_deg": ("slope_deg", float),
    "gravity": ("gravity", float),
    "ring.mass": ("ring_mass", float),
    "ring.perimeter": ("ring_perimeter", float),
    "init.phi_dot": ("phi_dot0", float),
    "init.psi_dot": ("psi_dot0", float),
    "init.theta_dot": ("theta_dot0", float),
    "duration": ("duration", float),
    "signal.b0": ("b0", float),
    "signal.b_prime": ("b_prime", float),
    "signal.t0": ("t0", float),
    "signal.gamma": ("gamma", float),
    "signal.mode": ("mode", str),
    "cascade.rtol": ("rtol", float),
    "cascade.atol": ("atol", float),
    "highfi.dt": ("highfi_dt", float),
    "output.dt": ("output_dt", float),
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse the flat ``section.key = value`` format.

    Unknown keys are rejected. An empty file yields the default scenario
    with no impulse: the signal amplitude has no safe default, so an
    impulse only happens when ``signal.b_prime`` is given explicitly.
    """
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(line_no, f"expected 'key = value', got {raw!r}")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in _CONFIG_KEYS:
            raise ParseError(line_no, f"unknown key {key!r}")
        if key in values:
            raise ParseError(line_no, f"duplicate key {key!r}")
        name, cast = _CONFIG_KEYS[key]
        try:
            values[name] = cast(val)
        except ValueError:
            raise ParseError(line_no, f"bad value for {key!r}: {val!r}") from None

    signal = ImpulseSignal(
        b0=values.pop("b0", 0.3),
        b_prime=values.pop("b_prime", 0.0),
        t0=values.pop("t0", 2.0),
        gamma=values.pop("gamma", 10.0),
        mode=values.pop("mode", "slaved"),
    )
    ring = RingProperties(
        mass=values.pop("ring_mass", 6.0),
        perimeter=values.pop("ring_perimeter", 1.6),
    )
    try:
        cfg = ScenarioConfig(ring=ring, signal=signal, **values)
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None
    cfg.validate_feasibility()
    return cfg


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parse_config round-trips it."""
    sig = cfg.signal
    pairs = [
        ("slope_deg", cfg.slope_deg),
        ("gravity", cfg.gravity),
        ("ring.mass", cfg.ring.mass),
        ("ring.perimeter", cfg.ring.perimeter),
        ("init.theta_dot", cfg.theta_dot0),
        ("init.psi_dot", cfg.psi_dot0),
        ("init.phi_dot", cfg.phi_dot0),
        ("duration", cfg.duration),
        ("signal.b0", sig.b0),
        ("signal.b_prime", sig.b_prime),
        ("signal.t0", sig.t0),
        ("signal.gamma", sig.gamma),
        ("signal.mode", sig.mode),
        ("cascade.rtol", cfg.rtol),
        ("cascade.atol", cfg.atol),
        ("highfi.dt", cfg.highfi_dt),
        ("output.dt", cfg.output_dt),
    ]
    lines = []
    for key, val in pairs:
        text = val if isinstance(val, str) else format(val, ".17g")
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


# --- cascade execution -----------------------------------------------------

def _base_metadata(cfg: ScenarioConfig, scenario_id: str, model_id: str) -> dict:
    return {
        "scenario": scenario_id,
        "model": model_id,
        "config_hash": config_hash(cfg),
        "ring_perimeter": format(cfg.ring.perimeter, ".17g"),
        "ring_mass": format(cfg.ring.mass, ".17g"),
    }


def run_cascade(cfg: ScenarioConfig, scenario_id: str = "scenario") -> Trace:
    """Integrate the coupled shape + rolling system and sample the shared
    channel set on the output grid.

    Raises ContactLoss (with the truncated trace attached as ``.trace``)
    when the predicted normal force crosses zero: past that instant the
    rolling model is invalid.
    """
    cfg.validate_feasibility()
    model = CascadeModel(cfg.ring, cfg.slope, cfg.drive())
    x_tbl = tumbling.initial_tumbling_state(
        theta_dot=cfg.theta_dot0, psi_dot=cfg.psi_dot0, phi_dot=cfg.phi_dot0
    )
    X0 = model.initial_state(cfg.signal.b0, x_tbl)
    contact_event = EventSpec(
        observer=model.normal_force, direction="falling", terminal=True,
        name="contact_loss",
    )
    icfg = IntegratorConfig(rtol=cfg.rtol, atol=cfg.atol)
    result = integrate_adaptive(
        model.rhs, X0, (0.0, cfg.duration), icfg, [contact_event]
    )

    grid = cfg.output_grid
    if result.terminated_by is not None:
        t_stop = result.terminated_by.time
        grid = grid[grid <= t_stop]
        if len(grid) == 0 or grid[-1] < t_stop:
            grid = np.append(grid, t_stop)

    trace = _cascade_trace(model, cfg, result, grid, scenario_id)
    if result.terminated_by is not None:
        err = ContactLoss(result.terminated_by.time)
        err.trace = trace
        raise err
    return trace


def _cascade_trace(model, cfg, result, grid, scenario_id) -> Trace:
    n = len(grid)
    cols = {name: np.empty(n) for name in CSV_CHANNELS}
    for i, t in enumerate(grid):
        X = result(t)
        dyn = model.dynamics_at(t, X)
        grf = dyn.contact_force(dyn.solve())
        a, b = X[tumbling.STATE_SIZE + 4], X[tumbling.STATE_SIZE + 5]
        triple = model.inertia_triple(a, b)
        com = dyn.com_position
        cols["theta"][i], cols["psi"][i], cols["phi"][i] = X[0], X[1], X[2]
        cols["theta_dot"][i], cols["psi_dot"][i], cols["phi_dot"][i] = X[3], X[4], X[5]
        cols["pcx"][i], cols["pcy"][i] = X[6], X[7]
        cols["com_x"][i], cols["com_y"][i], cols["com_z"][i] = com
        cols["vx"][i], cols["vy"][i], cols["vz"][i] = dyn.v_cm
        cols["f_n"][i] = grf.normal
        cols["a"][i], cols["b"][i] = a, b
        cols["Ixx"][i], cols["Iyy"][i], cols["Izz"][i] = triple.as_array()
    heading = tumbling.heading_series(cols["vx"], cols["vy"])
    cols["heading_deg"] = np.degrees(heading)
    cols["v_tumble"] = np.hypot(cols["vx"], cols["vy"])
    meta = _base_metadata(cfg, scenario_id, "cascade")
    if result.terminated_by is not None:
        meta["contact_loss_time"] = format(result.terminated_by.time, ".17g")
    return Trace(t=grid, channels=cols, metadata=meta)


def cascade_energy_series(cfg: ScenarioConfig, trace_or_result=None):
    """Total mechanical energy along a cascade run (diagnostics)."""
    model = CascadeModel(cfg.ring, cfg.slope, cfg.drive())
    x_tbl = tumbling.initial_tumbling_state(
        theta_dot=cfg.theta_dot0, psi_dot=cfg.psi_dot0, phi_dot=cfg.phi_dot0
    )
    X0 = model.initial_state(cfg.signal.b0, x_tbl)
    icfg = IntegratorConfig(rtol=cfg.rtol, atol=cfg.atol)
    result = integrate_adaptive(model.rhs, X0, (0.0, cfg.duration), icfg)
    grid = cfg.output_grid
    return grid, np.array([model.energy(t, result(t)) for t in grid])


# --- high-fidelity execution ------------------------------------------------

def _conjugate_axis_table(cfg: ScenarioConfig):
    """a(b) and da/db over the signal's b range, tabulated once per run."""
    sig = cfg.signal
    P = cfg.ring.perimeter
    if sig.mode == "independent" or not cfg.has_input:
        a0 = posture.solve_conjugate_axis(P, sig.b0)
        return (lambda b: np.full_like(np.asarray(b, dtype=float), a0),
                lambda b: np.zeros_like(np.asarray(b, dtype=float)))
    b_lo, b_hi = sig.b0, sig.peak
    grid = np.linspace(b_lo, b_hi + 1e-12, 1201)
    vals = np.array([posture.solve_conjugate_axis(P, float(b)) for b in grid])
    spline = CubicSpline(grid, vals)
    deriv = spline.derivative()
    lo, hi = grid[0], grid[-1]
    return (lambda b: spline(np.clip(b, lo, hi)),
            lambda b: deriv(np.clip(b, lo, hi)))


def _highfi_initial_state(cfg, disc, params, a0, b0):
    """Initial 6-DOF state matched to the cascade: same orientation and
    rates, placed at the static penetration depth of the penalty contact."""
    rot = tumbling.rotation_matrix(0.0, 0.0, 0.0)
    omega_b = tumbling.euler_rate_matrix(0.0, 0.0) @ np.array(
        [cfg.theta_dot0, cfg.psi_dot0, cfg.phi_dot0]
    )
    th = disc.angles
    r = highfi.element_radius(a0, b0, th)
    c_body = np.stack([r * np.cos(th), np.zeros_like(th), r * np.sin(th)], axis=1)
    arm_z = (c_body @ rot.T)[:, 2]
    load = cfg.ring.mass * cfg.gravity * math.cos(math.radians(cfg.slope_deg))

    def net(z):
        depth = disc.half_thickness - (z + arm_z)
        u = np.clip(depth / params.transition_width, 0.0, 1.0)
        s = u * u * (3.0 - 2.0 * u)
        f = np.where(depth > 0.0, np.maximum(s * params.stiffness * depth, 0.0), 0.0)
        return f.sum() - load

    z_kiss = -arm_z.min() + disc.half_thickness
    z0 = optimize.brentq(net, z_kiss - 0.02, z_kiss, xtol=1e-14)

    p_body, _ = tumbling.support_point(a0, b0, rot)
    r_slope = rot @ p_body
    omega_s = rot @ omega_b
    v0 = -np.cross(omega_s, r_slope)
    p0 = np.array([-r_slope[0], -r_slope[1], z0])
    q0 = np.array([1.0, 0.0, 0.0, 0.0])
    return highfi.BodyState(p=p0, q=q0, v=v0, omega_b=omega_b)


def _euler_from_quaternion_records(q_rows):
    """Per-sample yaw/lean/roll extraction (same angle sequence as the
    cascade), with the roll channel unwrapped."""
    w, x, y, z = q_rows[:, 0], q_rows[:, 1], q_rows[:, 2], q_rows[:, 3]
    r01 = 2.0 * (x * y - w * z)
    r11 = 1.0 - 2.0 * (x * x + z * z)
    r21 = 2.0 * (y * z + w * x)
    r20 = 2.0 * (x * z - w * y)
    r22 = 1.0 - 2.0 * (x * x + y * y)
    theta = np.unwrap(np.arctan2(-r01, r11))
    psi = np.arcsin(np.clip(r21, -1.0, 1.0))
    phi = np.unwrap(np.arctan2(-r20, r22))
    return theta, psi, phi


def run_highfi(
    cfg: ScenarioConfig,
    scenario_id: str = "scenario",
    disc: highfi.RingDiscretization | None = None,
    params: highfi.ContactParams | None = None,
) -> Trace:
    """Fixed-step discrete-element run under the same inputs, producing the
    same channel set and grid as the cascade model."""
    cfg.validate_feasibility()
    if disc is None:
        disc = highfi.RingDiscretization(n=150, mass=cfg.ring.mass)
    if params is None:
        params = highfi.ContactParams(damping=DEFAULT_CONTACT_DAMPING)

    grid = cfg.output_grid
    record_every = int(round(cfg.output_dt / cfg.highfi_dt))
    if abs(record_every * cfg.highfi_dt - cfg.output_dt) > 1e-12:
        raise ValueError("output.dt must be an integer multiple of highfi.dt")
    n_steps = record_every * (len(grid) - 1)
    dt = cfg.output_dt / record_every

    t_steps = dt * np.arange(n_steps + 1)
    sig = cfg.signal
    if cfg.has_input:
        b_t, b_dot_t, _ = sig.eval(t_steps)
    else:
        b_t = np.full(n_steps + 1, sig.b0)
        b_dot_t = np.zeros(n_steps + 1)
    a_of_b, da_db = _conjugate_axis_table(cfg)
    if sig.mode == "independent":
        a0 = posture.solve_conjugate_axis(cfg.ring.perimeter, sig.b0)
        a_t = np.full(n_steps + 1, a0)
        a_dot_t = np.zeros(n_steps + 1)
    else:
        a_t = a_of_b(b_t)
        a_dot_t = da_db(b_t) * b_dot_t
    shape_table = np.column_stack([a_t, b_t, a_dot_t, b_dot_t])

    state0 = _highfi_initial_state(cfg, disc, params, float(a_t[0]), float(b_t[0]))
    rec = highfi.simulate(
        state0, 0.0, dt, n_steps, shape_table, disc, params,
        cfg.slope.gravity_vector, record_every,
    )

    cols = {}
    theta, psi, phi = _euler_from_quaternion_records(rec[:, 4:8])
    cols["theta"], cols["psi"], cols["phi"] = theta, psi, phi
    n_rows = rec.shape[0]
    rates = np.empty((n_rows, 3))
    for i in range(n_rows):
        B = tumbling.euler_rate_matrix(psi[i], phi[i])
        rates[i] = np.linalg.solve(B, rec[i, 11:14])
    cols["theta_dot"], cols["psi_dot"], cols["phi_dot"] = rates.T
    cols["com_x"], cols["com_y"], cols["com_z"] = rec[:, 1], rec[:, 2], rec[:, 3]
    cols["vx"], cols["vy"], cols["vz"] = rec[:, 8], rec[:, 9], rec[:, 10]
    a_rec = a_t[::record_every].copy()
    b_rec = b_t[::record_every].copy()
    cols["a"], cols["b"] = a_rec, b_rec
    pc = np.empty((n_rows, 2))
    for i in range(n_rows):
        rot = tumbling.rotation_matrix(theta[i], psi[i], phi[i])
        p_body, _ = tumbling.support_point(a_rec[i], b_rec[i], rot)
        r_slope = rot @ p_body
        pc[i, 0] = rec[i, 1] + r_slope[0]
        pc[i, 1] = rec[i, 2] + r_slope[1]
    cols["pcx"], cols["pcy"] = pc[:, 0], pc[:, 1]
    cols["heading_deg"] = np.degrees(tumbling.heading_series(cols["vx"], cols["vy"]))
    cols["v_tumble"] = np.hypot(cols["vx"], cols["vy"])
    cols["f_n"] = rec[:, 14].copy()
    cols["Ixx"], cols["Iyy"], cols["Izz"] = rec[:, 15], rec[:, 16], rec[:, 17]
    meta = _base_metadata(cfg, scenario_id, "highfi")
    meta["backend"] = highfi.backend_name()
    return Trace(t=grid, channels={k: cols[k] for k in CSV_CHANNELS}, metadata=meta)


# --- comparison --------------------------------------------------------------

@dataclass
class ComparisonReport:
    """Cross-model agreement metrics on the common resampled grid."""

    heading_rmse_deg: float
    final_heading_deg: dict[str, float]
    com_path_rmse: float
    v_tumble_rmse: float
    max_perimeter_drift: dict[str, float]
    grf_min: dict[str, float]
    contact_loss_times: dict[str, float]
    channel_rmse: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "heading_rmse_deg": self.heading_rmse_deg,
            "final_heading_deg": self.final_heading_deg,
            "com_path_rmse": self.com_path_rmse,
            "v_tumble_rmse": self.v_tumble_rmse,
            "max_perimeter_drift": self.max_perimeter_drift,
            "grf_min": self.grf_min,
            "contact_loss_times": self.contact_loss_times,
            "channel_rmse": self.channel_rmse,
        }

    def __str__(self) -> str:
        lines = [
            f"heading RMSE:        {self.heading_rmse_deg:.4f} deg",
            f"CoM path RMSE:       {self.com_path_rmse:.5f} m",
            f"tumbling-vel RMSE:   {self.v_tumble_rmse:.5f} m/s",
        ]
        for model, val in sorted(self.final_heading_deg.items()):
            lines.append(f"final heading [{model}]: {val:.4f} deg")
        for model, val in sorted(self.max_perimeter_drift.items()):
            lines.append(f"perimeter drift [{model}]: {val:.3e}")
        for model, val in sorted(self.grf_min.items()):
            lines.append(f"GRF minimum [{model}]: {val:.3f} N")
        if self.contact_loss_times:
            for model, val in sorted(self.contact_loss_times.items()):
                lines.append(f"contact loss [{model}]: t = {val:.6f} s")
        else:
            lines.append("contact loss: none")
        return "\n".join(lines)


def _rmse(x, y):
    return float(np.sqrt(np.mean((np.asarray(x) - np.asarray(y)) ** 2)))


def compare(trace_a: Trace, trace_b: Trace) -> ComparisonReport:
    """Resample both traces to the coarser common grid and compute the
    agreement metrics. Symmetric for the symmetric (RMSE) metrics."""
    missing = set(CSV_CHANNELS) - set(trace_a.names) - set(trace_b.names)
    for tr in (trace_a, trace_b):
        lack = set(CSV_CHANNELS) - set(tr.names)
        if lack:
            raise ChannelMismatch(f"trace lacks channels: {sorted(lack)}")
    t_lo = max(trace_a.t[0], trace_b.t[0])
    t_hi = min(trace_a.t[-1], trace_b.t[-1])
    if t_hi <= t_lo:
        raise ChannelMismatch("traces do not overlap in time")
    dt = max(np.median(np.diff(trace_a.t)), np.median(np.diff(trace_b.t)))
    n = max(int(math.floor((t_hi - t_lo) / dt + 1e-9)), 1)
    grid = t_lo + (t_hi - t_lo) * np.arange(n + 1) / n

    def sample(tr, name):
        return np.interp(grid, tr.t, tr[name])

    channel_rmse = {
        name: _rmse(sample(trace_a, name), sample(trace_b, name))
        for name in CSV_CHANNELS
    }
    dx = sample(trace_a, "com_x") - sample(trace_b, "com_x")
    dy = sample(trace_a, "com_y") - sample(trace_b, "com_y")
    com_path_rmse = float(np.sqrt(np.mean(dx * dx + dy * dy)))

    def model_id(tr, fallback):
        return tr.metadata.get("model", fallback)

    ids = (model_id(trace_a, "a"), model_id(trace_b, "b"))
    if ids[0] == ids[1]:
        ids = (ids[0] + "_1", ids[1] + "_2")

    def perimeter_drift(tr):
        P = float(tr.metadata.get("ring_perimeter", "nan"))
        if not np.isfinite(P):
            return float("nan")
        vals = [
            abs(posture.perimeter(a, b) - P) / P
            for a, b in zip(tr["a"][::10], tr["b"][::10])
        ]
        return float(max(vals))

    final_heading = {}
    grf_min = {}
    drift = {}
    loss = {}
    for ident, tr in zip(ids, (trace_a, trace_b)):
        final_heading[ident] = float(tr["heading_deg"][-1])
        grf_min[ident] = float(tr["f_n"].min())
        drift[ident] = perimeter_drift(tr)
        if "contact_loss_time" in tr.metadata:
            loss[ident] = float(tr.metadata["contact_loss_time"])

    return ComparisonReport(
        heading_rmse_deg=channel_rmse["heading_deg"],
        final_heading_deg=final_heading,
        com_path_rmse=com_path_rmse,
        v_tumble_rmse=channel_rmse["v_tumble"],
        max_perimeter_drift=drift,
        grf_min=grf_min,
        contact_loss_times=loss,
        channel_rmse=channel_rmse,
    )
