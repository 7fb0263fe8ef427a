"""Adaptive Dormand-Prince 5(4) integration with dense output, sign-change
event detection, and uniform trace resampling.

Single-threaded and bitwise deterministic for fixed inputs: no randomness,
no parallel reductions, no time-dependent state.
"""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonFiniteDerivative, StepBudgetExceeded, StepSizeUnderflow

# Dormand-Prince 5(4) tableau (FSAL: stage 7 equals the propagated solution).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# Difference between the 5th- and embedded 4th-order weights.
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Coefficients of the quartic dense-output interpolant.
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_EVENT_TIME_TOL = 1e-10  # bisection window for event refinement (s)


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: float = 1e-4
    h_min: float = 1e-14
    h_max: float = np.inf
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValueError("tolerances must be positive")
        if not (self.h_min <= self.h_init <= self.h_max):
            raise ValueError("step bounds must satisfy h_min <= h_init <= h_max")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class EventSpec:
    """Scalar observer whose sign change marks an event.

    direction: "falling" (+ to -), "rising" (- to +) or "any".
    terminal: stop the integration at the refined crossing time.
    """

    observer: Callable[[float, np.ndarray], float]
    direction: str = "any"
    terminal: bool = False
    name: str = "event"

    def __post_init__(self):
        if self.direction not in ("falling", "rising", "any"):
            raise ValueError(f"unknown direction {self.direction!r}")


@dataclass(frozen=True)
class EventRecord:
    name: str
    time: float
    state: np.ndarray
    terminal: bool


class DenseSegment:
    """Quartic interpolant over one accepted step [t0, t0 + h]."""

    __slots__ = ("t0", "h", "y0", "coeffs")

    def __init__(self, t0: float, h: float, y0: np.ndarray, stages: np.ndarray):
        self.t0 = t0
        self.h = h
        self.y0 = y0
        self.coeffs = stages.T @ _P  # (n_state, 4)

    @property
    def t1(self) -> float:
        return self.t0 + self.h

    def __call__(self, t: float) -> np.ndarray:
        sigma = (t - self.t0) / self.h
        powers = np.array([sigma, sigma**2, sigma**3, sigma**4])
        return self.y0 + self.h * (self.coeffs @ powers)


@dataclass
class IntegrationResult:
    """Accepted steps with their dense-output segments and event records."""

    t: np.ndarray
    y: np.ndarray
    segments: list[DenseSegment]
    events: list[EventRecord] = field(default_factory=list)
    terminated_by: EventRecord | None = None
    n_rhs_evals: int = 0

    def __call__(self, t: float) -> np.ndarray:
        """Evaluate the dense output at a time inside the integration span."""
        if not self.segments:
            if t == self.t[0]:
                return self.y[0].copy()
            raise ValueError("empty integration result")
        times = self.t
        if t <= times[0]:
            if t < times[0] - 1e-12:
                raise ValueError(f"t = {t} before integration start {times[0]}")
            return self.y[0].copy()
        idx = int(np.searchsorted(times, t, side="right")) - 1
        idx = min(idx, len(self.segments) - 1)
        return self.segments[idx](min(t, times[-1]))


@dataclass
class Trace:
    """Uniformly sampled, named time series shared by both models."""

    t: np.ndarray
    channels: dict[str, np.ndarray]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1 or (len(self.t) > 1 and not np.all(np.diff(self.t) > 0)):
            raise ValueError("trace times must be strictly increasing")
        for name, col in self.channels.items():
            col = np.asarray(col, dtype=float)
            if col.shape != self.t.shape:
                raise ValueError(f"channel {name!r} has wrong length")
            self.channels[name] = col
        self.t.setflags(write=False)
        for col in self.channels.values():
            col.setflags(write=False)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    @property
    def names(self) -> list[str]:
        return list(self.channels)


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, cfg: IntegratorConfig) -> float:
    scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def find_event_crossing(segment: DenseSegment, spec: EventSpec):
    """Refined crossing time of the observer inside one dense segment.

    Returns None when the observer does not change sign in the requested
    direction across the segment; otherwise bisects the dense output down
    to a 1e-10 s window.
    """
    f0 = spec.observer(segment.t0, segment(segment.t0))
    f1 = spec.observer(segment.t1, segment(segment.t1))
    if f0 == 0.0:
        return None  # fired at the previous segment's right endpoint
    if f0 * f1 > 0.0:
        return None
    if spec.direction == "falling" and not (f0 > 0.0 >= f1):
        return None
    if spec.direction == "rising" and not (f0 < 0.0 <= f1):
        return None
    lo, hi = segment.t0, segment.t1
    flo = f0
    while hi - lo > _EVENT_TIME_TOL:
        mid = 0.5 * (lo + hi)
        fmid = spec.observer(mid, segment(mid))
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def integrate_adaptive(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_span: tuple[float, float],
    cfg: IntegratorConfig = IntegratorConfig(),
    events: Sequence[EventSpec] = (),
) -> IntegrationResult:
    """Integrate y' = rhs(t, y) over t_span with embedded error control.

    PI step-size control (safety 0.9, growth clamped to [0.2, 5.0]). A
    terminal event truncates the result at the refined crossing time; the
    state there comes from the dense output.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise ValueError("t_span must be increasing")
    y = np.asarray(y0, dtype=float).copy()
    if y.ndim != 1:
        raise ValueError("state must be a 1-D array")

    f = rhs(t0, y)
    f = np.asarray(f, dtype=float)
    n_evals = 1
    if not np.all(np.isfinite(f)):
        raise NonFiniteDerivative(f"rhs non-finite at t = {t0}")

    h = min(cfg.h_init, cfg.h_max, t1 - t0)

    ts = [t0]
    ys = [y.copy()]
    segments: list[DenseSegment] = []
    event_records: list[EventRecord] = []
    terminated = None

    t = t0
    err_prev = 1.0
    k = np.empty((7, y.size))
    steps = 0
    while t < t1:
        if steps >= cfg.max_steps:
            raise StepBudgetExceeded(f"exceeded {cfg.max_steps} steps at t = {t}")
        steps += 1
        is_last = h >= t1 - t
        h = min(h, t1 - t)
        if h < cfg.h_min:
            raise StepSizeUnderflow(f"step {h:.3e} below h_min at t = {t}")

        k[0] = f
        failed = False
        for i in range(1, 7):
            yi = y + h * (k[:i].T @ _A[i])
            k[i] = rhs(t + _C[i] * h, yi)
            n_evals += 1
            if not np.all(np.isfinite(k[i])):
                failed = True
                break
        if failed:
            # Non-finite inside the attempted step: retry shorter before
            # giving up, as with an oversized error estimate.
            h *= 0.2
            if h < cfg.h_min:
                raise NonFiniteDerivative(f"rhs non-finite near t = {t}")
            continue

        y_new = y + h * (k.T @ _B)
        err_vec = h * (k.T @ _E)
        err = _error_norm(err_vec, y, y_new, cfg)

        if err > 1.0:
            factor = max(0.2, 0.9 * err ** (-0.2))
            h *= factor
            continue

        seg = DenseSegment(t, h, y, k.copy())
        t_next = t1 if is_last else t + h  # land exactly on the end time
        y_next = y_new

        # Event scan on the accepted segment, earliest crossing first.
        crossing = None
        for spec in events:
            tc = find_event_crossing(seg, spec)
            if tc is not None and (crossing is None or tc < crossing[0]):
                crossing = (tc, spec)
        if crossing is not None:
            tc, spec = crossing
            rec = EventRecord(spec.name, tc, seg(tc), spec.terminal)
            event_records.append(rec)
            if spec.terminal:
                # The full-step interpolant remains valid on [t, tc].
                ts.append(tc)
                ys.append(rec.state)
                segments.append(seg)
                terminated = rec
                break

        ts.append(t_next)
        ys.append(y_next)
        segments.append(seg)

        # PI controller on consecutive accepted error estimates.
        e = max(err, 1e-10)
        factor = 0.9 * e ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
        factor = min(5.0, max(0.2, factor))
        h = min(h * factor, cfg.h_max)
        err_prev = e

        t = t_next
        y = y_next
        f = k[6].copy()  # FSAL

    return IntegrationResult(
        t=np.array(ts),
        y=np.array(ys),
        segments=segments,
        events=event_records,
        terminated_by=terminated,
        n_rhs_evals=n_evals,
    )


def resample(source, dt: float, metadata: dict[str, str] | None = None) -> Trace:
    """Evaluate a result (dense output) or trace (linear) on a uniform grid.

    Endpoints are preserved exactly; the grid step is dt, with the final
    point pinned to the source's end time.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if isinstance(source, IntegrationResult):
        t0, t1 = source.t[0], source.t[-1]
        grid = _uniform_grid(t0, t1, dt)
        states = np.empty((len(grid), source.y.shape[1]))
        states[0] = source.y[0]
        states[-1] = source.y[-1]
        for i in range(1, len(grid) - 1):
            states[i] = source(grid[i])
        channels = {f"y{j}": states[:, j] for j in range(states.shape[1])}
        return Trace(t=grid, channels=channels, metadata=metadata or {})
    if isinstance(source, Trace):
        t0, t1 = source.t[0], source.t[-1]
        grid = _uniform_grid(t0, t1, dt)
        channels = {}
        for name, col in source.channels.items():
            vals = np.interp(grid, source.t, col)
            # reuse source samples exactly where grid times coincide
            idx = np.searchsorted(source.t, grid)
            idx = np.clip(idx, 0, len(source.t) - 1)
            exact = np.isclose(source.t[idx], grid, rtol=0.0, atol=1e-12)
            vals[exact] = col[idx[exact]]
            channels[name] = vals
        meta = dict(source.metadata)
        meta.update(metadata or {})
        return Trace(t=grid, channels=channels, metadata=meta)
    raise TypeError(f"cannot resample {type(source).__name__}")


def _uniform_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    n = int(np.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(n + 1)
    if grid[-1] < t1 - 1e-12:
        grid = np.append(grid, t1)
    else:
        grid[-1] = t1
    grid[0] = t0
    return grid
