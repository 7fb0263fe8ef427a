"""Integrator self-tests against problems with exact solutions, plus event
location, dense output, resampling, and determinism checks."""

import numpy as np
import pytest

from ringtumble.errors import (
    NonFiniteDerivative,
    StepBudgetExceeded,
    StepSizeUnderflow,
)
from ringtumble.ode import (
    EventSpec,
    IntegratorConfig,
    Trace,
    integrate_adaptive,
    resample,
)


def test_constant_solution_exact():
    res = integrate_adaptive(lambda t, y: np.zeros_like(y), [7.0], (0.0, 1.0))
    assert res.y[-1][0] == 7.0
    assert res.t[-1] == 1.0


def test_exponential_decay():
    res = integrate_adaptive(lambda t, y: -y, [1.0], (0.0, 1.0))
    assert res.y[-1][0] == pytest.approx(np.exp(-1.0), abs=1e-8)


def test_harmonic_oscillator_energy_over_ten_periods():
    def rhs(t, y):
        return np.array([y[1], -y[0]])

    res = integrate_adaptive(rhs, [1.0, 0.0], (0.0, 20.0 * np.pi))
    energy = res.y[:, 0] ** 2 + res.y[:, 1] ** 2
    assert np.max(np.abs(energy - energy[0])) < 1e-6


def test_dense_output_matches_analytic_solution():
    res = integrate_adaptive(lambda t, y: -y, [1.0], (0.0, 1.0))
    for t in np.linspace(0.0, 1.0, 211):
        assert res(t)[0] == pytest.approx(np.exp(-t), abs=1e-8)


def test_tolerance_halving_never_hurts():
    problems = [
        (lambda t, y: -y, [1.0], (0.0, 1.0), lambda t: np.array([np.exp(-t)])),
        (
            lambda t, y: np.array([y[1], -y[0]]),
            [1.0, 0.0],
            (0.0, 2.0 * np.pi),
            lambda t: np.array([np.cos(t), -np.sin(t)]),
        ),
    ]
    for rhs, y0, span, exact in problems:
        errs = []
        for scale in (1.0, 0.5, 0.25, 0.125):
            cfg = IntegratorConfig(rtol=1e-6 * scale, atol=1e-9 * scale)
            res = integrate_adaptive(rhs, y0, span, cfg)
            errs.append(np.max(np.abs(res.y[-1] - exact(span[1]))))
        assert all(e2 <= e1 * (1 + 1e-12) for e1, e2 in zip(errs, errs[1:]))


def test_event_linear_crossing():
    spec = EventSpec(observer=lambda t, y: 1.0 - t, name="linear")
    res = integrate_adaptive(lambda t, y: np.ones(1), [0.0], (0.0, 2.0), events=[spec])
    assert len(res.events) == 1
    assert res.events[0].time == pytest.approx(1.0, abs=1e-9)
    assert res.terminated_by is None  # non-terminal events do not stop the run
    assert res.t[-1] == 2.0


def test_event_never_fires_when_observer_positive():
    spec = EventSpec(observer=lambda t, y: 1.0 + t * t)
    res = integrate_adaptive(lambda t, y: -y, [1.0], (0.0, 2.0), events=[spec])
    assert res.events == []


def test_event_cosine_falling_root():
    spec = EventSpec(observer=lambda t, y: np.cos(t), direction="falling", name="cos")
    res = integrate_adaptive(lambda t, y: np.ones(1), [0.0], (0.0, 2.0), events=[spec])
    assert res.events[0].time == pytest.approx(np.pi / 2.0, abs=1e-9)


def test_event_direction_filter():
    # observer sin(t) rises through zero at 2*pi; falling filter must skip
    # the rise and catch the fall at pi
    falling = EventSpec(observer=lambda t, y: np.sin(t + 0.1), direction="falling")
    rising = EventSpec(observer=lambda t, y: np.sin(t + 0.1), direction="rising")
    res = integrate_adaptive(
        lambda t, y: np.ones(1), [0.0], (0.0, 7.0), events=[falling, rising]
    )
    times = sorted((r.name, r.time) for r in res.events)
    falls = [t for n, t in times if n == "event"]
    assert any(abs(t - (np.pi - 0.1)) < 1e-8 for t in falls)
    assert any(abs(t - (2.0 * np.pi - 0.1)) < 1e-8 for t in falls)


def test_terminal_event_stops_integration():
    spec = EventSpec(observer=lambda t, y: 0.5 - y[0], terminal=True, name="halfway")
    res = integrate_adaptive(lambda t, y: np.ones(1), [0.0], (0.0, 2.0), events=[spec])
    assert res.terminated_by is not None
    assert res.t[-1] == pytest.approx(0.5, abs=1e-9)
    assert res.y[-1][0] == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("h_init", [1e-5, 1e-3, 0.3])
def test_event_time_independent_of_initial_step(h_init):
    spec = EventSpec(observer=lambda t, y: 1.0 - t, name="linear")
    cfg = IntegratorConfig(h_init=h_init)
    res = integrate_adaptive(lambda t, y: np.ones(1), [0.0], (0.0, 2.0), cfg, [spec])
    assert res.events[0].time == pytest.approx(1.0, abs=1e-8)


def test_resample_constant():
    res = integrate_adaptive(lambda t, y: np.zeros(1), [3.5], (0.0, 1.0))
    tr = resample(res, 0.1)
    assert np.all(tr["y0"] == 3.5)
    assert tr.t[0] == 0.0 and tr.t[-1] == 1.0


def test_resample_exponential_accuracy():
    res = integrate_adaptive(lambda t, y: -y, [1.0], (0.0, 1.0))
    tr = resample(res, 0.01)
    assert np.max(np.abs(tr["y0"] - np.exp(-tr.t))) < 1e-7


def test_resample_idempotent():
    res = integrate_adaptive(lambda t, y: -y, [1.0], (0.0, 1.0))
    tr1 = resample(res, 0.02)
    tr2 = resample(tr1, 0.02)
    assert np.array_equal(tr1.t, tr2.t)
    assert np.array_equal(tr1["y0"], tr2["y0"])


def test_bitwise_determinism():
    def rhs(t, y):
        return np.array([y[1], -np.sin(y[0])])

    runs = [
        integrate_adaptive(rhs, [0.3, 1.1], (0.0, 10.0)).y[-1] for _ in range(2)
    ]
    assert np.array_equal(runs[0], runs[1])


def test_step_budget_exceeded():
    cfg = IntegratorConfig(max_steps=5)
    with pytest.raises(StepBudgetExceeded):
        integrate_adaptive(
            lambda t, y: np.array([np.cos(40.0 * t)]), [0.0], (0.0, 50.0), cfg
        )


def test_blowup_raises():
    # finite-time blowup at t = 1
    with pytest.raises((StepSizeUnderflow, NonFiniteDerivative, StepBudgetExceeded)):
        integrate_adaptive(lambda t, y: y * y, [1.0], (0.0, 2.0))


def test_nonfinite_rhs_at_start_raises():
    with pytest.raises(NonFiniteDerivative):
        integrate_adaptive(lambda t, y: np.array([np.nan]), [1.0], (0.0, 1.0))


def test_trace_rejects_ragged_channels():
    with pytest.raises(ValueError):
        Trace(t=np.array([0.0, 1.0]), channels={"a": np.array([1.0])})


def test_trace_times_strictly_increasing():
    with pytest.raises(ValueError):
        Trace(t=np.array([0.0, 0.0]), channels={})


def test_trace_immutable_after_finalize():
    tr = Trace(t=np.array([0.0, 1.0]), channels={"a": np.array([1.0, 2.0])})
    with pytest.raises(ValueError):
        tr.t[0] = 5.0
    with pytest.raises(ValueError):
        tr["a"][0] = 5.0
