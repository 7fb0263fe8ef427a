"""Exception hierarchy for the ring-tumbling toolkit."""


class RingTumbleError(Exception):
    """Base class for all toolkit errors."""


class Infeasible(RingTumbleError):
    """Requested shape or signal violates the fixed-perimeter bound."""


class DegenerateEllipse(RingTumbleError):
    """A semi-axis collapsed below the 1e-6 m guard."""


class DegenerateContact(RingTumbleError):
    """Ring plane within 1e-6 rad of the ground plane; support point undefined."""


class SingularMassMatrix(RingTumbleError):
    """Mass matrix condition number exceeded 1e12 (near-singular orientation)."""


class ContactLoss(RingTumbleError):
    """Predicted normal force crossed zero; rolling model invalid past this time."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"contact lost at t = {time:.6f} s (normal force crossed zero)")


class StepSizeUnderflow(RingTumbleError):
    """Adaptive integrator needed a step below h_min."""


class StepBudgetExceeded(RingTumbleError):
    """Adaptive integrator ran out of its step budget."""


class NonFiniteDerivative(RingTumbleError):
    """RHS returned NaN or Inf during adaptive integration."""


class NonFiniteState(RingTumbleError):
    """Fixed-step simulation state became non-finite (time step too large)."""

    def __init__(self, step_index: int):
        self.step_index = step_index
        super().__init__(f"state became non-finite at step {step_index}")


class ParseError(RingTumbleError):
    """Malformed scenario configuration text."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class ChannelMismatch(RingTumbleError):
    """Traces do not share the channels required for comparison."""
