"""Exception hierarchy.

Malformed input and bad parameters are kept apart from mathematical
failures: the CLI maps the former to exit code 2 and the latter to 1.
"""

from __future__ import annotations


class MetricForgeError(Exception):
    """Base class for every error raised by this package."""


class MalformedInputError(MetricForgeError, ValueError):
    """Input is structurally broken (non-square, NaN, negative, unparsable)."""


class InvalidParameterError(MetricForgeError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class EvaluationError(MetricForgeError, RuntimeError):
    """A B-action could not be evaluated (exception, non-finite value, budget)."""

    def __init__(self, message: str, axiom: str | None = None):
        if axiom is not None:
            message = f"axiom ({axiom}): {message}"
        super().__init__(message)
        self.axiom = axiom


class SolvabilityError(MetricForgeError):
    """theta(., t) - m has no sign change on [0, m]."""

    def __init__(self, m: float, t: float, left: float, right: float):
        super().__init__(
            f"no s in [0, {m!r}] with theta(s, {t!r}) = {m!r} "
            f"(bracket values {left!r} vs target {right!r})"
        )
        self.m = m
        self.t = t
        self.left = left
        self.right = right


class ContinuityError(MetricForgeError):
    """No delta above the floor keeps the sampled supremum below epsilon."""

    def __init__(self, epsilon: float, delta_floor: float, sup_observed: float):
        super().__init__(
            f"theta is not continuous at the origin for eps={epsilon!r}: "
            f"sampled sup {sup_observed!r} >= eps even at delta={delta_floor!r}"
        )
        self.epsilon = epsilon
        self.delta_floor = delta_floor
        self.sup_observed = sup_observed


class MetrizationError(MetricForgeError):
    """Distortion cap was not met; ``best`` holds the least distorted attempt."""

    def __init__(self, message: str, best):
        super().__init__(message)
        self.best = best
