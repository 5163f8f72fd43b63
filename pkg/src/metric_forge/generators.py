"""Example families with known ground truth."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .baction import BAction
from .distances import DistanceMatrix
from .errors import InvalidParameterError

DEFAULT_M = 10.0


def _format_point(x: float) -> str:
    return format(float(x), ".17g")


def gen_power_line(points: Sequence[float], q: float) -> tuple[DistanceMatrix, float]:
    """``d(x, y) = |x - y| ** q`` on the given reals, with claimed S = 2^(q-1)."""
    q = float(q)
    if not q >= 1:
        raise InvalidParameterError(f"exponent q must be >= 1, got {q!r}")
    xs = np.asarray(points, dtype=float)
    if len(np.unique(xs)) != len(xs):
        raise InvalidParameterError("points must be distinct")
    d = np.abs(xs[:, None] - xs[None, :]) ** q
    return DistanceMatrix(d, [_format_point(x) for x in xs]), 2.0 ** (q - 1)


def gen_random_b_metric(n: int, seed: int, q: float = 2.0) -> DistanceMatrix:
    """Euclidean distances of ``n`` uniform points in the unit square, raised to ``q``.

    Uses numpy's PCG64 ``default_rng(seed)``; passes ``verify_b_metric``
    with S = 2^(q-1) by convexity of t -> t^q.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be positive, got {n}")
    q = float(q)
    if not q >= 1:
        raise InvalidParameterError(f"exponent q must be >= 1, got {q!r}")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff**2).sum(axis=-1)) ** q
    return DistanceMatrix(d, [f"p{i}" for i in range(n)])


@dataclass(frozen=True)
class BActionFamily:
    name: str
    make: Callable[..., Callable]
    failing_axioms: frozenset[str]
    description: str
    param_names: tuple[str, ...] = ()

    @property
    def positive(self) -> bool:
        return not self.failing_axioms


def _additive():
    return lambda s, t: s + t


def _additive_product():
    return lambda s, t: s + t + s * t


def _squared_sum():
    return lambda s, t: (np.sqrt(s) + np.sqrt(t)) ** 2


def _max():
    return np.maximum


def _shifted(shift: float = 1.0):
    return lambda s, t: s + t + shift


REGISTRY: dict[str, BActionFamily] = {
    f.name: f
    for f in (
        BActionFamily("additive", _additive, frozenset(), "s + t"),
        BActionFamily("additive-product", _additive_product, frozenset(), "s + t + st"),
        BActionFamily("squared-sum", _squared_sum, frozenset(), "(sqrt s + sqrt t)^2"),
        BActionFamily("max", _max, frozenset({"ii"}), "max(s, t); not strictly monotone"),
        # s + t + c also breaks solvability near t = m and theta(s, 0) <= s.
        BActionFamily("shifted", _shifted, frozenset({"i", "iii", "iv"}), "s + t + shift", ("shift",)),
    )
}


def gen_baction(name: str, M: float = DEFAULT_M, budget: int | None = None, **params) -> BAction:
    """Instantiate a registered family on [0, M]^2."""
    try:
        family = REGISTRY[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown B-action {name!r}; choose from {', '.join(sorted(REGISTRY))}"
        ) from None
    unknown = set(params) - set(family.param_names)
    if unknown:
        raise InvalidParameterError(f"{name} takes no parameter(s) {sorted(unknown)}")
    params = {k: float(v) for k, v in params.items()}
    extra = {} if budget is None else {"budget": budget}
    return BAction(family.make(**params), float(M), name, params=params, **extra)
