"""B-actions as black-box binary functions, and finite checks of their axioms.

Continuity in each variable is assumed by the definition and cannot be
established from samples; everything here is falsification at a declared
grid resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .distances import TOL_ABS, AxiomReport, Violation, _Collector
from .errors import ContinuityError, EvaluationError, InvalidParameterError, SolvabilityError

DEFAULT_BUDGET = 2**26
DEFAULT_GRID_N = 64
BISECTION_MAX_ITER = 200

GRID_NOTE = (
    "sample-scale: checked on a {n}x{n} grid over [0, {M:g}]^2 only; "
    "continuity in each variable is assumed, not checked"
)


@dataclass(frozen=True)
class BAction:
    """A candidate B-action theta on [0, M]^2.

    ``func`` must accept broadcastable float arrays (wrap scalar-only code
    with ``np.vectorize``). Calls validate that results are finite and
    nonnegative.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    M: float
    name: str = "theta"
    budget: int = DEFAULT_BUDGET
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.M) and self.M > 0):
            raise InvalidParameterError(f"range bound M must be positive, got {self.M!r}")
        if self.budget < 1:
            raise InvalidParameterError("evaluation budget must be positive")

    def __call__(self, s, t):
        s_arr, t_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        try:
            out = np.asarray(self.func(s_arr, t_arr), dtype=float)
        except EvaluationError:
            raise
        except Exception as exc:
            raise EvaluationError(f"{self.name} raised {exc!r}") from exc
        out = np.broadcast_to(out, s_arr.shape)
        if not np.all(np.isfinite(out)):
            raise EvaluationError(f"{self.name} returned a non-finite value")
        if np.any(out < 0):
            raise EvaluationError(f"{self.name} returned a negative value")
        if out.ndim == 0:
            return float(out)
        return out

    def describe(self) -> dict:
        return {"name": self.name, "M": self.M, "params": dict(self.params)}


class _Meter:
    """Counts evaluations against the budget and tags failures with an axiom."""

    def __init__(self, theta: BAction, axiom: str = ""):
        self.theta = theta
        self.axiom = axiom
        self.used = 0

    def __call__(self, s, t):
        size = int(np.broadcast(np.asarray(s), np.asarray(t)).size)
        if self.used + size > self.theta.budget:
            raise EvaluationError(
                f"evaluation budget {self.theta.budget} exhausted", axiom=self.axiom or None
            )
        self.used += size
        try:
            return self.theta(s, t)
        except EvaluationError as exc:
            if exc.axiom is None and self.axiom:
                raise EvaluationError(str(exc), axiom=self.axiom) from exc
            raise


def _metered(theta) -> _Meter:
    return theta if isinstance(theta, _Meter) else _Meter(theta)


def solve_axiom_iii(theta, m: float, t: float, tol_root: float | None = None) -> float:
    """Find s in [0, m] with theta(s, t) = m by bisection.

    theta(., t) is increasing by axiom (ii), so the root is unique when it
    exists. Raises :class:`SolvabilityError` if theta(0, t) > m or
    theta(m, t) < m beyond ``tol_root`` (default ``1e-10 * max(1, m)``).
    """
    m = float(m)
    t = float(t)
    if not (np.isfinite(m) and m >= 0):
        raise InvalidParameterError(f"m must be a nonnegative real, got {m!r}")
    if not 0 <= t <= m:
        raise InvalidParameterError(f"t={t!r} must lie in [0, m={m!r}]")
    M = theta.theta.M if isinstance(theta, _Meter) else theta.M
    if m > M:
        raise InvalidParameterError(f"m={m!r} exceeds the evaluation range M={M!r}")
    if tol_root is None:
        tol_root = 1e-10 * max(1.0, m)
    f = _metered(theta)

    lo, hi = 0.0, m
    f_lo = f(lo, t) - m
    if abs(f_lo) <= tol_root:
        return lo
    f_hi = f(hi, t) - m
    if abs(f_hi) <= tol_root:
        return hi
    if f_lo > 0:
        raise SolvabilityError(m, t, f_lo + m, m)
    if f_hi < 0:
        raise SolvabilityError(m, t, f_hi + m, m)
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid, t) - m
        if abs(f_mid) <= tol_root:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    # Bracket collapsed without meeting tolerance: theta(., t) jumps over m.
    raise SolvabilityError(m, t, f(lo, t), m)


def _image_samples(values: np.ndarray, M: float, k: int) -> np.ndarray:
    image = np.unique(values[values <= M])
    if image.size <= k:
        return image
    idx = np.unique(np.linspace(0, image.size - 1, k).round().astype(int))
    return image[idx]


def check_baction_axioms(
    theta: BAction,
    grid_n: int = DEFAULT_GRID_N,
    tol_abs: float = TOL_ABS,
    t_samples: int = 8,
    max_witnesses: int | None = None,
    tol_root: float | None = None,
) -> AxiomReport:
    """Check the four B-action axioms on a uniform grid over [0, M]^2.

    Violation tags are the roman axiom numbers ``"i"`` to ``"iv"``.
    Axiom (ii) is tested along axis-aligned chains of neighbouring grid
    points; strict monotonicity composes along chains, so this covers all
    comparable grid pairs. Equality counts as a violation.
    """
    if grid_n < 2:
        raise InvalidParameterError(f"grid_n must be at least 2, got {grid_n}")
    if grid_n**2 + grid_n**4 > theta.budget:
        raise InvalidParameterError(
            f"grid_n={grid_n} needs grid_n^2 + grid_n^4 within budget {theta.budget}"
        )
    f = _Meter(theta)
    col = _Collector(max_witnesses)
    g = np.linspace(0.0, theta.M, grid_n)
    S, T = np.meshgrid(g, g, indexing="ij")
    gl = g.tolist()

    f.axiom = "i"
    origin = f(0.0, 0.0)
    if abs(origin) > tol_abs:
        col.add(Violation("i", ((0.0, 0.0),), origin, 0.0, abs(origin)))
    vals = f(S, T)
    asym = np.triu(np.abs(vals - vals.T) > tol_abs, k=1)
    for i, j in np.argwhere(asym):
        a, b = float(vals[i, j]), float(vals[j, i])
        col.add(Violation("i", ((gl[i], gl[j]), (gl[j], gl[i])), a, b, abs(a - b)))

    f.axiom = "ii"
    # Neighbours in t with s fixed, then neighbours in s with t fixed.
    bad_t = vals[:, :-1] >= vals[:, 1:]
    for i, j in np.argwhere(bad_t):
        a, b = float(vals[i, j]), float(vals[i, j + 1])
        col.add(Violation("ii", ((gl[i], gl[j]), (gl[i], gl[j + 1])), a, b, a - b))
    bad_s = vals[:-1, :] >= vals[1:, :]
    for i, j in np.argwhere(bad_s):
        a, b = float(vals[i, j]), float(vals[i + 1, j])
        col.add(Violation("ii", ((gl[i], gl[j]), (gl[i + 1], gl[j])), a, b, a - b))

    f.axiom = "iii"
    for m in _image_samples(vals, theta.M, grid_n):
        m = float(m)
        for t in np.linspace(0.0, m, t_samples) if m > 0 else [0.0]:
            try:
                solve_axiom_iii(f, m, float(t), tol_root)
            except SolvabilityError as exc:
                col.add(Violation("iii", ((m, float(t)),), exc.left, exc.right, abs(exc.left - exc.right)))

    f.axiom = "iv"
    edge = vals[1:, 0]
    for k in np.flatnonzero(edge > g[1:] + tol_abs):
        s = gl[k + 1]
        col.add(Violation("iv", ((s, 0.0),), float(edge[k]), s, float(edge[k]) - s))

    report = col.report(checked=f.used, notes=[GRID_NOTE.format(n=grid_n, M=theta.M)])
    return report


@dataclass(frozen=True)
class ContinuityCertificate:
    """Sampled evidence that theta < epsilon on the quarter disk of radius delta."""

    epsilon: float
    delta: float
    sup_observed: float
    grid_resolution: int
    stable: bool = True

    def __post_init__(self):
        if not self.delta > 0:
            raise InvalidParameterError("certificate delta must be positive")

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "sup_observed": self.sup_observed,
            "grid_resolution": self.grid_resolution,
            "stable": self.stable,
        }


def quarter_disk_sup(theta, delta: float, resolution: int) -> float:
    """Max of theta over a sampled {s, t >= 0, s^2 + t^2 <= delta^2}.

    Samples an (r+1)^2 lattice clipped to the disk plus 4r+1 points on the
    bounding arc; the arc sample always contains the diagonal direction.
    """
    r = int(resolution)
    lin = np.linspace(0.0, delta, r + 1)
    S, T = np.meshgrid(lin, lin, indexing="ij")
    inside = S**2 + T**2 <= delta**2
    angles = np.linspace(0.0, math.pi / 2, 4 * r + 1)
    s = np.concatenate([S[inside], np.clip(delta * np.cos(angles), 0.0, delta)])
    t = np.concatenate([T[inside], np.clip(delta * np.sin(angles), 0.0, delta)])
    return float(np.max(theta(s, t)))


def _delta_at_resolution(f, eps, r, delta0, floor, rel_width):
    delta = delta0
    hi = None
    sup = quarter_disk_sup(f, delta, r)
    while sup >= eps:
        hi = delta
        delta *= 0.5
        if delta < floor:
            raise ContinuityError(eps, floor, sup)
        sup = quarter_disk_sup(f, delta, r)
    if hi is None:
        return delta, sup
    lo, lo_sup = delta, sup
    while hi - lo > rel_width * lo:
        mid = 0.5 * (lo + hi)
        mid_sup = quarter_disk_sup(f, mid, r)
        if mid_sup < eps:
            lo, lo_sup = mid, mid_sup
        else:
            hi = mid
    return lo, lo_sup


def origin_continuity_delta(
    theta: BAction,
    epsilon: float,
    tol_rel: float = 1e-4,
    start_resolution: int = 16,
    max_resolution: int = 256,
    delta_floor: float | None = None,
) -> ContinuityCertificate:
    """Largest sampled delta with sup theta < epsilon on the delta quarter disk.

    Halves delta from ``min(M, epsilon)`` until the sampled supremum drops
    below ``epsilon``, then bisects between the last failing and first
    passing radius. The sampling resolution doubles until two consecutive
    refinements agree to ``tol_rel``.
    """
    epsilon = float(epsilon)
    if not (np.isfinite(epsilon) and epsilon > 0):
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon!r}")
    if delta_floor is None:
        delta_floor = 1e-12 * theta.M
    f = _Meter(theta, axiom="continuity")
    delta0 = min(theta.M, epsilon)
    rel_width = min(tol_rel, 1e-6) * 1e-3

    history: list[tuple[int, float, float]] = []
    r = start_resolution
    while True:
        delta, sup = _delta_at_resolution(f, epsilon, r, delta0, delta_floor, rel_width)
        history.append((r, delta, sup))
        if len(history) >= 3:
            d1, d2, d3 = (h[1] for h in history[-3:])
            if abs(d3 - d2) <= tol_rel * d3 and abs(d2 - d1) <= tol_rel * d3:
                return ContinuityCertificate(epsilon, delta, sup, r, True)
        if r * 2 > max_resolution:
            return ContinuityCertificate(epsilon, delta, sup, r, False)
        r *= 2
