"""Explicit metrization of b- and theta-metric samples.

Pipeline: snowflake the distances with exponent p, then take the chain
(shortest-path) metric, the largest metric lying below the snowflaked
table. The exponent starts at log 2 / log(2S), the value making
(2S)^p = 2, and is halved while the distortion exceeds a cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .baction import BAction
from .distances import (
    TOL_ABS,
    AxiomReport,
    DistanceMatrix,
    Violation,
    _Collector,
    minimal_relaxation_constant,
)
from .errors import InvalidParameterError, MetrizationError
from .serialization import SCHEMA_VERSION

DISTORTION_CAP = 4.0
RETRY_CAP = 6
CHAIN_RTOL = 1e-12


def snowflake(D: DistanceMatrix, p: float) -> DistanceMatrix:
    """Entrywise ``d ** p`` for p in (0, 1]."""
    p = float(p)
    if not (0 < p <= 1):
        raise InvalidParameterError(f"snowflake exponent must lie in (0, 1], got {p!r}")
    if p == 1:
        return D
    return D.with_values(np.power(D.d, p))


def chain_metric(C: DistanceMatrix) -> DistanceMatrix:
    """All-pairs shortest paths on the complete graph weighted by ``C``.

    Floyd-Warshall, vectorised over each pivot row. The result is the
    infimum of chain sums, i.e. the largest metric pointwise below ``C``.
    """
    d = np.array(C.d, dtype=float)
    for k in range(C.n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return C.with_values(d)


def witness_chain(C: DistanceMatrix, metric: DistanceMatrix, i: int, j: int) -> list[int]:
    """Lexicographically smallest shortest chain from i to j.

    From each vertex the smallest next vertex on some shortest path is
    taken; with positive edge weights that yields the lexicographic minimum
    among shortest paths.
    """
    c, m = C.d, metric.d
    path = [i]
    u = i
    while u != j:
        target = m[u, j]
        slack = c[u] + m[:, j] - target
        tol = CHAIN_RTOL * max(1.0, target) * 4
        candidates = np.flatnonzero((slack <= tol) & (np.arange(C.n) != u))
        candidates = [v for v in candidates if v not in path]
        if not candidates:
            raise RuntimeError(f"no shortest continuation from {u} towards {j}")
        u = int(candidates[0])
        path.append(u)
    return path


def simple_path_minimum(C: DistanceMatrix) -> np.ndarray:
    """Exhaustive minimum over all simple paths, by depth-first search.

    Exponential; meant as an oracle for n <= 8.
    """
    c = C.d
    n = C.n
    best = np.full((n, n), np.inf)
    for src in range(n):
        best[src, src] = 0.0
        stack = [(src, 0.0, 1 << src)]
        while stack:
            u, length, seen = stack.pop()
            for v in range(n):
                if seen >> v & 1:
                    continue
                total = length + c[u, v]
                if total < best[src, v]:
                    best[src, v] = total
                stack.append((v, total, seen | 1 << v))
    return best


@dataclass
class MetrizationResult:
    metric: DistanceMatrix
    p: float
    distortion_max: float
    distortion_min: float
    snowflaked: DistanceMatrix
    S: float
    attempts: list[dict] = field(default_factory=list)
    chains: dict[tuple[int, int], list[int]] | None = None

    @property
    def distortion(self) -> dict:
        return {"max": self.distortion_max, "min": self.distortion_min}

    def to_dict(self, metric_csv_path: str | None = None) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "scope": "sample-scale",
            "p": self.p,
            "S": self.S,
            "distortion": self.distortion,
            "attempts": self.attempts,
            "metric_csv_path": metric_csv_path,
        }
        if self.chains is not None:
            labels = self.metric.labels
            out["chains"] = [
                {"from": labels[i], "to": labels[j], "path": [labels[k] for k in path]}
                for (i, j), path in sorted(self.chains.items())
            ]
        return out


def _distortion(snow: np.ndarray, metric: np.ndarray) -> tuple[float, float]:
    off = ~np.eye(snow.shape[0], dtype=bool)
    if not off.any():
        return 1.0, 1.0
    ratio = snow[off] / metric[off]
    return float(ratio.max()), float(ratio.min())


def initial_exponent(S: float) -> float:
    """p = 1 for S <= 1, else log 2 / log(2 S)."""
    return 1.0 if S <= 1 else math.log(2.0) / math.log(2.0 * S)


def metrize_b(
    D: DistanceMatrix,
    S: float,
    distortion_cap: float = DISTORTION_CAP,
    retry_cap: int = RETRY_CAP,
    chains: bool = False,
) -> MetrizationResult:
    """Build ``chain_metric(snowflake(D, p))`` and certify its distortion.

    Raises :class:`MetrizationError` carrying the least distorted attempt
    if the cap is still exceeded after ``retry_cap`` halvings of p.
    """
    if not (math.isfinite(S) and S > 0):
        raise InvalidParameterError(f"relaxation constant S must be positive, got {S!r}")
    if not distortion_cap >= 1:
        raise InvalidParameterError("distortion_cap must be at least 1")
    p = initial_exponent(S)
    attempts: list[dict] = []
    best: MetrizationResult | None = None
    for _ in range(retry_cap + 1):
        snow = snowflake(D, p)
        metric = chain_metric(snow)
        dmax, dmin = _distortion(snow.d, metric.d)
        attempts.append({"p": p, "distortion_max": dmax})
        result = MetrizationResult(metric, p, dmax, dmin, snow, float(S), attempts)
        if best is None or dmax < best.distortion_max:
            best = result
        if dmax <= distortion_cap:
            if chains:
                result.chains = {
                    (i, j): witness_chain(snow, metric, i, j)
                    for i in range(D.n) for j in range(D.n) if i != j
                }
            return result
        p *= 0.5
    best.attempts = attempts
    raise MetrizationError(
        f"distortion {best.distortion_max:.6g} exceeds cap {distortion_cap} after {retry_cap} retries",
        best,
    )


def effective_relaxation(D: DistanceMatrix, theta: BAction) -> float:
    """max theta(a, b) / (a + b) over leg pairs realised by ordered triples."""
    d = D.d
    best = 0.0
    for y in range(D.n):
        a = d[:, y][:, None]
        b = d[y, :][None, :]
        den = a + b
        mask = den > 0
        if not mask.any():
            continue
        vals = np.asarray(theta(np.broadcast_to(a, den.shape)[mask], np.broadcast_to(b, den.shape)[mask]))
        best = max(best, float(np.max(vals / den[mask])))
    return best


def metrize_theta(D: DistanceMatrix, theta: BAction, **kwargs) -> MetrizationResult:
    """Reduce to :func:`metrize_b` with S = max(S_eff, minimal constant)."""
    if D.n <= 1:
        return MetrizationResult(D, 1.0, 1.0, 1.0, D, 1.0, [{"p": 1.0, "distortion_max": 1.0}])
    S = max(effective_relaxation(D, theta), minimal_relaxation_constant(D))
    return metrize_b(D, S, **kwargs)


def equivalence_check(
    D: DistanceMatrix,
    R: MetrizationResult,
    tol_abs: float = TOL_ABS,
    max_witnesses: int | None = None,
) -> AxiomReport:
    """Re-verify a metrization: triangle inequality, upper bound, zero set, two-sided bound.

    Tags: ``triangle``, ``upper-bound``, ``zero-set``, ``lower-bound``.
    """
    snow = np.power(D.d, R.p)
    m = R.metric.d
    n = D.n
    col = _Collector(max_witnesses)
    slackness = tol_abs + CHAIN_RTOL * np.maximum(snow, m)

    for y in range(n):
        rhs = m[:, y][:, None] + m[y, :][None, :]
        bad = m > rhs + tol_abs + CHAIN_RTOL * rhs
        total = int(np.count_nonzero(bad))
        if total:
            col.add_bulk("triangle", total, (
                Violation("triangle", (int(x), y, int(z)), float(m[x, z]), float(rhs[x, z]),
                          float(m[x, z] - rhs[x, z]))
                for x, z in np.argwhere(bad)
            ))

    for i, j in np.argwhere(m > snow + slackness):
        col.add(Violation("upper-bound", (int(i), int(j)), float(m[i, j]), float(snow[i, j]),
                          float(m[i, j] - snow[i, j])))

    for i, j in np.argwhere((m == 0) != (D.d == 0)):
        col.add(Violation("zero-set", (int(i), int(j)), float(m[i, j]), float(D.d[i, j]),
                          abs(float(m[i, j] - D.d[i, j]))))

    lower = snow / R.distortion_max
    for i, j in np.argwhere(m < lower - slackness):
        col.add(Violation("lower-bound", (int(i), int(j)), float(m[i, j]), float(lower[i, j]),
                          float(lower[i, j] - m[i, j])))

    return col.report(checked=n**3 + 3 * n * n, notes=["sample-scale equivalence certificate"])
