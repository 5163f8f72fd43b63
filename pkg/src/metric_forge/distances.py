"""Finite distance samples and the b-metric / theta-metric axiom checks.

Every triple check here runs over *all* ordered triples ``(x, y, z)``,
degenerate ones included, and is vectorised over ``(x, z)`` for each
middle point ``y``. That keeps the Theta(n^3) scans well under a second
for n = 500.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidParameterError, MalformedInputError

TOL_ABS = 1e-9
DEFAULT_MAX_N = 2000


def max_n() -> int:
    """Dense-matrix size cap, overridable via ``METRIC_FORGE_MAX_N``."""
    raw = os.environ.get("METRIC_FORGE_MAX_N")
    if not raw:
        return DEFAULT_MAX_N
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidParameterError(f"METRIC_FORGE_MAX_N={raw!r} is not an integer") from exc
    if value < 1:
        raise InvalidParameterError("METRIC_FORGE_MAX_N must be positive")
    return value


@dataclass(frozen=True)
class PointSet:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            seen: set[str] = set()
            dup = next(label for label in labels if label in seen or seen.add(label))
            raise MalformedInputError(f"duplicate point label {dup!r}")

    @property
    def n(self) -> int:
        return len(self.labels)

    @classmethod
    def range(cls, n: int) -> "PointSet":
        return cls(tuple(str(i) for i in range(n)))


class DistanceMatrix:
    """Dense n x n table of nonnegative finite distances with point labels.

    Construction only checks *structure* (square, finite, nonnegative,
    size cap). Symmetry and identity of indiscernibles are axioms and are
    reported by :func:`check_point_axioms` rather than raised here.
    """

    __slots__ = ("points", "d")

    def __init__(self, d, labels: Sequence[str] | PointSet | None = None):
        arr = np.array(d, dtype=float)
        if arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise MalformedInputError(f"distance table must be square, got shape {arr.shape}")
        n = arr.shape[0]
        if n > max_n():
            raise MalformedInputError(f"n={n} exceeds the configured cap {max_n()}")
        if not np.all(np.isfinite(arr)):
            raise MalformedInputError("distance table contains NaN or infinite entries")
        if np.any(arr < 0):
            i, j = np.argwhere(arr < 0)[0]
            raise MalformedInputError(f"negative distance d[{i}][{j}]={arr[i, j]!r}")
        if labels is None:
            points = PointSet.range(n)
        elif isinstance(labels, PointSet):
            points = labels
        else:
            points = PointSet(tuple(labels))
        if points.n != n:
            raise MalformedInputError(f"{points.n} labels for a {n}x{n} table")
        arr.setflags(write=False)
        self.points = points
        self.d = arr

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @property
    def labels(self) -> tuple[str, ...]:
        return self.points.labels

    def __getitem__(self, idx):
        return self.d[idx]

    def __repr__(self) -> str:
        return f"DistanceMatrix(n={self.n})"

    def with_values(self, d) -> "DistanceMatrix":
        """Same points, new table."""
        return DistanceMatrix(d, self.points)

    def max_entry(self) -> float:
        return float(self.d.max()) if self.n else 0.0

    def min_positive_entry(self) -> float | None:
        positive = self.d[self.d > 0]
        return float(positive.min()) if positive.size else None

    def off_diagonal(self) -> np.ndarray:
        return self.d[~np.eye(self.n, dtype=bool)]


@dataclass(frozen=True)
class Violation:
    """One failed axiom instance.

    ``witness`` holds point indices for distance checks and coordinate
    pairs for B-action checks. ``slack`` is how far the requirement is
    missed (zero for equality in a strict inequality). ``scale`` carries
    the epsilon of a uniform-regularity violation.
    """

    axiom: str
    witness: tuple
    left: float
    right: float
    slack: float
    scale: float | None = None

    def to_dict(self) -> dict:
        out = {
            "axiom": self.axiom,
            "witness": [list(w) if isinstance(w, tuple) else w for w in self.witness],
            "left": self.left,
            "right": self.right,
            "slack": self.slack,
        }
        if self.scale is not None:
            out["epsilon"] = self.scale
        return out


@dataclass
class AxiomReport:
    """Outcome of a finite axiom check.

    ``violations`` may be truncated to ``max_witnesses`` entries;
    ``n_violations`` always counts all of them, so ``passed`` is exact.
    """

    violations: list[Violation] = field(default_factory=list)
    n_violations: int = 0
    checked: int = 0
    notes: list[str] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    def axioms_failed(self) -> set[str]:
        return {tag for tag, count in self.counts.items() if count}

    def by_axiom(self, *tags: str) -> "AxiomReport":
        keep = [v for v in self.violations if v.axiom in tags]
        counts = {t: c for t, c in self.counts.items() if t in tags}
        return AxiomReport(keep, sum(counts.values()), self.checked, list(self.notes), counts)

    def merge(self, other: "AxiomReport") -> "AxiomReport":
        counts = dict(self.counts)
        for tag, c in other.counts.items():
            counts[tag] = counts.get(tag, 0) + c
        return AxiomReport(
            self.violations + other.violations,
            self.n_violations + other.n_violations,
            self.checked + other.checked,
            self.notes + [n for n in other.notes if n not in self.notes],
            counts,
        )

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_violations": self.n_violations,
            "checked": self.checked,
            "violations": [v.to_dict() for v in self.violations],
            "counts": dict(self.counts),
            "notes": list(self.notes),
        }


class _Collector:
    def __init__(self, max_witnesses: int | None):
        self.max_witnesses = max_witnesses
        self.violations: list[Violation] = []
        self.count = 0
        self.counts: dict[str, int] = {}

    @property
    def full(self) -> bool:
        return self.max_witnesses is not None and len(self.violations) >= self.max_witnesses

    def add(self, v: Violation) -> None:
        self.count += 1
        self.counts[v.axiom] = self.counts.get(v.axiom, 0) + 1
        if not self.full:
            self.violations.append(v)

    def room(self) -> int | None:
        if self.max_witnesses is None:
            return None
        return max(0, self.max_witnesses - len(self.violations))

    def add_bulk(self, tag: str, total: int, records: Iterable[Violation]) -> None:
        """Count ``total`` violations but materialise only what fits."""
        self.count += total
        self.counts[tag] = self.counts.get(tag, 0) + total
        room = self.room()
        for k, v in enumerate(records):
            if room is not None and k >= room:
                break
            self.violations.append(v)

    def report(self, checked: int, notes: Iterable[str] = ()) -> AxiomReport:
        self.violations.sort(key=lambda v: (v.axiom, v.scale or 0.0, v.witness))
        return AxiomReport(self.violations, self.count, checked, list(notes), dict(self.counts))


def _require_tol(tol_abs: float) -> None:
    if not tol_abs >= 0:
        raise InvalidParameterError(f"tol_abs must be nonnegative, got {tol_abs!r}")


def check_point_axioms(
    D: DistanceMatrix, tol_abs: float = TOL_ABS, max_witnesses: int | None = None
) -> AxiomReport:
    """Identity of indiscernibles and symmetry.

    Tags: ``identity`` (nonzero diagonal), ``positivity`` (zero
    off-diagonal), ``symmetry`` (each unordered pair reported once).
    """
    _require_tol(tol_abs)
    d = D.d
    n = D.n
    col = _Collector(max_witnesses)
    for i in np.flatnonzero(np.abs(np.diag(d)) > tol_abs):
        col.add(Violation("identity", (int(i), int(i)), float(d[i, i]), 0.0, float(d[i, i])))
    off = ~np.eye(n, dtype=bool)
    for i, j in np.argwhere((d <= 0) & off):
        col.add(Violation("positivity", (int(i), int(j)), float(d[i, j]), 0.0, -float(d[i, j])))
    upper = np.triu(np.abs(d - d.T) > tol_abs, k=1)
    for i, j in np.argwhere(upper):
        gap = abs(float(d[i, j]) - float(d[j, i]))
        col.add(Violation("symmetry", (int(i), int(j)), float(d[i, j]), float(d[j, i]), gap))
    return col.report(checked=n * n)


def _max_ratio(d: np.ndarray) -> tuple[float, tuple[int, int, int] | None]:
    best = 0.0
    witness = None
    n = d.shape[0]
    for y in range(n):
        den = d[:, y][:, None] + d[y, :][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den > 0, d / den, -np.inf)
        k = int(np.argmax(ratio))
        if ratio.flat[k] > best:
            best = float(ratio.flat[k])
            x, z = divmod(k, n)
            witness = (x, y, z)
    return best, witness


def minimal_relaxation_constant(D: DistanceMatrix) -> float:
    """Smallest S with d(x,z) <= S (d(x,y) + d(y,z)) on every ordered triple.

    Degenerate triples count, so the result is at least 1 whenever n >= 2
    (take y = x). Returns 0.0 for n <= 1.
    """
    return _max_ratio(D.d)[0]


def relaxation_witness(D: DistanceMatrix) -> tuple[float, tuple[int, int, int] | None]:
    """Like :func:`minimal_relaxation_constant` but also returns an attaining triple."""
    return _max_ratio(D.d)


def _triangle_scan(
    D: DistanceMatrix,
    bound: Callable[[np.ndarray, np.ndarray], np.ndarray],
    tag: str,
    tol_abs: float,
    col: _Collector,
    guard: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> int:
    d = D.d
    n = D.n
    for y in range(n):
        a = d[:, y][:, None]
        b = d[y, :][None, :]
        rhs = np.broadcast_to(bound(a, b), (n, n))
        bad = d > rhs + tol_abs
        if guard is not None and bad.any():
            bad &= guard(d, a, b)
        total = int(np.count_nonzero(bad))
        if total:
            col.add_bulk(tag, total, (
                Violation(tag, (int(x), y, int(z)), float(d[x, z]), float(rhs[x, z]),
                          float(d[x, z]) - float(rhs[x, z]))
                for x, z in np.argwhere(bad)
            ))
    return n**3


def verify_b_metric(
    D: DistanceMatrix,
    S: float,
    tol_abs: float = TOL_ABS,
    max_witnesses: int | None = None,
) -> AxiomReport:
    """Point axioms plus the relaxed triangle inequality with constant ``S``.

    A triple is flagged when ``d(x,z) > S (d(x,y) + d(y,z)) + tol_abs`` and
    its ratio genuinely exceeds ``S``; the second condition keeps
    ``S = minimal_relaxation_constant(D)`` passing on large-magnitude data.
    """
    if not (np.isfinite(S) and S > 0):
        raise InvalidParameterError(f"relaxation constant S must be positive, got {S!r}")
    _require_tol(tol_abs)
    points = check_point_axioms(D, tol_abs, max_witnesses)
    col = _Collector(None if max_witnesses is None else max(0, max_witnesses - len(points.violations)))

    def exceeds(d, a, b):
        den = a + b
        with np.errstate(divide="ignore", invalid="ignore"):
            return (den == 0) | (d / den > S)

    checked = _triangle_scan(D, lambda a, b: S * (a + b), "relaxed-triangle", tol_abs, col, exceeds)
    return points.merge(col.report(checked))


def verify_theta_metric(
    D: DistanceMatrix,
    theta,
    tol_abs: float = TOL_ABS,
    max_witnesses: int | None = None,
) -> AxiomReport:
    """Point axioms plus ``d(x,z) <= theta(d(x,y), d(y,z))`` on all triples.

    ``theta`` is a :class:`~metric_forge.baction.BAction` (or any callable
    accepting broadcastable arrays). Evaluation errors propagate.
    """
    _require_tol(tol_abs)
    points = check_point_axioms(D, tol_abs, max_witnesses)
    col = _Collector(None if max_witnesses is None else max(0, max_witnesses - len(points.violations)))
    checked = _triangle_scan(D, lambda a, b: np.asarray(theta(a, b), dtype=float), "theta-triangle", tol_abs, col)
    return points.merge(col.report(checked))


def is_metric(D: DistanceMatrix, tol_abs: float = TOL_ABS) -> bool:
    """Direct scan: point axioms and the ordinary triangle inequality."""
    return verify_b_metric(D, 1.0, tol_abs, max_witnesses=1).passed
