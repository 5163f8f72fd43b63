"""Uniform-regularity moduli and the three-condition metrizability gate.

A modulus phi maps epsilon to a radius such that two legs shorter than
phi(epsilon) force the third side below epsilon. For b-metrics the
modulus is the closed form epsilon / (2S); for theta-metrics it is
delta / sqrt(2) with delta taken from a continuity certificate of theta
at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baction import BAction, ContinuityCertificate, origin_continuity_delta
from .distances import AxiomReport, DistanceMatrix, Violation, _Collector, check_point_axioms
from .errors import InvalidParameterError
from .serialization import SCHEMA_VERSION

B_METRIC = "b-metric-closed-form"
THETA = "theta-numeric"
SAMPLE_SCALE_NOTE = (
    "sample-scale certificate: no counterexample on this sample and epsilon grid; "
    "this is not a proof of metrizability"
)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} must be a positive real, got {value!r}")
    return value


def modulus_b_metric(S: float, epsilon: float) -> float:
    """phi(epsilon) = epsilon / (2 S)."""
    S = _positive("S", S)
    epsilon = _positive("epsilon", epsilon)
    return epsilon / (2.0 * S)


def modulus_theta(theta: BAction, epsilon: float, **search) -> float:
    """phi(epsilon) = delta / sqrt(2), delta from :func:`origin_continuity_delta`."""
    cert = origin_continuity_delta(theta, _positive("epsilon", epsilon), **search)
    return cert.delta / math.sqrt(2.0)


@dataclass
class RegularityModulus:
    kind: str
    table: list[tuple[float, float]]
    parameters: dict = field(default_factory=dict)
    certificates: list[ContinuityCertificate] = field(default_factory=list)

    def __post_init__(self):
        for eps, phi in self.table:
            if not (eps > 0 and phi > 0):
                raise InvalidParameterError(f"modulus entries must be positive, got ({eps}, {phi})")
        ordered = sorted(self.table)
        for (e1, p1), (e2, p2) in zip(ordered, ordered[1:]):
            if p2 < p1:
                raise InvalidParameterError(f"modulus decreases between eps={e1} and eps={e2}")

    def __call__(self, epsilon: float) -> float:
        if self.kind == B_METRIC:
            return modulus_b_metric(self.parameters["S"], epsilon)
        for eps, phi in self.table:
            if math.isclose(eps, epsilon, rel_tol=1e-12, abs_tol=0.0):
                return phi
        raise InvalidParameterError(f"modulus is not tabulated at epsilon={epsilon!r}")

    @property
    def epsilons(self) -> list[float]:
        return [eps for eps, _ in self.table]

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "table": [{"epsilon": e, "phi": p} for e, p in self.table],
            "parameters": dict(self.parameters),
        }
        if self.certificates:
            out["certificates"] = [c.to_dict() for c in self.certificates]
        return out


def b_metric_modulus(S: float, epsilons: Sequence[float]) -> RegularityModulus:
    table = [(float(e), modulus_b_metric(S, e)) for e in sorted(epsilons)]
    return RegularityModulus(B_METRIC, table, {"S": float(S)})


def theta_modulus(theta: BAction, epsilons: Sequence[float], **search) -> RegularityModulus:
    """Tabulate delta / sqrt(2) over ``epsilons``.

    Bisection noise can leave the raw table non-monotone by a hair; each
    entry is replaced by the minimum over all larger epsilons. Shrinking
    phi never breaks uniform regularity, so this stays sound.
    """
    certs = [origin_continuity_delta(theta, _positive("epsilon", e), **search) for e in sorted(epsilons)]
    raw = [c.delta / math.sqrt(2.0) for c in certs]
    phis = list(np.minimum.accumulate(raw[::-1])[::-1]) if raw else []
    table = [(c.epsilon, float(p)) for c, p in zip(certs, phis)]
    return RegularityModulus(THETA, table, {"theta": theta.describe()}, certs)


def default_epsilon_grid(D: DistanceMatrix, k: int = 16) -> list[float]:
    """``k`` log-spaced values over [min positive entry / 2, 2 * max entry]."""
    lo = D.min_positive_entry()
    if lo is None:
        return [1.0]
    hi = 2.0 * D.max_entry()
    return [float(e) for e in np.geomspace(lo / 2.0, hi, k)]


def verify_uniform_regularity(
    D: DistanceMatrix,
    modulus: RegularityModulus,
    epsilons: Sequence[float] | None = None,
    max_witnesses: int | None = None,
) -> AxiomReport:
    """List ordered triples with both legs below phi(eps) but d(x, z) >= eps.

    Legs equal to phi(eps) are outside the hypothesis. Triples with x = z
    are never flagged: there any positive radius works.
    """
    if epsilons is None:
        epsilons = modulus.epsilons if modulus.kind == THETA else default_epsilon_grid(D)
    d = D.d
    n = D.n
    col = _Collector(max_witnesses)
    for eps in epsilons:
        eps = _positive("epsilon", eps)
        phi = modulus(eps)
        for y in range(n):
            xs = np.flatnonzero(d[:, y] < phi)
            zs = np.flatnonzero(d[y, :] < phi)
            if xs.size == 0 or zs.size == 0:
                continue
            block = (d[np.ix_(xs, zs)] >= eps) & (xs[:, None] != zs[None, :])
            total = int(np.count_nonzero(block))
            if total:
                col.add_bulk("uniform-regularity", total, (
                    Violation("uniform-regularity", (int(xs[a]), y, int(zs[b])),
                              float(d[xs[a], zs[b]]), eps, float(d[xs[a], zs[b]]) - eps, eps)
                    for a, b in np.argwhere(block)
                ))
    return col.report(checked=len(epsilons) * n**3, notes=[SAMPLE_SCALE_NOTE])


@dataclass
class ChittendenCertificate:
    conditions: dict[str, AxiomReport]
    epsilon_grid: list[float]
    modulus: RegularityModulus

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.conditions.values())

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "scope": "sample-scale",
            "passed": self.passed,
            "conditions": {
                key: {"passed": r.passed, "n_violations": r.n_violations} for key, r in self.conditions.items()
            },
            "epsilon_grid": list(self.epsilon_grid),
            "modulus": self.modulus.to_dict(),
            "witnesses": {key: [v.to_dict() for v in r.violations] for key, r in self.conditions.items()},
            "notes": [SAMPLE_SCALE_NOTE],
        }


def chittenden_gate(
    D: DistanceMatrix,
    modulus: RegularityModulus,
    epsilons: Sequence[float] | None = None,
    tol_abs: float = 1e-9,
    max_witnesses: int | None = None,
) -> ChittendenCertificate:
    """Bundle conditions (i) identity, (ii) symmetry, (iii) uniform regularity."""
    if epsilons is None:
        epsilons = modulus.epsilons if modulus.kind == THETA else default_epsilon_grid(D)
    points = check_point_axioms(D, tol_abs, max_witnesses)
    conditions = {
        "i": points.by_axiom("identity", "positivity"),
        "ii": points.by_axiom("symmetry"),
        "iii": verify_uniform_regularity(D, modulus, epsilons, max_witnesses),
    }
    return ChittendenCertificate(conditions, [float(e) for e in epsilons], modulus)
