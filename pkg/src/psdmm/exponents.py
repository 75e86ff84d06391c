"""Exponent plans for the encoding polynomials and their decodability checks.

A plan fixes the exponent of every block of A (``alpha[k][j]``), of every
library block (``beta[j][k']``) and of the mask (``gamma``).  Multiplying the
user polynomial by the server polynomial yields h(x); the product block
C[k][k'] is readable from h iff its exponent is shared by all p partial
products and collides with no other monomial.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class Variant(str, Enum):
    REPLICATED = "replicated"
    MDS = "mds"
    MDS_LARGE_FIELD = "mds-large-field"

    @classmethod
    def parse(cls, name: str) -> "Variant":
        aliases = {"mds5": cls.MDS, "mds6": cls.MDS_LARGE_FIELD,
                   "mds_large_field": cls.MDS_LARGE_FIELD}
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


Grid = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ExponentPlan:
    variant: Variant
    p: int
    m: int
    n: int
    alpha: Grid  # m x p
    beta: Grid  # p x n
    gamma: int
    useful: tuple[int, ...]
    interference: tuple[int, ...]
    support: tuple[int, ...]  # every exponent that occurs in h(x)
    degree: int
    recovery_threshold: int
    distinct_terms: int
    useful_exponent_of: dict = field(compare=False, repr=False)

    @property
    def beta_flat(self) -> tuple[int, ...]:
        """beta in storage order (j major, k' minor)."""
        return tuple(b for row in self.beta for b in row)

    def with_exponent(self, kind: str, index: tuple[int, ...], value: int) -> "ExponentPlan":
        """Copy of the plan with one exponent replaced; derived sets are rebuilt."""
        alpha = [list(r) for r in self.alpha]
        beta = [list(r) for r in self.beta]
        gamma = self.gamma
        if kind == "alpha":
            alpha[index[0]][index[1]] = value
        elif kind == "beta":
            beta[index[0]][index[1]] = value
        elif kind == "gamma":
            gamma = value
        else:
            raise ValueError(f"unknown exponent kind {kind!r}")
        return build_plan(self.variant, alpha, beta, gamma)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "p": self.p, "m": self.m, "n": self.n,
            "alpha": [list(r) for r in self.alpha],
            "beta": [list(r) for r in self.beta],
            "gamma": self.gamma,
            "useful": list(self.useful),
            "interference": list(self.interference),
            "degree": self.degree,
            "recovery_threshold": self.recovery_threshold,
            "distinct_terms": self.distinct_terms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentPlan":
        plan = build_plan(Variant.parse(d["variant"]), d["alpha"], d["beta"], d["gamma"])
        for key in ("degree", "recovery_threshold", "distinct_terms"):
            if key in d and d[key] != getattr(plan, key):
                raise ValueError(f"stored {key}={d[key]} disagrees with grids ({getattr(plan, key)})")
        return plan

    @classmethod
    def from_json(cls, text: str) -> "ExponentPlan":
        return cls.from_dict(json.loads(text))


def _exponent_sets(variant: Variant, alpha, beta, gamma):
    m, p, n = len(alpha), len(beta), len(beta[0])
    useful = {alpha[k][0] + beta[0][kk] for k in range(m) for kk in range(n)}
    cross = {alpha[k][j] + beta[jj][kk]
             for k in range(m) for j in range(p) for jj in range(p) if j != jj
             for kk in range(n)}
    masked = {gamma + beta[jj][kk] for jj in range(p) for kk in range(n)}
    if variant is Variant.REPLICATED:
        # f(x) times the constant part of the library encoding
        extra = {a for row in alpha for a in row} | {gamma}
    else:
        # decoy matrices times the stored pieces
        extra = {b for row in beta for b in row}
    interference = cross | masked | extra
    diagonal = {alpha[k][j] + beta[j][kk] for k in range(m) for j in range(p) for kk in range(n)}
    return useful, interference, useful | interference | diagonal


def build_plan(variant, alpha, beta, gamma: int) -> ExponentPlan:
    """Assemble a plan from explicit exponent grids and derive U, I, R_c."""
    variant = Variant.parse(variant) if isinstance(variant, str) else variant
    alpha = tuple(tuple(int(a) for a in row) for row in alpha)
    beta = tuple(tuple(int(b) for b in row) for row in beta)
    m, p = len(alpha), len(alpha[0])
    n = len(beta[0])
    if len(beta) != p or any(len(r) != p for r in alpha) or any(len(r) != n for r in beta):
        raise ValueError("alpha must be m x p and beta p x n")
    if min(min(r) for r in alpha + beta) < 0 or gamma < 0:
        raise ValueError("exponents must be non-negative")
    useful, interference, support = _exponent_sets(variant, alpha, beta, gamma)
    degree = max(support)
    if variant is Variant.MDS_LARGE_FIELD:
        threshold = len(support)
    else:
        threshold = degree + 1
    useful_of = {(k, kk): alpha[k][0] + beta[0][kk] for k in range(m) for kk in range(n)}
    return ExponentPlan(
        variant=variant, p=p, m=m, n=n, alpha=alpha, beta=beta, gamma=int(gamma),
        useful=tuple(sorted(useful)), interference=tuple(sorted(interference)),
        support=tuple(sorted(support)), degree=degree, recovery_threshold=threshold,
        distinct_terms=len(support), useful_exponent_of=useful_of,
    )


def _check_dims(p: int, m: int, n: int):
    if min(p, m, n) < 1:
        raise ValueError(f"p, m, n must be positive, got {(p, m, n)}")


def replicated_plan(p: int, m: int, n: int) -> ExponentPlan:
    """Plan for replicated libraries; R_c = pmn + pm + n."""
    _check_dims(p, m, n)
    alpha = [[j + k * p + 1 for j in range(p)] for k in range(m)]
    beta = [[p * m - j + kk * (p * m + 1) for kk in range(n)] for j in range(p)]
    return build_plan(Variant.REPLICATED, alpha, beta, 0)


def mds_plan(p: int, m: int, n: int) -> ExponentPlan:
    """Plan for MDS-coded storage with consecutive beta (plain Vandermonde storage)."""
    _check_dims(p, m, n)
    alpha = [[(k + 1) * p * n - j * n for j in range(p)] for k in range(m)]
    beta = [[j * n + kk for kk in range(n)] for j in range(p)]
    return build_plan(Variant.MDS, alpha, beta, 0)


def mds_plan_large_field(p: int, m: int, n: int) -> ExponentPlan:
    """MDS plan that trades consecutive beta for a smaller threshold pmn + n + p - 1."""
    _check_dims(p, m, n)
    alpha = [[j + k * p + 1 for j in range(p)] for k in range(m)]
    beta = [[p - 1 - j + kk * (p * m + 1) for kk in range(n)] for j in range(p)]
    return build_plan(Variant.MDS_LARGE_FIELD, alpha, beta, 0)


PLAN_BUILDERS = {
    Variant.REPLICATED: replicated_plan,
    Variant.MDS: mds_plan,
    Variant.MDS_LARGE_FIELD: mds_plan_large_field,
}


def make_plan(variant, p: int, m: int, n: int) -> ExponentPlan:
    variant = Variant.parse(variant) if isinstance(variant, str) else variant
    return PLAN_BUILDERS[variant](p, m, n)


def published_threshold(variant: Variant, p: int, m: int, n: int) -> int:
    """Closed-form recovery thresholds, kept for comparison with the derived ones."""
    if variant is Variant.REPLICATED:
        return p * m * n + p * m + n
    if variant is Variant.MDS:
        return p * m * n + p * n - 1
    return p * m * n + n + p - 1


@dataclass(frozen=True)
class VerificationReport:
    variant: Variant
    p: int
    m: int
    n: int
    row_collapse: bool
    disjoint: bool
    threshold: bool
    recovery_threshold: int
    published_threshold: int
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.row_collapse and self.disjoint and self.threshold

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value, "p": self.p, "m": self.m, "n": self.n,
            "row_collapse": self.row_collapse, "disjoint": self.disjoint,
            "threshold": self.threshold, "passed": self.passed,
            "recovery_threshold": self.recovery_threshold,
            "published_threshold": self.published_threshold,
            "notes": list(self.notes),
        }


def verify_plan(plan: ExponentPlan) -> VerificationReport:
    """Re-derive every set from the raw grids and check decodability.

    Failures are reported, never raised.
    """
    alpha, beta, gamma = plan.alpha, plan.beta, plan.gamma
    p, m, n = plan.p, plan.m, plan.n
    notes = []

    row_collapse = all(
        len({alpha[k][j] + beta[j][kk] for j in range(p)}) == 1
        for k in range(m) for kk in range(n)
    )
    if not row_collapse:
        notes.append("some product block is split across several exponents")

    useful, interference, support = _exponent_sets(plan.variant, alpha, beta, gamma)
    clash = sorted(useful & interference)
    disjoint = len(useful) == m * n and not clash
    if len(useful) != m * n:
        notes.append(f"|U| = {len(useful)}, expected {m * n}")
    if clash:
        notes.append(f"useful exponents also carry interference: {clash}")

    degree = max(support)
    if plan.variant is Variant.MDS_LARGE_FIELD:
        expected = len(support)
    else:
        expected = degree + 1
    threshold = (plan.recovery_threshold == expected and plan.degree == degree
                 and plan.distinct_terms == len(support))
    if not threshold:
        notes.append(f"stored threshold {plan.recovery_threshold} but sets give {expected}")

    published = published_threshold(plan.variant, p, m, n)
    if published != plan.recovery_threshold:
        notes.append(
            f"closed form gives {published}, derived threshold is {plan.recovery_threshold}"
        )
    return VerificationReport(plan.variant, p, m, n, row_collapse, disjoint, threshold,
                              plan.recovery_threshold, published, tuple(notes))


# Best known upper bounds on bilinear complexity, quoted from the literature.
LITERATURE_R_STAR = {
    (2, 2, 2): 7, (2, 3, 3): 15, (3, 3, 3): 23, (4, 4, 4): 49, (5, 5, 5): 99,
    (6, 6, 6): 160, (7, 7, 7): 250, (8, 8, 8): 343, (9, 9, 9): 520,
}


@dataclass(frozen=True)
class BaselineTable:
    p: int
    m: int
    n: int
    r_star: Optional[int]
    kim_lee: int
    aliasgari: int
    yu: Optional[int]
    replicated: int
    mds: int
    mds_large_field: int

    @property
    def improvement_pct(self) -> Optional[float]:
        """Relative threshold saving of the replicated scheme over Yu et al., in percent."""
        if self.yu is None:
            return None
        return 100.0 * (self.yu - self.replicated) / self.yu

    def to_dict(self) -> dict:
        imp = self.improvement_pct
        return {
            "p": self.p, "m": self.m, "n": self.n, "r_star": self.r_star,
            "kim_lee": self.kim_lee, "aliasgari": self.aliasgari, "yu": self.yu,
            "replicated": self.replicated, "mds": self.mds,
            "mds_large_field": self.mds_large_field,
            "improvement_pct": None if imp is None else round(imp, 2),
        }


def baseline_thresholds(p: int, m: int, n: int, r_star: Optional[int] = None) -> BaselineTable:
    _check_dims(p, m, n)
    return BaselineTable(
        p=p, m=m, n=n, r_star=r_star,
        kim_lee=(m + 1) * (n + 1),
        aliasgari=p * m * n + p * n + p * m - p + 2,
        yu=None if r_star is None else 2 * r_star + 1,
        replicated=replicated_plan(p, m, n).recovery_threshold,
        mds=mds_plan(p, m, n).recovery_threshold,
        mds_large_field=mds_plan_large_field(p, m, n).recovery_threshold,
    )
