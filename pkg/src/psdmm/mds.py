"""Private and secure multiplication against an MDS-coded library.

Server i stores g_t(a_i) for every library index t, where
g_t(x) = sum_{j,k} B_t[j][k] x**beta[j][k], so any pn servers can rebuild
the library.  The query for server i is a tuple of L matrices: the masked
share f(a_i) at the desired index and shared uniform decoys elsewhere.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np

from .codec import independent_rows, lagrange_interpolate, monomial_matrix, solve_monomial_system
from .errors import (ConfigInvalid, DimensionMismatch, DuplicatePoints, NonMdsExponents,
                     NotEnoughResponses, SingularSystem)
from .exponents import ExponentPlan, Variant
from .field import FieldElement
from .linalg import MatrixF, assemble_blocks, linear_combination, partition, random_matrix
from .replicated import ServerResponse, encode_share_batch

log = logging.getLogger(__name__)

DEFAULT_RETRY_BUDGET = 16
# Exhaustive subset validation is skipped above this many subsets.
_MAX_VALIDATED_SUBSETS = 20_000


@dataclass(frozen=True)
class MdsParams:
    p: int
    m: int
    n: int
    L: int
    N: int
    theta: int
    plan: ExponentPlan
    storage_points: tuple[FieldElement, ...]

    def __post_init__(self):
        if self.plan.variant is Variant.REPLICATED:
            raise ConfigInvalid("MDS scheme needs an MDS plan")
        if (self.plan.p, self.plan.m, self.plan.n) != (self.p, self.m, self.n):
            raise ConfigInvalid("plan partition does not match (p, m, n)")
        if self.L < 2:
            raise ConfigInvalid("library must hold at least two matrices")
        if not 0 <= self.theta < self.L:
            raise ConfigInvalid(f"theta={self.theta} outside [0, {self.L})")
        if self.N < self.p * self.n:
            raise ConfigInvalid(f"N={self.N} servers cannot hold an [N, {self.p * self.n}] code")
        if self.N < self.plan.recovery_threshold:
            raise ConfigInvalid(f"N={self.N} below recovery threshold {self.plan.recovery_threshold}")
        if len(self.storage_points) != self.N:
            raise ConfigInvalid("need exactly one storage point per server")


@dataclass(frozen=True)
class MdsStorage:
    """What one server holds: its point and the L coded pieces g_t(point)."""

    server_id: int
    point: FieldElement
    pieces: tuple[MatrixF, ...]

    @property
    def element_count(self) -> int:
        return sum(piece.size for piece in self.pieces)


@dataclass(frozen=True)
class MdsQuery:
    entries: tuple[MatrixF, ...]

    def __post_init__(self):
        if len({e.shape for e in self.entries}) > 1:
            raise DimensionMismatch("query matrices must share one shape")

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, j: int) -> MatrixF:
        return self.entries[j]

    @property
    def element_count(self) -> int:
        return sum(e.size for e in self.entries)


def _is_consecutive(values: Sequence[int]) -> bool:
    vals = sorted(values)
    return vals == list(range(vals[0], vals[0] + len(vals)))


def check_storage_exponents(plan: ExponentPlan, points: Sequence) -> None:
    """Raise NonMdsExponents unless every pn-subset of points can rebuild the library."""
    betas = plan.beta_flat
    if len(set(betas)) != len(betas):
        raise NonMdsExponents(f"repeated storage exponents {sorted(betas)}")
    xs = [int(a) for a in points]
    if 0 in xs or len(set(xs)) != len(xs):
        raise NonMdsExponents("storage points must be distinct and nonzero")
    if _is_consecutive(betas):
        return  # x**b0 times a Vandermonde matrix on distinct nonzero points
    k = len(betas)
    if comb(len(xs), k) > _MAX_VALIDATED_SUBSETS:
        raise NonMdsExponents(
            f"cannot certify {comb(len(xs), k)} subsets for non-consecutive exponents"
        )
    q = points[0].modulus.q
    for subset in itertools.combinations(xs, k):
        try:
            independent_rows(subset, betas, q)
        except SingularSystem:
            raise NonMdsExponents(f"points {subset} give a singular storage matrix") from None


def encode_storage(library: Sequence[MatrixF], plan: ExponentPlan,
                   storage_points: Sequence[FieldElement], validate: bool = False) -> list[MdsStorage]:
    if validate:
        check_storage_exponents(plan, storage_points)
    grids = [partition(B, plan.p, plan.n) for B in library]
    q = library[0].q
    stores = []
    for i, a in enumerate(storage_points):
        x = int(a) % q
        coeffs = [pow(x, plan.beta[j][k], q) for j in range(plan.p) for k in range(plan.n)]
        pieces = tuple(
            linear_combination(coeffs, [g[j, k] for j in range(plan.p) for k in range(plan.n)])
            for g in grids
        )
        stores.append(MdsStorage(i, a, pieces))
    return stores


def make_mds_queries(A: MatrixF, theta: int, L: int, plan: ExponentPlan,
                     storage_points: Sequence[FieldElement], rng: Optional[np.random.Generator] = None,
                     mask: Optional[MatrixF] = None,
                     decoys: Optional[Sequence[MatrixF]] = None) -> list[MdsQuery]:
    """Queries (S_0, .., S_{theta-1}, f(a_i), S_theta, .., S_{L-2}) for every server.

    A fresh mask and fresh decoys are drawn from ``rng`` unless given.  The
    decoys are the same for every server.
    """
    if not 0 <= theta < L:
        raise ValueError(f"theta={theta} outside [0, {L})")
    shape = partition(A, plan.m, plan.p).block_shape
    if mask is None or decoys is None:
        if rng is None:
            raise ValueError("rng required when mask or decoys are not supplied")
    if mask is None:
        mask = random_matrix(*shape, rng, A.modulus)
    if decoys is None:
        decoys = [random_matrix(*shape, rng, A.modulus) for _ in range(L - 1)]
    if len(decoys) != L - 1:
        raise ValueError(f"need {L - 1} decoys, got {len(decoys)}")
    mod = A.modulus
    shares = encode_share_batch(A, np.repeat(mask.data[None], len(storage_points), axis=0), plan,
                                np.array([int(a) for a in storage_points], dtype=mask.data.dtype))
    decoy_arr = np.stack([d.data for d in decoys]) if decoys else np.empty((0,) + shape, mask.data.dtype)
    queries = []
    for share in shares:
        entries = layout_mds_query(share[None], decoy_arr[None], theta)[0]
        queries.append(MdsQuery(tuple(MatrixF._wrap(e, mod) for e in entries)))
    return queries


def layout_mds_query(shares: np.ndarray, decoys: np.ndarray, theta: int) -> np.ndarray:
    """Insert the share at index theta among the decoys.

    ``shares`` is (runs, rows, cols) and ``decoys`` (runs, L - 1, rows, cols);
    the result is (runs, L, rows, cols).
    """
    return np.concatenate([decoys[:, :theta], shares[:, None], decoys[:, theta:]], axis=1)


def mds_server_compute(storage: MdsStorage, query: MdsQuery) -> MatrixF:
    """sum_j query[j] @ g_j(a_i)."""
    if len(storage.pieces) != len(query):
        raise DimensionMismatch(f"{len(storage.pieces)} stored pieces vs {len(query)} query entries")
    acc = None
    for S, g in zip(query.entries, storage.pieces):
        term = S @ g
        acc = term if acc is None else acc + term
    return acc


def _read_product(poly, plan: ExponentPlan) -> MatrixF:
    return assemble_blocks([[poly.coefficient(plan.useful_exponent_of[k, kk]) for kk in range(plan.n)]
                            for k in range(plan.m)])


def mds_decode(responses: Sequence[ServerResponse], plan: ExponentPlan,
               retry_budget: int = DEFAULT_RETRY_BUDGET) -> MatrixF:
    """Recover A @ B_theta from server replies ordered by arrival.

    With consecutive storage exponents h is interpolated densely from R_c
    replies.  Otherwise the sparse support of h is solved directly; if the
    first R_c points give a singular system, later replies are pulled in one
    at a time (up to ``retry_budget`` extra) and an independent subset is used.
    """
    need = plan.recovery_threshold
    if len(responses) < need:
        raise NotEnoughResponses(f"got {len(responses)} responses, need {need}")
    xs = [int(r.eval_point) for r in responses]
    if len(set(xs)) != len(xs):
        raise DuplicatePoints("two responses share an evaluation point")

    if plan.variant is Variant.MDS:
        used = responses[:need]
        poly = lagrange_interpolate([r.eval_point for r in used], [r.y for r in used], need - 1)
        return _read_product(poly, plan)

    support = plan.support
    used = responses[:need]
    try:
        poly = solve_monomial_system(support, [r.eval_point for r in used], [r.y for r in used])
        return _read_product(poly, plan)
    except SingularSystem:
        log.info("first %d responses singular on the sparse support; widening", need)
    q = responses[0].y.q
    for extra in range(1, min(retry_budget, len(responses) - need) + 1):
        pool = responses[:need + extra]
        try:
            idx = independent_rows([r.eval_point for r in pool], support, q)
        except SingularSystem:
            continue
        chosen = [pool[i] for i in idx]
        poly = solve_monomial_system(support, [r.eval_point for r in chosen], [r.y for r in chosen])
        return _read_product(poly, plan)
    log.warning("sparse decode failed after %d extra responders; points=%s", retry_budget,
                [int(r.eval_point) for r in responses])
    raise SingularSystem(f"no invertible subset of {need} among the first "
                         f"{min(len(responses), need + retry_budget)} responses")


def reconstruct_library(storages: Sequence[MdsStorage], plan: ExponentPlan) -> list[MatrixF]:
    """Rebuild every library matrix from the pieces of exactly pn servers."""
    k = plan.p * plan.n
    if len(storages) < k:
        raise NotEnoughResponses(f"{len(storages)} servers cannot rebuild a library coded over {k}")
    storages = list(storages)[:k]
    points = [s.point for s in storages]
    betas = plan.beta_flat
    position = {b: (j, kk) for (j, kk), b in
                zip(((j, kk) for j in range(plan.p) for kk in range(plan.n)), betas)}
    library = []
    for t in range(len(storages[0].pieces)):
        poly = solve_monomial_system(betas, points, [s.pieces[t] for s in storages])
        blocks = [[None] * plan.n for _ in range(plan.p)]
        for b in betas:
            j, kk = position[b]
            blocks[j][kk] = poly.coefficient(b)
        library.append(assemble_blocks(blocks))
    return library


def storage_matrix(plan: ExponentPlan, points: Sequence) -> list[list[int]]:
    """The [a_i ** beta] matrix whose pn x pn minors must all be nonzero."""
    q = points[0].modulus.q
    return monomial_matrix([int(a) for a in points], plan.beta_flat, q)


def storage_manifest(storages: Sequence[MdsStorage]) -> list[dict]:
    """Per-server point and piece shapes, JSON-ready."""
    return [{"server_id": st.server_id, "point": int(st.point),
             "pieces": [list(piece.shape) for piece in st.pieces]} for st in storages]
