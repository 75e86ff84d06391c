"""Private and secure multiplication against a replicated library.

Every server holds all L library matrices.  The user sends server i one
masked share f(a_i) and a query tuple of L field elements; the desired
index carries the server's own point while every other index carries a
constant shared by all servers.  Server replies are evaluations of
h(x) = f(x) g(x), so any R_c of them interpolate the product blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codec import lagrange_interpolate
from .errors import ConfigInvalid, DimensionMismatch, DuplicatePoints, FieldTooSmall, NotEnoughResponses
from .exponents import ExponentPlan, Variant
from .field import (FieldElement, Modulus, ModulusLike, as_modulus, powmod_array,
                    sample_distinct_array)
from .linalg import MatrixF, assemble_blocks, linear_combination, matmul, partition


@dataclass(frozen=True)
class ReplicatedParams:
    p: int
    m: int
    n: int
    L: int
    N: int
    theta: int
    plan: ExponentPlan
    modulus: Modulus

    def __post_init__(self):
        if self.plan.variant is not Variant.REPLICATED:
            raise ConfigInvalid(f"replicated scheme needs a replicated plan, got {self.plan.variant}")
        if (self.plan.p, self.plan.m, self.plan.n) != (self.p, self.m, self.n):
            raise ConfigInvalid("plan partition does not match (p, m, n)")
        if self.L < 2:
            raise ConfigInvalid("library must hold at least two matrices")
        if not 0 <= self.theta < self.L:
            raise ConfigInvalid(f"theta={self.theta} outside [0, {self.L})")
        if self.N < self.plan.recovery_threshold:
            raise ConfigInvalid(f"N={self.N} below recovery threshold {self.plan.recovery_threshold}")
        if self.modulus.q - 1 < self.N + self.L - 1:
            raise FieldTooSmall(f"need {self.N + self.L - 1} distinct nonzero points mod {self.modulus.q}")


@dataclass(frozen=True)
class ReplicatedQuery:
    """Per-server query: one field element per library index."""

    entries: tuple[FieldElement, ...]

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, t: int) -> FieldElement:
        return self.entries[t]


@dataclass(frozen=True)
class ServerResponse:
    server_id: int
    eval_point: FieldElement
    y: MatrixF


def encode_share_batch(A: MatrixF, masks: np.ndarray, plan: ExponentPlan,
                       points: np.ndarray) -> np.ndarray:
    """Shares for many (mask, point) pairs at once.

    ``masks`` has shape (runs, t/m, s/p) and ``points`` shape (runs,); the
    result holds f(points[r]) computed with mask ``masks[r]``.
    """
    grid = partition(A, plan.m, plan.p)
    br, bc = grid.block_shape
    masks = np.asarray(masks)
    if masks.shape[1:] != (br, bc):
        raise DimensionMismatch(f"mask shape {masks.shape[1:]} != block shape {(br, bc)}")
    q = A.q
    # int64 only while the sum of mp + 1 products cannot overflow
    big = A.data.dtype == object or (plan.m * plan.p + 1) * (q - 1) ** 2 > (1 << 63) - 1
    xs = np.asarray(points, dtype=object if big else np.int64) % q
    blocks = np.stack([blk.data.reshape(-1) for _, blk in grid])  # (mp, br*bc)
    powers = np.stack([powmod_array(xs, plan.alpha[k][j], q) for (k, j), _ in grid], axis=1)
    if big:
        blocks, powers = blocks.astype(object), powers.astype(object)
    out = (powers @ blocks) % q
    mask_power = powmod_array(xs, plan.gamma, q)
    out = (out + masks.reshape(len(xs), -1) * mask_power[:, None]) % q
    return out.reshape(len(xs), br, bc).astype(A.data.dtype)


def encode_share(A: MatrixF, Z: MatrixF, plan: ExponentPlan, point) -> MatrixF:
    """f(point) = sum_{k,j} A[k][j] point**alpha[k][j] + Z point**gamma."""
    A._check(Z)
    x = int(point) % A.q
    out = encode_share_batch(A, Z.data[None], plan, np.array([x], dtype=Z.data.dtype))
    return MatrixF._wrap(out[0], A.modulus)


def layout_queries(pool: np.ndarray, theta: int, N: int, L: int) -> np.ndarray:
    """Arrange point pools of shape (runs, N + L - 1) into queries (runs, N, L).

    The first N pool entries are the servers' own points; the remaining L - 1
    fill every index except theta, identically for all servers.
    """
    runs = pool.shape[0]
    own, shared = pool[:, :N], pool[:, N:]
    out = np.empty((runs, N, L), dtype=pool.dtype)
    out[:, :, :theta] = shared[:, None, :theta]
    out[:, :, theta] = own
    out[:, :, theta + 1:] = shared[:, None, theta:]
    return out


def make_query_batch(theta: int, N: int, L: int, runs: int, rng: np.random.Generator,
                     modulus: ModulusLike) -> tuple[np.ndarray, np.ndarray]:
    """``runs`` independent query sets as integer arrays: (queries, own points)."""
    if not 0 <= theta < L:
        raise ValueError(f"theta={theta} outside [0, {L})")
    pool = sample_distinct_array(N + L - 1, runs, rng, as_modulus(modulus))
    return layout_queries(pool, theta, N, L), pool[:, :N]


def make_queries(theta: int, N: int, L: int, rng: np.random.Generator,
                 modulus: ModulusLike) -> tuple[list[ReplicatedQuery], list[FieldElement]]:
    """Draw N + L - 1 distinct nonzero points and lay them out as queries.

    The whole pool is drawn in one batch before any assignment, so any single
    query is a uniformly random tuple of L distinct points whatever theta is.
    """
    mod = as_modulus(modulus)
    queries, own = make_query_batch(theta, N, L, 1, rng, mod)
    as_fe = [[FieldElement(int(v), mod) for v in row] for row in queries[0]]
    return [ReplicatedQuery(tuple(row)) for row in as_fe], [row[theta] for row in as_fe]


def server_encode_library(library: Sequence[MatrixF], query: ReplicatedQuery,
                          plan: ExponentPlan) -> MatrixF:
    """sum_t g_t(query[t]), with g_t(x) = sum_{j,k} B_t[j][k] x**beta[j][k]."""
    if len(library) != len(query):
        raise DimensionMismatch(f"library has {len(library)} matrices, query {len(query)} entries")
    q = library[0].q
    coeffs, mats = [], []
    for B, a in zip(library, query.entries):
        x = int(a) % q
        for (j, k), blk in partition(B, plan.p, plan.n):
            coeffs.append(pow(x, plan.beta[j][k], q))
            mats.append(blk)
    return linear_combination(coeffs, mats)


def server_compute(share: MatrixF, encoded_library: MatrixF) -> MatrixF:
    return matmul(share, encoded_library)


def decode(responses: Sequence[ServerResponse], plan: ExponentPlan) -> MatrixF:
    """Interpolate h from the first R_c responses and read off the product blocks."""
    need = plan.recovery_threshold
    if len(responses) < need:
        raise NotEnoughResponses(f"got {len(responses)} responses, need {need}")
    points = [int(r.eval_point) for r in responses]
    if len(set(points)) != len(points):
        raise DuplicatePoints("two responses share an evaluation point")
    used = responses[:need]
    poly = lagrange_interpolate([r.eval_point for r in used], [r.y for r in used], need - 1)
    blocks = [[poly.coefficient(plan.useful_exponent_of[k, kk]) for kk in range(plan.n)]
              for k in range(plan.m)]
    return assemble_blocks(blocks)
