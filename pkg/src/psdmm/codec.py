"""Matrix-valued polynomials: evaluation, interpolation and sparse monomial solves.

All solvers work entrywise but batched: the values are flattened into one
(points x entries) array so a single weight matrix recovers every entry at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import CountMismatch, DuplicatePoints, SingularSystem
from .field import FieldElement, Modulus
from .linalg import MatrixF, _dtype_for, linear_combination


@dataclass(frozen=True)
class MatrixPoly:
    """sum over e of terms[e] * x**e, every coefficient of the same shape."""

    terms: Mapping[int, MatrixF]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a matrix polynomial needs at least one term")
        shapes = {c.shape for c in self.terms.values()}
        if len(shapes) != 1:
            raise ValueError(f"coefficients disagree in shape: {sorted(shapes)}")
        if min(self.terms) < 0:
            raise ValueError("exponents must be non-negative")

    @property
    def modulus(self) -> Modulus:
        return next(iter(self.terms.values())).modulus

    @property
    def shape(self) -> tuple[int, int]:
        return next(iter(self.terms.values())).shape

    @property
    def exponents(self) -> list[int]:
        return sorted(self.terms)

    def coefficient(self, e: int) -> MatrixF:
        if e in self.terms:
            return self.terms[e]
        return MatrixF.zeros(*self.shape, self.modulus)

    def __call__(self, x) -> MatrixF:
        return eval_matrix_poly(self, x)


def _as_int(x, q: int) -> int:
    if isinstance(x, FieldElement) and x.modulus.q != q:
        raise ValueError(f"point mod {x.modulus.q} used with matrices mod {q}")
    return int(x) % q


def eval_matrix_poly(poly: MatrixPoly, x) -> MatrixF:
    q = poly.modulus.q
    xv = _as_int(x, q)
    exps = poly.exponents
    return linear_combination([pow(xv, e, q) for e in exps], [poly.terms[e] for e in exps])


def _stack(values: Sequence[MatrixF]) -> np.ndarray:
    # rows = points, cols = flattened matrix entries; Python ints
    return np.array([v.data.reshape(-1).tolist() for v in values], dtype=object)


def _unstack(flat_row, shape, modulus: Modulus) -> MatrixF:
    arr = np.asarray(flat_row, dtype=object).reshape(shape)
    if _dtype_for(modulus.q) is np.int64:
        arr = arr.astype(np.int64)
    return MatrixF._wrap(arr, modulus)


def _check_values(points, values):
    if len(points) != len(values):
        raise CountMismatch(f"{len(points)} points but {len(values)} values")
    if not values:
        raise CountMismatch("no evaluations supplied")
    first = values[0]
    for v in values[1:]:
        first._check(v)
        if v.shape != first.shape:
            raise CountMismatch("evaluations have different shapes")


def _distinct_ints(points, q: int) -> list[int]:
    xs = [_as_int(x, q) for x in points]
    if len(set(xs)) != len(xs):
        raise DuplicatePoints("evaluation points must be pairwise distinct")
    return xs


def lagrange_weights(xs: Sequence[int], q: int) -> list[list[int]]:
    """W with W[e][i] = coefficient of x**e in the i-th Lagrange basis polynomial."""
    size = len(xs)
    # master(x) = prod (x - x_k), low degree first
    master = [1]
    for xk in xs:
        nxt = [0] * (len(master) + 1)
        for d, c in enumerate(master):
            nxt[d + 1] = (nxt[d + 1] + c) % q
            nxt[d] = (nxt[d] - xk * c) % q
        master = nxt
    weights = [[0] * size for _ in range(size)]
    for i, xi in enumerate(xs):
        # synthetic division of master by (x - xi)
        quot = [0] * size
        carry = master[size]
        for d in range(size - 1, -1, -1):
            quot[d] = carry
            carry = (master[d] + xi * carry) % q
        denom = 0
        for c in reversed(quot):
            denom = (denom * xi + c) % q
        inv = pow(denom, q - 2, q)
        for e in range(size):
            weights[e][i] = quot[e] * inv % q
    return weights


def lagrange_interpolate(points: Sequence, values: Sequence[MatrixF],
                         degree_bound: int) -> MatrixPoly:
    """Unique matrix polynomial of degree <= degree_bound through the samples.

    Every exponent 0..degree_bound is present in the result, zero or not.
    """
    _check_values(points, values)
    if len(points) != degree_bound + 1:
        raise CountMismatch(
            f"degree bound {degree_bound} needs {degree_bound + 1} points, got {len(points)}"
        )
    mod = values[0].modulus
    q = mod.q
    if q <= degree_bound:
        raise CountMismatch(f"field of size {q} too small for degree {degree_bound}")
    xs = _distinct_ints(points, q)
    weights = np.array(lagrange_weights(xs, q), dtype=object)
    coeffs = (weights @ _stack(values)) % q
    shape = values[0].shape
    return MatrixPoly({e: _unstack(coeffs[e], shape, mod) for e in range(degree_bound + 1)})


def monomial_matrix(points: Sequence[int], exponents: Sequence[int], q: int) -> list[list[int]]:
    """Generalized Vandermonde matrix [x_i ** e_c]."""
    return [[pow(x, e, q) for e in exponents] for x in points]


def _gauss_jordan(system: np.ndarray, size: int, q: int) -> np.ndarray:
    """Reduce [M | V] in place; returns the solved right-hand block."""
    for col in range(size):
        pivot = next((r for r in range(col, size) if system[r, col] % q), None)
        if pivot is None:
            raise SingularSystem(f"monomial system is singular (column {col} has no pivot)")
        if pivot != col:
            system[[col, pivot]] = system[[pivot, col]]
        inv = pow(int(system[col, col]), q - 2, q)
        system[col] = (system[col] * inv) % q
        for r in range(size):
            if r != col:
                factor = system[r, col]
                if factor:
                    system[r] = (system[r] - factor * system[col]) % q
    return system[:, size:]


def solve_monomial_system(exponent_support: Sequence[int], points: Sequence,
                          values: Sequence[MatrixF]) -> MatrixPoly:
    """Recover the coefficients of a polynomial known to live on a sparse support.

    Raises SingularSystem when the generalized Vandermonde matrix built from
    the points is not invertible; the caller should pick other points.
    """
    _check_values(points, values)
    support = sorted(int(e) for e in exponent_support)
    if len(set(support)) != len(support):
        raise ValueError("exponent support has duplicates")
    if len(points) != len(support):
        raise CountMismatch(f"{len(support)} unknowns but {len(points)} points")
    mod = values[0].modulus
    q = mod.q
    xs = _distinct_ints(points, q)
    lhs = np.array(monomial_matrix(xs, support, q), dtype=object)
    system = np.concatenate([lhs, _stack(values)], axis=1)
    solved = _gauss_jordan(system, len(support), q)
    shape = values[0].shape
    return MatrixPoly({e: _unstack(solved[c], shape, mod) for c, e in enumerate(support)})


def independent_rows(points: Sequence, exponent_support: Sequence[int], q: int) -> list[int]:
    """Greedy choice of point indices whose monomial rows are linearly independent.

    Scans the points in order and keeps a point whenever it raises the rank,
    stopping once there are as many as the support size.
    """
    support = sorted(int(e) for e in exponent_support)
    size = len(support)
    basis: list[tuple[int, list[int]]] = []  # (pivot column, reduced row)
    chosen = []
    for idx, x in enumerate(points):
        row = [pow(_as_int(x, q), e, q) for e in support]
        for col, brow in basis:
            f = row[col]
            if f:
                row = [(a - f * b) % q for a, b in zip(row, brow)]
        pivot = next((c for c, v in enumerate(row) if v), None)
        if pivot is None:
            continue
        inv = pow(row[pivot], q - 2, q)
        row = [v * inv % q for v in row]
        basis = [(c, [(a - b[pivot] * r) % q for a, r in zip(b, row)] if b[pivot] else b)
                 for c, b in basis]
        basis.append((pivot, row))
        chosen.append(idx)
        if len(chosen) == size:
            return chosen
    raise SingularSystem(f"only {len(chosen)} independent rows among {len(points)} points, "
                         f"need {size}")
