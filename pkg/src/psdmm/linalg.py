"""Dense matrices over F_q and their block partitions.

Storage is a 2-D numpy array of canonical residues.  Small moduli use int64
(products fit); large ones such as 2**61 - 1 fall back to object arrays of
Python ints so every product stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, IndivisibleDimensions, ModulusMismatch, RaggedBlocks
from .field import FieldElement, Modulus, ModulusLike, as_modulus

_INT64_LIMIT = (1 << 63) - 1


def _dtype_for(q: int):
    # headroom for one product plus one addend before reduction
    return np.int64 if 2 * (q - 1) ** 2 <= _INT64_LIMIT else object


class MatrixF:
    """Immutable rows x cols matrix over F_q."""

    __slots__ = ("_data", "modulus")

    def __init__(self, data, modulus: ModulusLike):
        mod = as_modulus(modulus)
        arr = np.array(data, dtype=object)
        if arr.ndim != 2:
            raise DimensionMismatch(f"matrix data must be 2-D, got ndim={arr.ndim}")
        # Python ints throughout so nothing wraps before reduction.
        arr = _to_pyint(arr) % mod.q
        if _dtype_for(mod.q) is np.int64:
            arr = arr.astype(np.int64)
        arr.setflags(write=False)
        self._data = arr
        self.modulus = mod

    @classmethod
    def _wrap(cls, arr: np.ndarray, modulus: Modulus) -> "MatrixF":
        # arr must already be canonical and of the right dtype
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj._data = arr
        obj.modulus = modulus
        return obj

    @classmethod
    def zeros(cls, rows: int, cols: int, modulus: ModulusLike) -> "MatrixF":
        mod = as_modulus(modulus)
        dtype = _dtype_for(mod.q)
        arr = np.zeros((rows, cols), dtype=np.int64)
        return cls._wrap(arr if dtype is np.int64 else arr.astype(object), mod)

    @classmethod
    def identity(cls, size: int, modulus: ModulusLike) -> "MatrixF":
        mod = as_modulus(modulus)
        arr = np.eye(size, dtype=np.int64)
        return cls._wrap(arr if _dtype_for(mod.q) is np.int64 else arr.astype(object), mod)

    @property
    def q(self) -> int:
        return self.modulus.q

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def size(self) -> int:
        return self._data.size

    def tolist(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self._data]

    def __getitem__(self, idx):
        return self._data[idx]

    def _check(self, other: "MatrixF"):
        if not isinstance(other, MatrixF):
            raise TypeError(f"expected MatrixF, got {type(other).__name__}")
        if other.modulus.q != self.modulus.q:
            raise ModulusMismatch(f"mod {self.q} vs mod {other.q}")

    def __add__(self, other: "MatrixF") -> "MatrixF":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        return MatrixF._wrap((self._data + other._data) % self.q, self.modulus)

    def __sub__(self, other: "MatrixF") -> "MatrixF":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot subtract {self.shape} and {other.shape}")
        return MatrixF._wrap((self._data - other._data) % self.q, self.modulus)

    def __neg__(self) -> "MatrixF":
        return MatrixF._wrap((-self._data) % self.q, self.modulus)

    def scale(self, c) -> "MatrixF":
        """Multiply every entry by the scalar c (int or FieldElement)."""
        if isinstance(c, FieldElement) and c.modulus.q != self.q:
            raise ModulusMismatch(f"scalar mod {c.modulus.q} vs matrix mod {self.q}")
        c = int(c) % self.q
        return MatrixF._wrap((self._data * c) % self.q, self.modulus)

    def __mul__(self, c):
        if isinstance(c, MatrixF):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "MatrixF") -> "MatrixF":
        return matmul(self, other)

    def __eq__(self, other):
        if not isinstance(other, MatrixF):
            return NotImplemented
        return (self.q == other.q and self.shape == other.shape
                and bool(np.all(self._data == other._data)))

    __hash__ = None

    def __repr__(self):
        return f"MatrixF({self.rows}x{self.cols} mod {self.q})"

    def to_text(self) -> str:
        """Fixture format: a "rows cols q" header, then one matrix row per line."""
        lines = [f"{self.rows} {self.cols} {self.q}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self._data]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MatrixF":
        tokens = text.split()
        if len(tokens) < 3:
            raise ValueError("matrix text needs a 'rows cols q' header")
        rows, cols, q = (int(t) for t in tokens[:3])
        values = [int(t) for t in tokens[3:]]
        if len(values) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, found {len(values)}")
        if any(not 0 <= v < q for v in values):
            raise ValueError(f"entries must lie in [0, {q})")
        flat = np.array(values, dtype=object).reshape(rows, cols)
        return cls(flat, q)


_to_pyint = np.frompyfunc(int, 1, 1)


def matmul(a: MatrixF, b: MatrixF) -> MatrixF:
    a._check(b)
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    q = a.q
    if a._data.dtype == np.int64 and a.cols * (q - 1) ** 2 <= _INT64_LIMIT:
        out = (a._data @ b._data) % q
    elif a._data.dtype == np.int64:
        out = ((a._data.astype(object) @ b._data.astype(object)) % q).astype(np.int64)
    else:
        out = (a._data @ b._data) % q
    return MatrixF._wrap(out, a.modulus)


def linear_combination(coeffs: Sequence[int], mats: Sequence[MatrixF]) -> MatrixF:
    """sum_i coeffs[i] * mats[i], reduced once at the end."""
    if not mats:
        raise ValueError("need at least one matrix")
    first = mats[0]
    q = first.q
    if first._data.dtype == np.int64:
        acc = np.zeros(first.shape, dtype=np.int64)
        for c, m in zip(coeffs, mats):
            first._check(m)
            acc = (acc + m._data * (int(c) % q)) % q
    else:
        acc = np.zeros(first.shape, dtype=object)
        for c, m in zip(coeffs, mats):
            first._check(m)
            acc = acc + m._data * (int(c) % q)
        acc = acc % q
    return MatrixF._wrap(acc, first.modulus)


def random_entries(shape, rng: np.random.Generator, modulus: ModulusLike) -> np.ndarray:
    """Array of i.i.d. uniform residues in the storage dtype for this modulus."""
    mod = as_modulus(modulus)
    raw = rng.integers(0, mod.q, size=shape, dtype=np.uint64)
    if _dtype_for(mod.q) is np.int64:
        return raw.astype(np.int64)
    return np.array(raw.tolist(), dtype=object).reshape(raw.shape)


def random_matrix(rows: int, cols: int, rng: np.random.Generator,
                  modulus: ModulusLike) -> MatrixF:
    """I.i.d. uniform entries over F_q."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    mod = as_modulus(modulus)
    return MatrixF._wrap(random_entries((rows, cols), rng, mod), mod)


@dataclass(frozen=True)
class BlockGrid:
    """A matrix cut into grid_rows x grid_cols equal contiguous blocks."""

    base: MatrixF
    grid_rows: int
    grid_cols: int
    blocks: tuple[tuple[MatrixF, ...], ...]

    @property
    def block_shape(self) -> tuple[int, int]:
        return self.base.rows // self.grid_rows, self.base.cols // self.grid_cols

    def __getitem__(self, idx: tuple[int, int]) -> MatrixF:
        i, j = idx
        return self.blocks[i][j]

    def __iter__(self):
        for i in range(self.grid_rows):
            for j in range(self.grid_cols):
                yield (i, j), self.blocks[i][j]


def partition(mat: MatrixF, grid_rows: int, grid_cols: int) -> BlockGrid:
    if grid_rows < 1 or grid_cols < 1:
        raise IndivisibleDimensions("grid dimensions must be positive")
    if mat.rows % grid_rows or mat.cols % grid_cols:
        raise IndivisibleDimensions(
            f"{mat.rows}x{mat.cols} cannot be split into a {grid_rows}x{grid_cols} grid"
        )
    br, bc = mat.rows // grid_rows, mat.cols // grid_cols
    blocks = tuple(
        tuple(
            MatrixF._wrap(mat.data[i * br:(i + 1) * br, j * bc:(j + 1) * bc].copy(), mat.modulus)
            for j in range(grid_cols)
        )
        for i in range(grid_rows)
    )
    return BlockGrid(mat, grid_rows, grid_cols, blocks)


def assemble_blocks(blocks: Iterable[Iterable[MatrixF]]) -> MatrixF:
    """Inverse of partition: stitch a rectangular grid of equal-shape blocks."""
    grid = [list(row) for row in blocks]
    if not grid or not grid[0]:
        raise RaggedBlocks("empty block grid")
    width = len(grid[0])
    first = grid[0][0]
    for row in grid:
        if len(row) != width:
            raise RaggedBlocks("block rows have different lengths")
        for blk in row:
            first._check(blk)
            if blk.shape != first.shape:
                raise RaggedBlocks(f"block shape {blk.shape} differs from {first.shape}")
    arr = np.block([[blk.data for blk in row] for row in grid])
    return MatrixF._wrap(arr.astype(first.data.dtype), first.modulus)
