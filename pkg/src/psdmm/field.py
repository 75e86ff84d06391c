"""Prime-field arithmetic, distinct point sampling and seeded RNG streams.

Matrices never hold FieldElement objects; they keep canonical Python/numpy
integers and carry the Modulus alongside. FieldElement is the scalar type used
at API boundaries (evaluation points, queries).
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Union

import numpy as np
from sympy import isprime

from .errors import FieldTooSmall, ModulusMismatch, ZeroInverse

MERSENNE_61 = (1 << 61) - 1

# Point-pool sampling strategy by field size: sort random keys, numpy's choice,
# then rejection for large fields.
_KEYSORT_LIMIT = 4096
_CHOICE_LIMIT = 1 << 20


@dataclass(frozen=True)
class Modulus:
    """A prime modulus q with 3 <= q < 2**64."""

    q: int

    def __post_init__(self):
        q = self.q
        if not isinstance(q, (int, np.integer)) or isinstance(q, bool):
            raise TypeError(f"modulus must be an integer, got {type(q).__name__}")
        object.__setattr__(self, "q", int(q))
        if self.q < 3 or self.q >= 1 << 64:
            raise ValueError(f"modulus must lie in [3, 2**64), got {self.q}")
        if not isprime(self.q):
            raise ValueError(f"modulus {self.q} is not prime")

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(int(value) % self.q, self)

    def __int__(self):
        return self.q

    def __repr__(self):
        return f"Modulus({self.q})"


DEFAULT_MODULUS = Modulus(MERSENNE_61)

ModulusLike = Union[Modulus, int]


def as_modulus(modulus: ModulusLike) -> Modulus:
    return modulus if isinstance(modulus, Modulus) else Modulus(modulus)


@dataclass(frozen=True)
class FieldElement:
    value: int
    modulus: Modulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.q:
            raise ValueError(f"{self.value} is not canonical mod {self.modulus.q}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus.q != self.modulus.q:
                raise ModulusMismatch(
                    f"cannot combine elements mod {self.modulus.q} and mod {other.modulus.q}"
                )
            return other.value
        if isinstance(other, (int, np.integer)) and not isinstance(other, bool):
            return int(other) % self.modulus.q
        return NotImplemented

    def _new(self, value: int) -> "FieldElement":
        return FieldElement(value % self.modulus.q, self.modulus)

    def __add__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else self._new(self.value + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else self._new(self.value - v)

    def __rsub__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else self._new(v - self.value)

    def __mul__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else self._new(self.value * v)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return self * fp_inv(self._new(v))

    def __neg__(self):
        return self._new(-self.value)

    def __pow__(self, e: int):
        return fp_pow(self, e)

    def __int__(self):
        return self.value

    __index__ = __int__

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.modulus.q})"


def fp_inv(a: FieldElement) -> FieldElement:
    """Multiplicative inverse by Fermat's little theorem."""
    if a.value == 0:
        raise ZeroInverse(f"0 has no inverse mod {a.modulus.q}")
    q = a.modulus.q
    return FieldElement(pow(a.value, q - 2, q), a.modulus)


def fp_pow(a: FieldElement, e: int) -> FieldElement:
    """a**e by square-and-multiply; 0**0 is 1."""
    if e < 0:
        raise ValueError("exponent must be non-negative")
    q = a.modulus.q
    result, base = 1, a.value
    while e:
        if e & 1:
            result = result * base % q
        base = base * base % q
        e >>= 1
    return FieldElement(result, a.modulus)


def make_rng(seed: int, stream: str) -> np.random.Generator:
    """Independent generator for a named sub-stream of one experiment seed.

    Streams with different names never share state, so adding draws to one
    (say the mask) leaves the others (points, library) unchanged.
    """
    key = zlib.crc32(stream.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))


def sample_distinct_array(count: int, runs: int, rng: np.random.Generator,
                          modulus: ModulusLike) -> np.ndarray:
    """``runs`` independent draws of ``count`` distinct nonzero residues.

    Each row is uniform over ordered tuples of distinct elements of F_q^*.
    Returns int64 for moduli below 2**63, object (Python ints) otherwise.
    """
    q = as_modulus(modulus).q
    if count < 0 or runs < 0:
        raise ValueError("count and runs must be non-negative")
    if count > q - 1:
        raise FieldTooSmall(f"cannot draw {count} distinct nonzero points mod {q}")
    if q - 1 <= _KEYSORT_LIMIT:
        # prefix of a uniformly random permutation of 1..q-1
        keys = rng.random((runs, q - 1))
        return np.argsort(keys, axis=1)[:, :count].astype(np.int64) + 1
    if q - 1 <= _CHOICE_LIMIT:
        return np.array([rng.choice(q - 1, size=count, replace=False) + 1 for _ in range(runs)],
                        dtype=np.int64).reshape(runs, count)
    rows = []
    for _ in range(runs):
        # sequential rejection of repeats keeps the ordered tuple uniform
        values, seen = [], set()
        while len(values) < count:
            for v in rng.integers(1, q, size=count - len(values), dtype=np.uint64).tolist():
                if v not in seen:
                    seen.add(v)
                    values.append(v)
        rows.append(values)
    dtype = np.int64 if q < 1 << 63 else object
    return np.array(rows, dtype=dtype).reshape(runs, count)


def sample_distinct_points(count: int, rng: np.random.Generator,
                           modulus: ModulusLike) -> list[FieldElement]:
    """Draw ``count`` pairwise-distinct nonzero elements, uniform over ordered tuples."""
    mod = as_modulus(modulus)
    row = sample_distinct_array(count, 1, rng, mod)[0]
    return [FieldElement(int(v), mod) for v in row]


def powmod_array(x: np.ndarray, e: int, q: int) -> np.ndarray:
    """Elementwise x**e mod q by square-and-multiply (x already reduced)."""
    if e < 0:
        raise ValueError("exponent must be non-negative")
    if 2 * (q - 1) ** 2 > (1 << 63) - 1:
        x = np.asarray(x).astype(object)
    result = np.ones_like(x)
    base = x.copy()
    while e:
        if e & 1:
            result = result * base % q
        base = base * base % q
        e >>= 1
    return result
