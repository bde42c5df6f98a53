"""
Prime Field Arithmetic

Exact arithmetic in GF(p) for the symbols that make up subfiles, plus the
small dense linear algebra (products, inversion) that coding and decoding
need. Computation runs on `galois` field arrays; `FieldElement` is the scalar
handle the rest of the package passes around.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Iterator, Sequence, Tuple, Type

import galois
import numpy as np

from core.errors import (
    FieldDivisionError,
    FieldError,
    FieldMismatchError,
    ParamsError,
    SingularMatrixError,
)


def is_prime(n: int) -> bool:
    return n >= 2 and galois.is_prime(n)


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    candidate = max(n, 2)
    return candidate if galois.is_prime(candidate) else galois.next_prime(candidate)


@lru_cache(maxsize=None)
def galois_field(p: int) -> Type[galois.FieldArray]:
    return galois.GF(p)


@dataclass(frozen=True)
class Field:
    """The prime field GF(p)."""
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise FieldError(f"GF({self.p}) is not a prime field")

    @property
    def gf(self) -> Type[galois.FieldArray]:
        return galois_field(self.p)

    def element(self, value: int) -> "FieldElement":
        """Range-checked constructor."""
        return FieldElement(value, self)

    def coerce(self, value: int) -> "FieldElement":
        """Reduce an arbitrary integer into the field."""
        return FieldElement(int(value) % self.p, self)

    def vector(self, values: Sequence[int]) -> Tuple["FieldElement", ...]:
        return tuple(self.element(v) for v in values)

    def random_vector(self, rng: np.random.Generator, length: int) -> Tuple["FieldElement", ...]:
        return self.from_array(self.gf(rng.integers(0, self.p, size=length)))

    def array(self, values: Sequence) -> galois.FieldArray:
        """Field array from elements or nested rows of elements."""
        return self.gf(_values(values, self))

    def from_array(self, arr: galois.FieldArray):
        """Inverse of array(): tuples of FieldElement, nested like the input."""
        plain = arr.view(np.ndarray).tolist()
        if arr.ndim == 1:
            return tuple(FieldElement(int(v), self) for v in plain)
        return tuple(tuple(FieldElement(int(v), self) for v in row) for row in plain)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def elements(self) -> Iterator["FieldElement"]:
        for v in range(self.p):
            yield FieldElement(v, self)

    def __str__(self) -> str:
        return f"GF({self.p})"


@dataclass(frozen=True)
class FieldElement:
    """A value in [0, p-1] tied to its field."""
    value: int
    field: Field

    def __post_init__(self):
        if not isinstance(self.value, int) or not 0 <= self.value < self.field.p:
            raise FieldError(f"{self.value!r} is not an element of {self.field}")

    def inverse(self) -> "FieldElement":
        return field_arith(self.field.one, self, "div")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return field_arith(self, other, "add")

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return field_arith(self, other, "sub")

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return field_arith(self, other, "mul")

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return field_arith(self, other, "div")

    def __neg__(self) -> "FieldElement":
        return FieldElement(int(-self.field.gf(self.value)), self.field)

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value}"


_OPERATIONS: Dict[str, Callable] = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y,
}


def field_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply one of add/sub/mul/div to two elements of the same field."""
    if not isinstance(b, FieldElement) or a.field != b.field:
        raise FieldMismatchError(f"cannot {op} {a!r} in {a.field} with {b!r}")
    try:
        fn = _OPERATIONS[op]
    except KeyError:
        raise FieldError(f"unknown field operation {op!r}") from None
    if op == "div" and not b:
        raise FieldDivisionError(f"division by zero in {a.field}")
    gf = a.field.gf
    return FieldElement(int(fn(gf(a.value), gf(b.value))), a.field)


def field_for_params(K: int, N: int) -> Field:
    """GF(p) with p the smallest prime >= max(KN, 2)."""
    if K < 1 or N < 1:
        raise ParamsError(f"K and N must be positive, got K={K}, N={N}")
    return Field(next_prime(max(K * N, 2)))


Matrix = Tuple[Tuple[FieldElement, ...], ...]


def _values(values, field: Field):
    if isinstance(values, FieldElement):
        if values.field != field:
            raise FieldMismatchError(f"{values!r} is not in {field}")
        return values.value
    return [_values(v, field) for v in values]


def matrix_field(m: Sequence[Sequence[FieldElement]]) -> Field:
    if not m or not m[0]:
        raise FieldError("empty matrix")
    field = m[0][0].field
    if any(entry.field != field for row in m for entry in row):
        raise FieldMismatchError("matrix mixes elements of different fields")
    return field


def identity_matrix(field: Field, n: int) -> Matrix:
    return field.from_array(field.gf(np.eye(n, dtype=int)))


def mat_mul(a: Sequence[Sequence[FieldElement]], b: Sequence[Sequence[FieldElement]]) -> Matrix:
    if not a or len(a[0]) != len(b):
        raise FieldError("matrix dimensions do not agree")
    field = matrix_field(a)
    return field.from_array(field.array(a) @ field.array(b))


def _first_dependent_column(arr: galois.FieldArray) -> int:
    for col in range(1, arr.shape[1] + 1):
        if np.linalg.matrix_rank(arr[:, :col]) < col:
            return col
    return arr.shape[1]


def invert_array(arr: galois.FieldArray) -> galois.FieldArray:
    """Inverse of a square field array; SingularMatrixError names the first dependent column."""
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise FieldError(f"cannot invert a non-square {'x'.join(map(str, arr.shape))} matrix")
    try:
        return np.linalg.inv(arr)
    except np.linalg.LinAlgError:
        column = _first_dependent_column(arr)
        raise SingularMatrixError(f"matrix is singular at column {column}", column=column) from None


def invert_matrix(m: Sequence[Sequence[FieldElement]]) -> Matrix:
    size = len(m)
    if any(len(row) != size for row in m):
        raise FieldError(f"cannot invert a non-square {size}x{len(m[0]) if m else 0} matrix")
    field = matrix_field(m)
    return field.from_array(invert_array(field.array(m)))
