"""
MDS Codes

Systematic (n, k) MDS generator matrices over GF(p): Reed-Solomon style
construction, encoding of subfile vectors, decoding from any k coded symbols
and an exhaustive check of the MDS property.
"""

import json
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import galois
from pydantic import BaseModel, ValidationError

from core.errors import FieldError, GeneratorError, SingularMatrixError
from core.galois import Field, FieldElement, Matrix, invert_array

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorMatrix:
    """A k x n systematic generator; positions are 1-based in the public API."""
    k: int
    n: int
    entries: Matrix
    field: Field

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise GeneratorError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if len(self.entries) != self.k or any(len(row) != self.n for row in self.entries):
            raise GeneratorError(f"entries are not a {self.k}x{self.n} matrix")
        for row in self.entries:
            for entry in row:
                if entry.field != self.field:
                    raise GeneratorError(f"entry {entry!r} is not in {self.field}")
        for i in range(self.k):
            for j in range(self.k):
                if self.entries[i][j].value != (1 if i == j else 0):
                    raise GeneratorError("left k x k block must be the identity")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], field: Field) -> "GeneratorMatrix":
        if not rows:
            raise GeneratorError("generator needs at least one row")
        try:
            entries = tuple(field.vector(row) for row in rows)
        except FieldError as e:
            raise GeneratorError(str(e)) from e
        return cls(k=len(rows), n=len(rows[0]), entries=entries, field=field)

    def column(self, position: int) -> Tuple[FieldElement, ...]:
        return tuple(row[position - 1] for row in self.entries)

    def submatrix(self, positions: Sequence[int]) -> Matrix:
        """The k x |positions| matrix of the chosen columns."""
        return tuple(tuple(row[j - 1] for j in positions) for row in self.entries)

    def rows(self) -> List[List[int]]:
        return [[e.value for e in row] for row in self.entries]

    @cached_property
    def array(self) -> galois.FieldArray:
        return self.field.array(self.entries)

    def __getstate__(self):
        # field arrays are rebuilt on demand after unpickling
        state = dict(self.__dict__)
        state.pop("array", None)
        return state


@dataclass(frozen=True)
class CodedSubfile:
    """C_{n,i}: the i-th coded subfile of file n, one symbol per stripe."""
    file_index: int
    position: int
    symbols: Tuple[FieldElement, ...]


@dataclass(frozen=True)
class MDSVerdict:
    ok: bool
    witness: Optional[Tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.ok


class GeneratorDocument(BaseModel):
    """JSON fixture format for generator matrices."""
    field_p: int
    n: int
    k: int
    rows: List[List[int]]


def systematic_generator(n: int, k: int, field: Field) -> GeneratorMatrix:
    """Evaluate x^i at n distinct points, then row-reduce to [I | P]."""
    if k > n or k < 1:
        raise GeneratorError(f"need 1 <= k <= n, got k={k}, n={n}")
    if field.p < n:
        raise GeneratorError(
            f"{field} has fewer than {n} elements; supply an explicit generator"
        )

    gf = field.gf
    vandermonde = gf([[pow(x, i, field.p) for x in range(n)] for i in range(k)])
    entries = field.from_array(invert_array(vandermonde[:, :k]) @ vandermonde)
    g = GeneratorMatrix(k=k, n=n, entries=entries, field=field)
    logger.debug(f"Built systematic ({n},{k}) generator over {field}")
    return g


def encode(message: Sequence[FieldElement], g: GeneratorMatrix) -> Tuple[FieldElement, ...]:
    """Codeword m.G; the first k symbols are the message."""
    if len(message) != g.k:
        raise GeneratorError(f"message has {len(message)} symbols, code expects {g.k}")
    return g.field.from_array(g.field.array(message) @ g.array)


@lru_cache(maxsize=4096)
def _decoding_matrix(g: GeneratorMatrix, positions: Tuple[int, ...]) -> galois.FieldArray:
    return invert_array(g.array[:, [j - 1 for j in positions]])


def _check_positions(positions: Sequence[int], g: GeneratorMatrix) -> Tuple[int, ...]:
    positions = tuple(positions)
    if len(set(positions)) != len(positions) or len(positions) != g.k:
        raise GeneratorError(f"need {g.k} distinct positions, got {positions}")
    if any(not 1 <= j <= g.n for j in positions):
        raise GeneratorError(f"positions {positions} fall outside 1..{g.n}")
    return positions


def decode_from_any_k(
    positions: Sequence[int],
    symbols: Sequence[FieldElement],
    g: GeneratorMatrix,
) -> Tuple[FieldElement, ...]:
    """Recover the message from the codeword restricted to k distinct positions."""
    positions = _check_positions(positions, g)
    if len(symbols) != g.k:
        raise GeneratorError(f"need {g.k} symbols, got {len(symbols)}")
    return g.field.from_array(g.field.array(symbols) @ _decoding_matrix(g, positions))


def encode_striped(
    subfiles: Sequence[Sequence[FieldElement]],
    g: GeneratorMatrix,
) -> Tuple[Tuple[FieldElement, ...], ...]:
    """Encode k subfiles of L symbols each into n coded subfiles, stripe by stripe."""
    if len(subfiles) != g.k:
        raise GeneratorError(f"got {len(subfiles)} subfiles, code expects {g.k}")
    stripes = len(subfiles[0])
    if stripes == 0 or any(len(s) != stripes for s in subfiles):
        raise GeneratorError("subfiles must share a positive length")
    # row j of G^T S is coded subfile j
    return g.field.from_array(g.array.T @ g.field.array(subfiles))


def decode_striped(
    positions: Sequence[int],
    coded: Sequence[Sequence[FieldElement]],
    g: GeneratorMatrix,
) -> Tuple[Tuple[FieldElement, ...], ...]:
    """Inverse of encode_striped given k coded subfiles at the named positions."""
    positions = _check_positions(positions, g)
    if len(coded) != g.k:
        raise GeneratorError(f"need {g.k} coded subfiles, got {len(coded)}")
    stripes = len(coded[0])
    if stripes == 0 or any(len(c) != stripes for c in coded):
        raise GeneratorError("coded subfiles must share a positive length")
    return g.field.from_array(_decoding_matrix(g, positions).T @ g.field.array(coded))


def verify_mds(g: GeneratorMatrix) -> MDSVerdict:
    """Check every k x k column submatrix; the first singular one is the witness."""
    for positions in combinations(range(1, g.n + 1), g.k):
        try:
            _decoding_matrix(g, positions)
        except SingularMatrixError:
            logger.debug(f"Columns {positions} of the generator are dependent")
            return MDSVerdict(ok=False, witness=positions)
    return MDSVerdict(ok=True)


def mutate_generator(g: GeneratorMatrix, row: int, col: int, value: int) -> GeneratorMatrix:
    """Copy of g with entry (row, col) replaced; 1-based indices."""
    entries = [list(r) for r in g.entries]
    entries[row - 1][col - 1] = g.field.element(value)
    return GeneratorMatrix(k=g.k, n=g.n, entries=tuple(tuple(r) for r in entries), field=g.field)


def generator_to_document(g: GeneratorMatrix) -> GeneratorDocument:
    return GeneratorDocument(field_p=g.field.p, n=g.n, k=g.k, rows=g.rows())


def generator_from_document(doc: GeneratorDocument) -> GeneratorMatrix:
    if len(doc.rows) != doc.k or any(len(r) != doc.n for r in doc.rows):
        raise GeneratorError(f"rows do not form a {doc.k}x{doc.n} matrix")
    try:
        field = Field(doc.field_p)
    except FieldError as e:
        raise GeneratorError(str(e)) from e
    return GeneratorMatrix.from_rows(doc.rows, field)


def load_generator(path: Union[str, Path]) -> GeneratorMatrix:
    try:
        doc = GeneratorDocument.model_validate(json.loads(Path(path).read_text()))
    except (OSError, ValueError, ValidationError) as e:
        raise GeneratorError(f"cannot read generator from {path}: {e}") from e
    return generator_from_document(doc)


def render_combination(
    coefficients: Sequence[FieldElement],
    label: str,
) -> str:
    """Render sum_j c_j X_j in the worked-example notation (A_1⊕2·A_2...)."""
    terms = []
    for j, c in enumerate(coefficients, start=1):
        if not c:
            continue
        terms.append(f"{label}_{j}" if c.value == 1 else f"{c.value}·{label}_{j}")
    return "⊕".join(terms) if terms else "0"

