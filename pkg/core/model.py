"""
System Model

Parameters, file library, demands and demand profiles, cache contents and the
broadcast transmission record shared by the non-private and private schemes.
Users and files are 1-based throughout.
"""

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from core.errors import DemandError, FieldError, LibraryError, ParamsError
from core.galois import Field, FieldElement
from core.mds import GeneratorMatrix, render_combination

logger = logging.getLogger(__name__)


def file_label(n: int) -> str:
    """A, B, C ... as in the worked examples; W<n> past Z."""
    return chr(ord("A") + n - 1) if 1 <= n <= 26 else f"W{n}"


def parse_file_label(token: str, N: int) -> int:
    token = token.strip()
    if token.isdigit():
        n = int(token)
    elif len(token) == 1 and token.isalpha():
        n = ord(token.upper()) - ord("A") + 1
    elif token[:1] in ("W", "w") and token[1:].isdigit():
        n = int(token[1:])
    else:
        raise DemandError(f"cannot read file label {token!r}")
    if not 1 <= n <= N:
        raise DemandError(f"file {token!r} is outside 1..{N}")
    return n


@dataclass(frozen=True)
class SystemParams:
    """K real users, N files of F symbols over `field`."""
    K: int
    N: int
    F: int
    field: Field

    def __post_init__(self):
        if self.K < 1 or self.N < 1:
            raise ParamsError(f"K and N must be positive, got K={self.K}, N={self.N}")
        if self.F < 1:
            raise ParamsError(f"file length must be positive, got F={self.F}")
        if self.F % self.subpacket_count:
            raise ParamsError(
                f"F={self.F} is not divisible by K(N-1)+1={self.subpacket_count}"
            )

    @property
    def subpacket_count(self) -> int:
        return self.K * (self.N - 1) + 1

    @property
    def virtual_user_count(self) -> int:
        return self.K * self.N

    @property
    def stripe_length(self) -> int:
        """Symbols per subfile."""
        return self.F // self.subpacket_count

    @property
    def memory_point(self) -> Fraction:
        """M* = 1/(K(N-1)+1)."""
        return Fraction(1, self.subpacket_count)

    def with_file_length(self, F: int) -> "SystemParams":
        return SystemParams(K=self.K, N=self.N, F=F, field=self.field)

    def describe(self) -> Dict[str, int]:
        return {"K": self.K, "N": self.N, "F": self.F, "p": self.field.p}


@dataclass(frozen=True)
class FileLibrary:
    """W_1..W_N, each a sequence of F field symbols."""
    files: Tuple[Tuple[FieldElement, ...], ...]

    def __post_init__(self):
        if not self.files:
            raise LibraryError("library has no files")
        lengths = {len(f) for f in self.files}
        if len(lengths) != 1:
            raise LibraryError(f"files have unequal lengths {sorted(lengths)}")

    @property
    def N(self) -> int:
        return len(self.files)

    @property
    def F(self) -> int:
        return len(self.files[0])

    def file(self, n: int) -> Tuple[FieldElement, ...]:
        return self.files[n - 1]

    def subfiles(self, n: int, count: int) -> Tuple[Tuple[FieldElement, ...], ...]:
        """Split W_n into `count` equal consecutive subfiles."""
        w = self.file(n)
        size = len(w) // count
        return tuple(w[j * size:(j + 1) * size] for j in range(count))

    def segment(self, start: int, stop: int) -> "FileLibrary":
        return FileLibrary(tuple(f[start:stop] for f in self.files))


@dataclass(frozen=True)
class DemandVector:
    """One requested file index per user."""
    demands: Tuple[int, ...]
    N: int

    def __post_init__(self):
        if not self.demands:
            raise DemandError("empty demand vector")
        bad = [d for d in self.demands if not 1 <= d <= self.N]
        if bad:
            raise DemandError(f"demands {bad} are outside 1..{self.N}")

    @classmethod
    def from_labels(cls, text: str, N: int) -> "DemandVector":
        return cls(tuple(parse_file_label(t, N) for t in text.split(",")), N)

    def __len__(self) -> int:
        return len(self.demands)

    def __getitem__(self, k: int) -> int:
        """1-based: d[k] is user k's demand."""
        if not 1 <= k <= len(self.demands):
            raise DemandError(f"user {k} is outside 1..{len(self.demands)}")
        return self.demands[k - 1]

    def complement(self, k: int) -> Tuple[int, ...]:
        """d_{~k}: every demand except user k's."""
        return self.demands[:k - 1] + self.demands[k:]

    def labels(self) -> str:
        return "[" + ",".join(file_label(d) for d in self.demands) + "]"


def demand_group(d: DemandVector, n: int) -> FrozenSet[int]:
    """Users requesting file n."""
    return frozenset(k for k, dk in enumerate(d.demands, start=1) if dk == n)


@dataclass(frozen=True)
class DemandProfile:
    counts: Tuple[int, ...]

    def __post_init__(self):
        if list(self.counts) != sorted(self.counts, reverse=True):
            raise DemandError(f"profile {list(self.counts)} is not sorted descending")


def demand_profile(d: DemandVector, N: int) -> DemandProfile:
    """Per-file request counts, sorted descending and zero-padded to N."""
    counts = (len(demand_group(d, n)) for n in range(1, N + 1))
    return DemandProfile(tuple(sorted(counts, reverse=True)))


def is_uniform(profile: DemandProfile) -> bool:
    return len(set(profile.counts)) <= 1


@dataclass(frozen=True)
class CacheContent:
    """Z_k: the symbols stored at user `user`."""
    user: int
    symbols: Tuple[FieldElement, ...]

    def values(self) -> List[int]:
        return [s.value for s in self.symbols]


@dataclass(frozen=True)
class TransmissionEntry:
    """One coded subfile on the broadcast link.

    virtual_user is None for segments sent in the clear by memory sharing.
    """
    virtual_user: Optional[int]
    file_index: int
    symbols: Tuple[FieldElement, ...]

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        # coded entries first, then clear segments by file
        if self.virtual_user is None:
            return (1, 0, self.file_index)
        return (0, self.virtual_user, self.file_index)

    def view(self) -> Tuple[int, int, Tuple[int, ...]]:
        return (
            0 if self.virtual_user is None else self.virtual_user,
            self.file_index,
            tuple(s.value for s in self.symbols),
        )


@dataclass(frozen=True)
class TransmissionRecord:
    """X^d in canonical order: virtual user ascending, then file ascending."""
    entries: Tuple[TransmissionEntry, ...]
    file_length: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda e: e.sort_key)))
        keys = [e.sort_key for e in self.entries]
        if len(set(keys)) != len(keys):
            raise ParamsError("transmission repeats a (virtual user, file) entry")

    @property
    def symbol_count(self) -> int:
        return sum(len(e.symbols) for e in self.entries)

    @property
    def rate(self) -> Fraction:
        """Broadcast size normalized by F."""
        return Fraction(self.symbol_count, self.file_length)

    def addressed_to(self, virtual_user: int) -> List[TransmissionEntry]:
        return [e for e in self.entries if e.virtual_user == virtual_user]

    def of_file(self, n: int) -> List[TransmissionEntry]:
        return [e for e in self.entries if e.file_index == n and e.virtual_user is not None]

    def clear_segment(self, n: int) -> Optional[TransmissionEntry]:
        return next((e for e in self.entries if e.virtual_user is None and e.file_index == n), None)

    def view_key(self) -> Tuple[Tuple[int, int, Tuple[int, ...]], ...]:
        """Hashable canonical form of what every user observes."""
        return tuple(e.view() for e in self.entries)

    def label_key(self) -> Tuple[Tuple[int, int], ...]:
        """(virtual user, file) pairs only, independent of symbol values."""
        return tuple((e.view()[0], e.file_index) for e in self.entries)


# Wire documents

class LibraryDocument(BaseModel):
    p: int
    K: int
    N: int
    F: int
    files: List[List[int]]


class TraceEntryDocument(BaseModel):
    vu: Optional[int]
    file: int
    symbols: List[int]
    label: str = ""


class TraceDocument(BaseModel):
    entries: List[TraceEntryDocument]
    rate_num: int
    rate_den: int


def load_library(path: Union[str, Path]) -> Tuple[SystemParams, FileLibrary]:
    """Read {p, K, N, F, files} and validate it against the system invariants."""
    try:
        doc = LibraryDocument.model_validate(json.loads(Path(path).read_text()))
    except (OSError, ValueError, ValidationError) as e:
        raise LibraryError(f"cannot read library from {path}: {e}") from e
    logger.info(f"Loaded library from {path}: N={doc.N}, F={doc.F} over GF({doc.p})")
    return library_from_document(doc)


def library_from_document(doc: LibraryDocument) -> Tuple[SystemParams, FileLibrary]:
    try:
        field = Field(doc.p)
        params = SystemParams(K=doc.K, N=doc.N, F=doc.F, field=field)
        files = tuple(field.vector(f) for f in doc.files)
    except (FieldError, ParamsError) as e:
        raise LibraryError(str(e)) from e
    library = FileLibrary(files)
    if library.N != params.N or library.F != params.F:
        raise LibraryError(
            f"library holds {library.N} files of {library.F} symbols, "
            f"header says N={params.N}, F={params.F}"
        )
    return params, library


def library_to_document(params: SystemParams, library: FileLibrary) -> LibraryDocument:
    return LibraryDocument(
        p=params.field.p, K=params.K, N=params.N, F=params.F,
        files=[[s.value for s in f] for f in library.files],
    )


def save_library(path: Union[str, Path], params: SystemParams, library: FileLibrary) -> None:
    write_json(path, library_to_document(params, library).model_dump())


def random_library(params: SystemParams, seed: int) -> FileLibrary:
    rng = np.random.default_rng(seed)
    return FileLibrary(tuple(params.field.random_vector(rng, params.F) for _ in range(params.N)))


def zero_library(params: SystemParams) -> FileLibrary:
    return FileLibrary(tuple((params.field.zero,) * params.F for _ in range(params.N)))


def write_json(path: Union[str, Path], payload: object) -> None:
    """Stable JSON bytes: sorted keys, fixed indent, trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def render_entry(entry: TransmissionEntry, g: GeneratorMatrix) -> str:
    """Worked-example notation: C_{n,i} as a combination of W_n's subfiles."""
    name = file_label(entry.file_index)
    if entry.virtual_user is None:
        return f"{name}[clear]"
    return render_combination(g.column(entry.virtual_user), name)


def trace_to_document(record: TransmissionRecord, g: GeneratorMatrix) -> TraceDocument:
    rate = record.rate
    return TraceDocument(
        entries=[
            TraceEntryDocument(
                vu=e.virtual_user,
                file=e.file_index,
                symbols=[s.value for s in e.symbols],
                label=render_entry(e, g),
            )
            for e in record.entries
        ],
        rate_num=rate.numerator,
        rate_den=rate.denominator,
    )
