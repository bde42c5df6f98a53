"""
Decodability and Privacy Audits

Exhaustive checks at desk scale:
  - decodability: every real user recovers its file for every key vector S
    and every demand vector d
  - privacy: for each user k, the exact distribution of the user's view
    (d_k, S_k, Z_k, X) given the other users' demands is the same for every
    value of those demands
The library is held fixed. Probabilities are exact Fractions.
"""

import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import partial
from itertools import combinations, islice, product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import pathos.multiprocessing as mp

from core.errors import CapExceededError, DecodeError, SingularMatrixError
from core.mds import GeneratorMatrix
from core.model import (
    DemandVector,
    FileLibrary,
    SystemParams,
    TransmissionRecord,
    file_label,
    render_entry,
)
from schemes.nonprivate_scheme import NonPrivatePlacement, np_place
from schemes.private_scheme import pv_decode, pv_deliver, pv_place, virtual_user_for

logger = logging.getLogger(__name__)

DEFAULT_CAP = 10 ** 6
# below this many cases the default job count stays in-process
PARALLEL_THRESHOLD = 512

Distribution = Dict[str, Fraction]
Case = Tuple[Tuple[int, ...], Tuple[int, ...]]
Context = Tuple[SystemParams, FileLibrary, GeneratorMatrix, NonPrivatePlacement]


class KeyMode(str, Enum):
    """How privacy keys are drawn during the audit."""
    UNIFORM = "uniform"
    IDENTITY = "identity"


def case_count(params: SystemParams) -> int:
    """|[N]^K| demand vectors times |[N]^K| key vectors."""
    return (params.N ** params.K) ** 2


def _vectors(N: int, length: int) -> List[Tuple[int, ...]]:
    return list(product(range(1, N + 1), repeat=length))


def _labels(values: Sequence[int]) -> str:
    return "[" + ",".join(file_label(v) for v in values) + "]"


def _map(fn: Callable, items: Sequence, jobs: Optional[int]) -> List:
    """Order-preserving fan-out over worker processes."""
    if jobs is None:
        jobs = (os.cpu_count() or 1) if len(items) >= PARALLEL_THRESHOLD else 1
    nprocs = min(jobs, len(items))
    if nprocs < 2:
        return [fn(item) for item in items]
    pool = mp.Pool(nprocs)
    try:
        return pool.map(fn, items)
    finally:
        pool.close()
        pool.terminate()


# Decodability

@dataclass(frozen=True)
class DecodabilityCounterexample:
    demand: Tuple[int, ...]
    keys: Tuple[int, ...]
    user: int
    expected: Tuple[int, ...]
    decoded: Optional[Tuple[int, ...]]
    error: str = ""


@dataclass
class DecodabilityReport:
    params: Dict[str, int]
    total_cases: int
    cases_checked: int
    counterexamples: List[DecodabilityCounterexample] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    @property
    def complete(self) -> bool:
        return self.cases_checked == self.total_cases


def verify_decodability(
    params: SystemParams,
    lib: FileLibrary,
    g: GeneratorMatrix,
    cap: int = DEFAULT_CAP,
    jobs: Optional[int] = None,
) -> DecodabilityReport:
    """Place, deliver and decode for every (S, d); record each mismatch.

    The generator is not MDS-checked; a broken code shows up as
    counterexamples.
    """
    total = case_count(params)
    base = np_place(params, lib, g, check_mds=False)
    if total > cap:
        logger.warning(f"Decodability audit capped at {cap} of {total} cases")
    vectors = _vectors(params.N, params.K)
    cases = list(islice(product(vectors, repeat=2), cap))

    check = partial(_check_case, (params, lib, g, base))
    found = [c for batch in _map(check, cases, jobs) for c in batch]
    report = DecodabilityReport(
        params=params.describe(),
        total_cases=total,
        cases_checked=len(cases),
        counterexamples=found,
    )
    logger.info(
        f"Decodability: {report.cases_checked}/{total} cases, "
        f"{len(found)} counterexamples"
    )
    return report


def _check_case(context: Context, case: Case) -> List[DecodabilityCounterexample]:
    params, lib, g, base = context
    keys, demand = case
    placement = pv_place(params, lib, g, keys=keys, base=base)
    d = DemandVector(demand, params.N)
    x = pv_deliver(placement, d)
    found = []
    for k in range(1, params.K + 1):
        expected = tuple(s.value for s in lib.file(d[k]))
        decoded, error = None, ""
        try:
            decoded = tuple(s.value for s in pv_decode(
                k, placement.real_caches[k - 1], placement.key(k), d[k], x, g, params.N,
            ))
        except (SingularMatrixError, DecodeError) as e:
            error = str(e)
        if decoded != expected:
            found.append(DecodabilityCounterexample(
                demand=demand, keys=keys, user=k, expected=expected, decoded=decoded, error=error,
            ))
    return found


# Privacy

@dataclass(frozen=True)
class PrivacyWitness:
    rest_a: Tuple[int, ...]
    rest_b: Tuple[int, ...]
    event: str
    probability_a: Fraction
    probability_b: Fraction


@dataclass
class UserPrivacyVerdict:
    user: int
    private: bool
    max_tv: Fraction
    witness: Optional[PrivacyWitness] = None


@dataclass
class PrivacyReport:
    params: Dict[str, int]
    key_mode: KeyMode
    total_cases: int
    verdicts: List[UserPrivacyVerdict] = field(default_factory=list)
    # user -> d_{~k} -> event -> probability
    distributions: Dict[int, Dict[Tuple[int, ...], Distribution]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(v.private for v in self.verdicts)

    def verdict(self, user: int) -> UserPrivacyVerdict:
        return self.verdicts[user - 1]


def _event(d_k: int, s_k: int, cache: Tuple[int, ...], x: TransmissionRecord) -> str:
    """Canonical serialization of one user view."""
    broadcast = [[vu, n, list(symbols)] for vu, n, symbols in x.view_key()]
    return json.dumps([d_k, s_k, list(cache), broadcast], separators=(",", ":"))


def _total_variation(p: Distribution, q: Distribution) -> Fraction:
    return sum((abs(p.get(e, Fraction(0)) - q.get(e, Fraction(0))) for e in set(p) | set(q)), Fraction(0)) / 2


def verify_privacy(
    params: SystemParams,
    lib: FileLibrary,
    g: GeneratorMatrix,
    cap: int = DEFAULT_CAP,
    jobs: Optional[int] = None,
    key_mode: KeyMode = KeyMode.UNIFORM,
) -> PrivacyReport:
    """Exact conditional distributions of each user's view given d_{~k}."""
    total = case_count(params)
    if total > cap:
        raise CapExceededError(f"privacy audit needs {total} cases, cap is {cap}")

    N, K = params.N, params.K
    base = np_place(params, lib, g)
    if key_mode == KeyMode.IDENTITY:
        key_vectors = [(1,) * K]
    else:
        key_vectors = _vectors(N, K)
    demands = _vectors(N, K)

    grid = [(s, d) for s in key_vectors for d in demands]
    deliver = partial(_deliver_case, (params, lib, g, base))
    broadcasts = list(zip(grid, _map(deliver, grid, jobs)))
    weight = Fraction(1, N * len(key_vectors))

    report = PrivacyReport(params=params.describe(), key_mode=key_mode, total_cases=total)
    for k in range(1, K + 1):
        per_rest = _tally(k, base, broadcasts, weight)
        report.distributions[k] = per_rest
        report.verdicts.append(_judge(k, per_rest))

    logger.info(
        f"Privacy ({key_mode.value} keys): "
        + ", ".join(f"user {v.user} {'private' if v.private else 'LEAKS'}" for v in report.verdicts)
    )
    return report


def _deliver_case(context: Context, case: Case) -> TransmissionRecord:
    params, lib, g, base = context
    keys, demand = case
    return pv_deliver(pv_place(params, lib, g, keys=keys, base=base), DemandVector(demand, params.N))


def _tally(
    k: int,
    base: NonPrivatePlacement,
    broadcasts: Iterable[Tuple[Case, TransmissionRecord]],
    weight: Fraction,
) -> Dict[Tuple[int, ...], Distribution]:
    """User k's view distribution for every value of d_{~k}."""
    N = base.params.N
    per_rest: Dict[Tuple[int, ...], Distribution] = defaultdict(lambda: defaultdict(Fraction))
    for (keys, demand), x in broadcasts:
        d = DemandVector(demand, N)
        s_k = keys[k - 1]
        cache = tuple(c.value for c in base.cache(virtual_user_for(k, s_k, N)).symbols)
        per_rest[d.complement(k)][_event(d[k], s_k, cache, x)] += weight
    return {rest: dict(sorted(dist.items())) for rest, dist in sorted(per_rest.items())}


def _judge(k: int, per_rest: Dict[Tuple[int, ...], Distribution]) -> UserPrivacyVerdict:
    rests = list(per_rest)
    max_tv = Fraction(0)
    witness = None
    for a, b in combinations(rests, 2):
        p, q = per_rest[a], per_rest[b]
        tv = _total_variation(p, q)
        max_tv = max(max_tv, tv)
        if tv and witness is None:
            event = next(e for e in sorted(set(p) | set(q)) if p.get(e, 0) != q.get(e, 0))
            witness = PrivacyWitness(
                rest_a=a, rest_b=b, event=event,
                probability_a=p.get(event, Fraction(0)),
                probability_b=q.get(event, Fraction(0)),
            )
    return UserPrivacyVerdict(user=k, private=witness is None, max_tv=max_tv, witness=witness)


# Table reconstruction

@dataclass
class BroadcastTable:
    """Demand vector for each (cache assignment, broadcast) pair."""
    row_labels: List[str]
    column_labels: List[List[str]]
    cells: List[List[Optional[str]]]
    demand_labels: List[str]

    @property
    def latin_square(self) -> bool:
        demands = sorted(self.demand_labels)
        rows_ok = all(sorted(c for c in row if c) == demands for row in self.cells)
        columns = list(zip(*self.cells))
        cols_ok = all(sorted(c for c in col if c) == demands for col in columns)
        return rows_ok and cols_ok


def table1_reconstruct(params: SystemParams, lib: FileLibrary, g: GeneratorMatrix) -> BroadcastTable:
    """Rows: key vectors (as the cached virtual users); columns: distinct broadcasts.

    Columns follow the broadcasts of the first row in demand order, so for
    K=N=2 the layout matches the worked example.
    """
    N, K = params.N, params.K
    base = np_place(params, lib, g)
    demands = _vectors(N, K)
    key_vectors = _vectors(N, K)

    rows: List[Dict[Tuple[Tuple[int, int], ...], str]] = []
    row_labels = []
    columns: List[Tuple[Tuple[int, int], ...]] = []
    column_labels: List[List[str]] = []
    for keys in key_vectors:
        placement = pv_place(params, lib, g, keys=keys, base=base)
        row_labels.append(",".join(f"Z_{placement.virtual_user(k)}" for k in range(1, K + 1)))
        row: Dict[Tuple[Tuple[int, int], ...], str] = {}
        for demand in demands:
            x = pv_deliver(placement, DemandVector(demand, N))
            key = x.label_key()
            row[key] = _labels(demand)
            if key not in columns:
                columns.append(key)
                column_labels.append([render_entry(e, g) for e in x.entries])
        rows.append(row)

    cells = [[row.get(col) for col in columns] for row in rows]
    return BroadcastTable(
        row_labels=row_labels,
        column_labels=column_labels,
        cells=cells,
        demand_labels=[_labels(d) for d in demands],
    )


def render_table(table: BroadcastTable, corner: str = "Cache 1, Cache 2") -> str:
    """Aligned text: broadcast entries stacked in the header, demands below."""
    height = max(len(c) for c in table.column_labels)
    first = max([len(corner)] + [len(r) for r in table.row_labels])
    widths = [
        max([len(s) for s in col] + [len(c or "-") for c in column_cells])
        for col, column_cells in zip(table.column_labels, zip(*table.cells))
    ]
    lines = []
    for i in range(height):
        head = corner if i == 0 else ""
        parts = [(col[i] if i < len(col) else "").ljust(w) for col, w in zip(table.column_labels, widths)]
        lines.append(" | ".join([head.ljust(first)] + parts).rstrip())
    lines.append("-+-".join(["-" * first] + ["-" * w for w in widths]))
    for label, row in zip(table.row_labels, table.cells):
        parts = [(c or "-").ljust(w) for c, w in zip(row, widths)]
        lines.append(" | ".join([label.ljust(first)] + parts).rstrip())
    return "\n".join(lines) + "\n"


# Documents

def _fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def decodability_to_document(report: DecodabilityReport) -> Dict[str, object]:
    return {
        "params": report.params,
        "passed": report.passed,
        "complete": report.complete,
        "total_cases": report.total_cases,
        "cases_checked": report.cases_checked,
        "counterexamples": [
            {
                "demand": _labels(c.demand),
                "keys": list(c.keys),
                "user": c.user,
                "expected": list(c.expected),
                "decoded": None if c.decoded is None else list(c.decoded),
                "error": c.error,
            }
            for c in report.counterexamples
        ],
    }


def privacy_to_document(report: PrivacyReport) -> Dict[str, object]:
    users = []
    for v in report.verdicts:
        entry: Dict[str, object] = {
            "user": v.user,
            "private": v.private,
            "max_tv": _fraction(v.max_tv),
            "distributions": {
                _labels(rest): {e: _fraction(p) for e, p in dist.items()}
                for rest, dist in report.distributions[v.user].items()
            },
        }
        if v.witness is not None:
            entry["witness"] = {
                "rest_a": _labels(v.witness.rest_a),
                "rest_b": _labels(v.witness.rest_b),
                "event": v.witness.event,
                "probability_a": _fraction(v.witness.probability_a),
                "probability_b": _fraction(v.witness.probability_b),
            }
        users.append(entry)
    return {
        "params": report.params,
        "key_mode": report.key_mode.value,
        "passed": report.passed,
        "total_cases": report.total_cases,
        "users": users,
    }


def table_to_document(table: BroadcastTable) -> Dict[str, object]:
    return {
        "rows": table.row_labels,
        "columns": table.column_labels,
        "cells": table.cells,
        "latin_square": table.latin_square,
    }
