"""
Rate Analysis

Exact rational evaluation of the closed-form rates: the optimal private rate
N(1-M) on [0, M*], the lower bound it meets, the binomial rate of the
virtual-user scheme and its lower convex envelope, and the comparison rates
of the other known schemes at M* = 1/(K(N-1)+1).

Floats only ever appear in rendered output.
"""

import csv
import io
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from core.errors import ParamsError
from core.model import TransmissionRecord

logger = logging.getLogger(__name__)

THIS_WORK = "this_work"
LOWER_BOUND = "lower_bound"
VIRTUAL_USER = "virtual_user_sharing"
VIRTUAL_USER_ENVELOPE = "virtual_user_envelope"
LFR_DPCU = "lfr_dpcu"
SUBPACKETIZATION_3 = "subpkt3_sharing"


@dataclass(frozen=True)
class RatePoint:
    M: Fraction
    R: Fraction
    label: str
    subpacketization: Optional[int] = None

    def __post_init__(self):
        if self.M < 0 or self.R < 0:
            raise ParamsError(f"rate point ({self.M}, {self.R}) has a negative coordinate")


def memory_point(K: int, N: int) -> Fraction:
    _check_system(K, N)
    return Fraction(1, K * (N - 1) + 1)


def _check_system(K: int, N: int) -> None:
    if K < 1 or N < 1:
        raise ParamsError(f"K and N must be positive, got K={K}, N={N}")


def binomial(a: int, b: int) -> int:
    """C(a, b), zero outside 0 <= b <= a."""
    if b < 0 or b > a or a < 0:
        return 0
    return comb(a, b)


def optimal_private_rate(K: int, N: int, M: Fraction) -> Fraction:
    """N(1-M), claimed only for 0 <= M <= M*."""
    M = Fraction(M)
    m_star = memory_point(K, N)
    if not 0 <= M <= m_star:
        raise ParamsError(f"M={M} is outside [0, {m_star}] where N(1-M) is optimal")
    return N * (1 - M)


def lower_bound(K: int, N: int, M: Fraction) -> Fraction:
    """max over l in [N] of l + min(l+1,K)(N-l)/(N-l+min(l+1,K)) - lM."""
    _check_system(K, N)
    M = Fraction(M)
    if not 0 <= M <= N:
        raise ParamsError(f"M={M} is outside [0, {N}]")
    best = None
    for l in range(1, N + 1):
        m = min(l + 1, K)
        value = l + Fraction(m * (N - l), N - l + m) - l * M
        best = value if best is None else max(best, value)
    return best


def virtual_user_rate_grid(K: int, N: int, M: Fraction) -> Fraction:
    """[C(KN, KM+1) - C(KN-N, KM+1)] / C(KN, KM) for KM integral."""
    _check_system(K, N)
    M = Fraction(M)
    km = K * M
    if km.denominator != 1:
        raise ParamsError(f"KM={km} is not an integer; use virtual_user_rate_envelope")
    if not 0 <= M <= N:
        raise ParamsError(f"M={M} is outside [0, {N}]")
    t = km.numerator
    return Fraction(binomial(K * N, t + 1) - binomial(K * N - N, t + 1), binomial(K * N, t))


def _lower_hull(points: Sequence[Tuple[Fraction, Fraction]]) -> List[Tuple[Fraction, Fraction]]:
    hull: List[Tuple[Fraction, Fraction]] = []
    for p in sorted(points):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def virtual_user_rate_envelope(K: int, N: int, M: Fraction) -> Fraction:
    """Lower convex envelope of the grid rates, evaluated anywhere in [0, N]."""
    _check_system(K, N)
    M = Fraction(M)
    if not 0 <= M <= N:
        raise ParamsError(f"M={M} is outside [0, {N}]")
    grid = [Fraction(j, K) for j in range(K * N + 1)]
    hull = _lower_hull([(m, virtual_user_rate_grid(K, N, m)) for m in grid])
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= M <= x2:
            return y1 + (y2 - y1) * (M - x1) / (x2 - x1)
    return hull[-1][1]


@dataclass
class ComparisonTable:
    K: int
    N: int
    memory: Fraction
    points: List[RatePoint] = field(default_factory=list)
    footnote: str = ""

    def rate(self, label: str) -> Fraction:
        return next(p.R for p in self.points if p.label == label)


def comparison_rates_at_mstar(K: int, N: int) -> ComparisonTable:
    """This work, virtual-user memory sharing, LFR-DPCU and the bound at M*."""
    m_star = memory_point(K, N)
    D = K * (N - 1) + 1
    ours = N * (1 - m_star)
    if K >= N:
        lfr = ours + Fraction(N - 1, D)
    else:
        lfr = ours + Fraction(K, D)

    table = ComparisonTable(K=K, N=N, memory=m_star)
    table.points = [
        RatePoint(m_star, ours, THIS_WORK, subpacketization=D),
        RatePoint(m_star, ours + Fraction(N - 1, 2 * D), VIRTUAL_USER, subpacketization=K + 1),
        RatePoint(m_star, lfr, LFR_DPCU, subpacketization=2),
        RatePoint(m_star, lower_bound(K, N, m_star), LOWER_BOUND),
    ]
    if (K, N) == (2, 2):
        # corner (2/3, 1) shared with (0, 2)
        corner_m, corner_r = Fraction(2, 3), Fraction(1)
        shared = 2 + (corner_r - 2) * m_star / corner_m
        table.points.append(RatePoint(m_star, shared, SUBPACKETIZATION_3, subpacketization=3))

    claimed = Fraction(2 * K - N - 1, 2 * K)
    at_corner = virtual_user_rate_grid(K, N, Fraction(1, K))
    if claimed != at_corner:
        table.footnote = (
            f"The virtual-user corner quoted as (1/K, (2K-N-1)/(2K)) gives R={claimed} "
            f"at M=1/{K}; the binomial formula gives R={at_corner} there. "
            f"Both are reported as written."
        )
    return table


@dataclass
class TradeoffRow:
    M: Fraction
    rates: Dict[str, Optional[Fraction]]
    optimal_region: bool
    ordering_ok: bool

    def points(self) -> List[RatePoint]:
        return [RatePoint(self.M, r, label) for label, r in self.rates.items() if r is not None]


def default_grid(K: int, N: int) -> List[Fraction]:
    m_star = memory_point(K, N)
    grid = {Fraction(0), m_star / 2, m_star}
    grid.update(Fraction(j, K) for j in range(1, K * N + 1))
    return sorted(grid)


def tradeoff_table(K: int, N: int, grid: Optional[Sequence[Fraction]] = None) -> List[TradeoffRow]:
    """Every applicable formula at each grid point, with the ordering check."""
    m_star = memory_point(K, N)
    rows = []
    for M in (default_grid(K, N) if grid is None else [Fraction(m) for m in grid]):
        if not 0 <= M <= N:
            raise ParamsError(f"grid point M={M} is outside [0, {N}]")
        in_region = M <= m_star
        ours = optimal_private_rate(K, N, M) if in_region else None
        bound = max(lower_bound(K, N, M), Fraction(0))
        envelope = virtual_user_rate_envelope(K, N, M)
        ordering_ok = bound <= envelope and (ours is None or bound <= ours <= envelope)
        if not ordering_ok:
            logger.warning(f"Rate ordering violated at M={M} for K={K}, N={N}")
        rows.append(TradeoffRow(
            M=M,
            rates={THIS_WORK: ours, LOWER_BOUND: bound, VIRTUAL_USER_ENVELOPE: envelope},
            optimal_region=in_region and ours == bound,
            ordering_ok=ordering_ok,
        ))
    return rows


def check_measured_rate(record: TransmissionRecord, K: int, N: int, M: Fraction) -> bool:
    """Measured broadcast rate against N(1-M)."""
    return record.rate == optimal_private_rate(K, N, M)


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ParamsError(f"cannot read {text!r} as a rational") from e


def parse_grid(text: str) -> List[Fraction]:
    return [parse_fraction(t) for t in text.split(",") if t.strip()]


def fraction_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


CSV_COLUMNS = ["M_num", "M_den", "scheme", "R_num", "R_den", "R_float"]


def points_to_csv(points: Sequence[RatePoint]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in points:
        writer.writerow([
            p.M.numerator, p.M.denominator, p.label,
            p.R.numerator, p.R.denominator, f"{float(p.R):.6g}",
        ])
    return buffer.getvalue()


def point_to_dict(p: RatePoint) -> Dict[str, object]:
    doc: Dict[str, object] = {"M": fraction_text(p.M), "R": fraction_text(p.R), "scheme": p.label}
    if p.subpacketization is not None:
        doc["subpacketization"] = p.subpacketization
    return doc


def rates_to_document(K: int, N: int, rows: Sequence[TradeoffRow], comparison: ComparisonTable) -> Dict[str, object]:
    return {
        "K": K,
        "N": N,
        "memory_point": fraction_text(comparison.memory),
        "tradeoff": [
            {
                "M": fraction_text(row.M),
                "rates": {k: (None if v is None else fraction_text(v)) for k, v in row.rates.items()},
                "optimal_region": row.optimal_region,
                "ordering_ok": row.ordering_ok,
            }
            for row in rows
        ],
        "comparison": [point_to_dict(p) for p in comparison.points],
        "footnote": comparison.footnote,
    }
