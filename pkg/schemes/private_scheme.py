"""
Demand-Private Coded Caching

Lifts the (KN, N) non-private scheme to K real users. At placement each user
k gets a secret key S_k, uniform on [N], and stores the cache of virtual user
(k-1)N + S_k. At delivery each real demand d_k becomes a block q_k of N
virtual demands, a cyclic shift of (1..N) with q_k[S_k] = d_k, so every file
is requested by exactly K virtual users and the non-private delivery applies.

Memory sharing with the trivial M=0 point (broadcast everything) covers
0 <= M <= 1/(K(N-1)+1).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import DemandError, ParamsError, SegmentError
from core.galois import FieldElement
from core.mds import GeneratorMatrix, generator_to_document
from core.model import (
    CacheContent,
    DemandVector,
    FileLibrary,
    SystemParams,
    TransmissionEntry,
    TransmissionRecord,
)
from schemes.nonprivate_scheme import NonPrivatePlacement, np_decode, np_deliver, np_place

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrivacyKey:
    """S_k, shared only by the server and user k."""
    user: int
    s: int


@dataclass(frozen=True)
class PrivatePlacement:
    base: NonPrivatePlacement
    keys: Tuple[PrivacyKey, ...]
    real_caches: Tuple[CacheContent, ...]
    forced_keys: bool = False

    @property
    def params(self) -> SystemParams:
        return self.base.params

    def key(self, k: int) -> PrivacyKey:
        return self.keys[k - 1]

    def virtual_user(self, k: int) -> int:
        return virtual_user_for(k, self.keys[k - 1].s, self.params.N)


@dataclass(frozen=True)
class VirtualDemandVector:
    """d~ = [q_1, ..., q_K], each q_k a block of N virtual demands."""
    demands: DemandVector
    K: int

    @property
    def N(self) -> int:
        return self.demands.N

    def block(self, k: int) -> Tuple[int, ...]:
        N = self.demands.N
        return self.demands.demands[(k - 1) * N:k * N]


def virtual_user_for(k: int, s: int, N: int) -> int:
    return (k - 1) * N + s


def draw_keys(K: int, N: int, seed: Optional[int]) -> Tuple[PrivacyKey, ...]:
    if seed is None:
        logger.info("No seed given; privacy keys drawn from fresh entropy")
    rng = np.random.default_rng(seed)
    values = rng.integers(1, N + 1, size=K)
    return tuple(PrivacyKey(user=k, s=int(s)) for k, s in enumerate(values, start=1))


def make_keys(values: Sequence[int], N: int) -> Tuple[PrivacyKey, ...]:
    if any(not 1 <= s <= N for s in values):
        raise DemandError(f"keys {list(values)} must lie in 1..{N}")
    return tuple(PrivacyKey(user=k, s=s) for k, s in enumerate(values, start=1))


def select_real_caches(base: NonPrivatePlacement, keys: Sequence[PrivacyKey]) -> Tuple[CacheContent, ...]:
    """Real user k holds the cache of virtual user (k-1)N + S_k."""
    N = base.params.N
    return tuple(
        CacheContent(user=key.user, symbols=base.cache(virtual_user_for(key.user, key.s, N)).symbols)
        for key in keys
    )


def pv_place(
    params: SystemParams,
    lib: FileLibrary,
    g: GeneratorMatrix,
    seed: Optional[int] = None,
    keys: Optional[Sequence[int]] = None,
    check_mds: bool = True,
    base: Optional[NonPrivatePlacement] = None,
) -> PrivatePlacement:
    """Run the non-private placement, then draw (or force) keys and pick caches.

    Passing `base` reuses an existing non-private placement.
    """
    if base is None:
        base = np_place(params, lib, g, check_mds=check_mds)
    if keys is None:
        key_tuple = draw_keys(params.K, params.N, seed)
    else:
        if len(keys) != params.K:
            raise ParamsError(f"got {len(keys)} keys for {params.K} users")
        key_tuple = make_keys(keys, params.N)
    return PrivatePlacement(
        base=base,
        keys=key_tuple,
        real_caches=select_real_caches(base, key_tuple),
        forced_keys=keys is not None,
    )


def virtual_demand(d: DemandVector, keys: Sequence[PrivacyKey], N: int) -> VirtualDemandVector:
    """q_k is (1..N) right-shifted by (S_k - d_k) mod N."""
    if len(d) != len(keys):
        raise DemandError(f"{len(d)} demands for {len(keys)} keys")
    blocks: List[int] = []
    for key in keys:
        shift = (key.s - d[key.user]) % N
        blocks.extend(((j - shift - 1) % N) + 1 for j in range(1, N + 1))
    return VirtualDemandVector(demands=DemandVector(tuple(blocks), N), K=len(keys))


def pv_deliver(pl: PrivatePlacement, d: DemandVector) -> TransmissionRecord:
    params = pl.params
    if len(d) != params.K or d.N != params.N:
        raise DemandError(f"demand {d.labels()} does not fit K={params.K}, N={params.N}")
    d_virtual = virtual_demand(d, pl.keys, params.N)
    return np_deliver(pl.base, d_virtual.demands)


def pv_decode(
    k: int,
    cache: CacheContent,
    key: PrivacyKey,
    d_k: int,
    x: TransmissionRecord,
    g: GeneratorMatrix,
    N: int,
) -> Tuple[FieldElement, ...]:
    """Real user k decodes as virtual user (k-1)N + S_k."""
    return np_decode(virtual_user_for(k, key.s, N), cache, d_k, x, g)


# Memory sharing

@dataclass(frozen=True)
class HybridPlacement:
    """Prefix of every file handled privately at M*, suffix sent in the clear."""
    params: SystemParams
    memory: Fraction
    prefix_length: int
    private: Optional[PrivatePlacement]

    def cache(self, k: int) -> CacheContent:
        if self.private is None:
            return CacheContent(user=k, symbols=())
        return self.private.real_caches[k - 1]


def split_length(params: SystemParams, memory: Fraction) -> int:
    """Symbols of each file handled by the coded scheme."""
    memory = Fraction(memory)
    if not 0 <= memory <= params.memory_point:
        raise SegmentError(f"M={memory} is outside [0, {params.memory_point}]")
    alpha = memory * params.subpacket_count
    prefix = alpha * params.F
    if prefix.denominator != 1 or prefix.numerator % params.subpacket_count:
        raise SegmentError(
            f"F={params.F} cannot be split at M={memory}: need F divisible by "
            f"{alpha.denominator * params.subpacket_count}"
        )
    return prefix.numerator


def hybrid_place(
    params: SystemParams,
    lib: FileLibrary,
    g: GeneratorMatrix,
    seed: Optional[int],
    memory: Fraction,
    keys: Optional[Sequence[int]] = None,
    check_mds: bool = True,
) -> HybridPlacement:
    prefix = split_length(params, memory)
    private = None
    if prefix:
        private = pv_place(
            params.with_file_length(prefix), lib.segment(0, prefix), g,
            seed=seed, keys=keys, check_mds=check_mds,
        )
    return HybridPlacement(params=params, memory=Fraction(memory), prefix_length=prefix, private=private)


def hybrid_deliver(
    params: SystemParams,
    lib: FileLibrary,
    g: GeneratorMatrix,
    seed: Optional[int],
    memory: Fraction,
    d: DemandVector,
    keys: Optional[Sequence[int]] = None,
    check_mds: bool = True,
) -> TransmissionRecord:
    """Rate alpha*N(1-M*) + (1-alpha)*N = N(1-M)."""
    placement = hybrid_place(params, lib, g, seed, memory, keys=keys, check_mds=check_mds)
    return hybrid_deliver_from(placement, lib, d)


def hybrid_deliver_from(placement: HybridPlacement, lib: FileLibrary, d: DemandVector) -> TransmissionRecord:
    params = placement.params
    entries: List[TransmissionEntry] = []
    if placement.private is not None:
        entries.extend(pv_deliver(placement.private, d).entries)
    if placement.prefix_length < params.F:
        # demand-independent, hence private
        entries.extend(
            TransmissionEntry(virtual_user=None, file_index=n, symbols=lib.file(n)[placement.prefix_length:])
            for n in range(1, params.N + 1)
        )
    record = TransmissionRecord(entries=tuple(entries), file_length=params.F)
    logger.debug(f"Hybrid delivery at M={placement.memory}: rate {record.rate}")
    return record


def hybrid_decode(
    k: int,
    placement: HybridPlacement,
    d_k: int,
    x: TransmissionRecord,
    g: GeneratorMatrix,
) -> Tuple[FieldElement, ...]:
    params = placement.params
    prefix: Tuple[FieldElement, ...] = ()
    if placement.private is not None:
        prefix = pv_decode(
            k, placement.cache(k), placement.private.key(k), d_k, x, g, params.N,
        )
    suffix: Tuple[FieldElement, ...] = ()
    if placement.prefix_length < params.F:
        clear = x.clear_segment(d_k)
        if clear is None:
            raise SegmentError(f"clear segment of file {d_k} missing from the broadcast")
        suffix = clear.symbols
    return prefix + suffix


def placement_to_document(pl: PrivatePlacement) -> Dict[str, object]:
    """Audit replay record; keys are flagged secret and never enter traces."""
    params = pl.params
    return {
        "params": params.describe(),
        "generator": generator_to_document(pl.base.generator).model_dump(),
        "virtual_caches": [c.values() for c in pl.base.caches],
        "real_caches": [
            {"user": c.user, "virtual_user": pl.virtual_user(c.user), "symbols": c.values()}
            for c in pl.real_caches
        ],
        "keys": {
            "secret": True,
            "forced": pl.forced_keys,
            "values": [key.s for key in pl.keys],
        },
    }
