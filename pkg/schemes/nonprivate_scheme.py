"""
Non-Private Coded Caching

The (KN, N) scheme with MDS-coded placement: every file is split into
K(N-1)+1 subfiles and encoded into KN coded subfiles; virtual user i caches
the field sum over files of the i-th coded subfile. Under a uniform demand
profile the server sends, for each virtual user, that user's coded subfile of
every file it did not request.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from core.errors import DecodeError, GeneratorError, NonUniformProfileError, NotMDSError
from core.galois import FieldElement
from core.mds import CodedSubfile, GeneratorMatrix, decode_striped, encode_striped, verify_mds
from core.model import (
    CacheContent,
    DemandVector,
    FileLibrary,
    SystemParams,
    TransmissionEntry,
    TransmissionRecord,
    demand_profile,
    is_uniform,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NonPrivatePlacement:
    params: SystemParams
    generator: GeneratorMatrix
    coded: Dict[Tuple[int, int], CodedSubfile]
    caches: Tuple[CacheContent, ...]

    def cache(self, virtual_user: int) -> CacheContent:
        return self.caches[virtual_user - 1]


def check_generator(params: SystemParams, g: GeneratorMatrix, check_mds: bool = True) -> None:
    if (g.n, g.k) != (params.virtual_user_count, params.subpacket_count):
        raise GeneratorError(
            f"need a ({params.virtual_user_count},{params.subpacket_count}) code, "
            f"got ({g.n},{g.k})"
        )
    if g.field != params.field:
        raise GeneratorError(f"generator is over {g.field}, system uses {params.field}")
    if check_mds:
        verdict = verify_mds(g)
        if not verdict.ok:
            raise NotMDSError(f"columns {verdict.witness} are dependent", witness=verdict.witness)


def np_place(
    params: SystemParams,
    lib: FileLibrary,
    g: GeneratorMatrix,
    check_mds: bool = True,
) -> NonPrivatePlacement:
    """Split, encode and fill Z_i = sum_n C_{n,i} for every virtual user i."""
    check_generator(params, g, check_mds=check_mds)
    if lib.N != params.N or lib.F != params.F:
        raise GeneratorError(
            f"library has {lib.N} files of {lib.F} symbols, expected {params.N} of {params.F}"
        )

    coded: Dict[Tuple[int, int], CodedSubfile] = {}
    for n in range(1, params.N + 1):
        codeword = encode_striped(lib.subfiles(n, params.subpacket_count), g)
        for i, symbols in enumerate(codeword, start=1):
            coded[(n, i)] = CodedSubfile(file_index=n, position=i, symbols=symbols)

    field = params.field
    caches = [
        CacheContent(
            user=i,
            symbols=field.from_array(np.add.reduce(
                field.array([coded[(n, i)].symbols for n in range(1, params.N + 1)]), axis=0,
            )),
        )
        for i in range(1, params.virtual_user_count + 1)
    ]

    logger.debug(
        f"Placed {params.N} files into {params.virtual_user_count} caches "
        f"of {params.stripe_length} symbols"
    )
    return NonPrivatePlacement(params=params, generator=g, coded=coded, caches=tuple(caches))


def np_deliver(pl: NonPrivatePlacement, d: DemandVector) -> TransmissionRecord:
    """For each virtual user k send C_{i,k} for every file i != d_k."""
    params = pl.params
    if len(d) != params.virtual_user_count:
        raise NonUniformProfileError(
            f"demand has {len(d)} entries, system has {params.virtual_user_count} virtual users"
        )
    profile = demand_profile(d, params.N)
    if not is_uniform(profile):
        raise NonUniformProfileError(f"demand profile {list(profile.counts)} is not uniform")

    entries = [
        TransmissionEntry(virtual_user=k, file_index=i, symbols=pl.coded[(i, k)].symbols)
        for k in range(1, params.virtual_user_count + 1)
        for i in range(1, params.N + 1)
        if i != d[k]
    ]
    return TransmissionRecord(entries=tuple(entries), file_length=params.F)


def np_decode(
    k: int,
    z: CacheContent,
    d_k: int,
    x: TransmissionRecord,
    g: GeneratorMatrix,
) -> Tuple[FieldElement, ...]:
    """Recover W_{d_k} for virtual user k from Z_k and the broadcast."""
    field = g.field
    own = x.addressed_to(k)
    if any(e.file_index == d_k for e in own):
        raise DecodeError(f"virtual user {k} is sent its own requested file {d_k}")

    # C_{d_k,k} = Z_k minus the other files' k-th coded subfiles
    own_coded = field.array(z.symbols)
    if own:
        own_coded = own_coded - np.add.reduce(field.array([e.symbols for e in own]), axis=0)
    recovered: Dict[int, Sequence[FieldElement]] = {k: field.from_array(own_coded)}

    direct = sorted(
        (e for e in x.of_file(d_k) if e.virtual_user != k),
        key=lambda e: e.virtual_user,
    )
    for e in direct[:g.k - 1]:
        recovered[e.virtual_user] = e.symbols
    if len(recovered) < g.k:
        raise DecodeError(
            f"virtual user {k} holds {len(recovered)} coded subfiles of file {d_k}, needs {g.k}"
        )

    positions = sorted(recovered)
    subfiles = decode_striped(positions, [recovered[j] for j in positions], g)
    return tuple(symbol for subfile in subfiles for symbol in subfile)

