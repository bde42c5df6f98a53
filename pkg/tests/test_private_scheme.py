"""
Tests for the demand-private scheme and memory sharing
Run with: pytest tests/
"""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from core.errors import DemandError, ParamsError, SegmentError
from core.galois import field_for_params
from core.mds import systematic_generator
from core.model import DemandVector, SystemParams, random_library, render_entry
from schemes.presets import get_preset
from schemes.private_scheme import (
    draw_keys,
    hybrid_decode,
    hybrid_deliver,
    hybrid_deliver_from,
    hybrid_place,
    make_keys,
    placement_to_document,
    pv_decode,
    pv_deliver,
    pv_place,
    split_length,
    virtual_demand,
)

GRID = [(K, N) for K in range(1, 6) for N in range(1, 6)]


def _system(K, N, stripes=1, seed=0):
    field = field_for_params(K, N)
    params = SystemParams(K=K, N=N, F=stripes * (K * (N - 1) + 1), field=field)
    g = systematic_generator(params.virtual_user_count, params.subpacket_count, field)
    return params, random_library(params, seed), g


class TestVirtualDemand:
    def test_worked_instance(self):
        """d=[A,B] with S=(1,1) becomes [A,B,B,A]."""
        d = DemandVector.from_labels("A,B", 2)
        assert virtual_demand(d, make_keys((1, 1), 2), 2).demands.demands == (1, 2, 2, 1)

    @pytest.mark.parametrize("N", [1, 2, 3, 4])
    def test_blocks_are_shifts_hitting_the_demand(self, N):
        for s, dk in product(range(1, N + 1), repeat=2):
            block = virtual_demand(DemandVector((dk,), N), make_keys((s,), N), N).block(1)
            assert sorted(block) == list(range(1, N + 1))
            assert block[s - 1] == dk

    def test_profile_is_uniform(self):
        keys = make_keys((2, 3, 1), 3)
        d = virtual_demand(DemandVector((1, 1, 1), 3), keys, 3).demands
        assert sorted(d.demands) == [1, 1, 1, 2, 2, 2, 3, 3, 3]


class TestKeys:
    def test_seeded_draw(self):
        assert draw_keys(4, 3, 11) == draw_keys(4, 3, 11)
        assert all(1 <= key.s <= 3 for key in draw_keys(50, 3, 2))

    def test_out_of_range(self):
        with pytest.raises(DemandError):
            make_keys((0, 1), 2)

    def test_key_count(self):
        params, lib, g = get_preset("example1").build()
        with pytest.raises(ParamsError):
            pv_place(params, lib, g, keys=(1,))


class TestPrivateDelivery:
    def test_table_row_broadcast(self):
        """Keys (1,1), demand [A,B]: B_1, A_2, A_3, B_1+B_2+B_3."""
        params, lib, g = get_preset("example1").build()
        placement = pv_place(params, lib, g, keys=(1, 1))
        x = pv_deliver(placement, DemandVector.from_labels("A,B", 2))
        assert [render_entry(e, g) for e in x.entries] == ["B_1", "A_2", "A_3", "B_1⊕B_2⊕B_3"]
        assert x.rate == Fraction(4, 3)

    def test_real_caches_follow_keys(self):
        params, lib, g = get_preset("example1").build()
        placement = pv_place(params, lib, g, keys=(2, 1))
        assert placement.virtual_user(1) == 2
        assert placement.virtual_user(2) == 3
        assert placement.real_caches[1].symbols == placement.base.cache(3).symbols

    @pytest.mark.parametrize("K,N", GRID)
    def test_rate_identity(self, K, N):
        params, lib, g = _system(K, N)
        placement = pv_place(params, lib, g, seed=K * 10 + N, check_mds=False)
        rng = np.random.default_rng(N)
        d = DemandVector(tuple(int(v) for v in rng.integers(1, N + 1, size=K)), N)
        x = pv_deliver(placement, d)
        assert x.rate == Fraction(K * N * (N - 1), K * (N - 1) + 1)

    @pytest.mark.parametrize("stripes", [1, 4, 16])
    def test_round_trip(self, stripes):
        params, lib, g = _system(2, 3, stripes=stripes, seed=stripes)
        rng = np.random.default_rng(stripes)
        for trial in range(5):
            placement = pv_place(params, lib, g, seed=trial)
            d = DemandVector(tuple(int(v) for v in rng.integers(1, 4, size=2)), 3)
            x = pv_deliver(placement, d)
            for k in (1, 2):
                decoded = pv_decode(k, placement.real_caches[k - 1], placement.key(k), d[k], x, g, 3)
                assert decoded == lib.file(d[k])

    def test_placement_document_marks_keys_secret(self):
        params, lib, g = get_preset("example1").build()
        doc = placement_to_document(pv_place(params, lib, g, keys=(2, 2)))
        assert doc["keys"] == {"secret": True, "forced": True, "values": [2, 2]}
        assert [c["virtual_user"] for c in doc["real_caches"]] == [2, 4]


class TestMemorySharing:
    def test_split_length(self):
        params, _, _ = _system(2, 2, stripes=2)
        assert split_length(params, Fraction(0)) == 0
        assert split_length(params, Fraction(1, 6)) == 3
        assert split_length(params, Fraction(1, 3)) == 6

    def test_split_outside_region(self):
        params, _, _ = _system(2, 2, stripes=2)
        with pytest.raises(SegmentError):
            split_length(params, Fraction(1, 2))

    def test_non_integral_split(self):
        params, _, _ = _system(2, 2, stripes=1)
        with pytest.raises(SegmentError):
            split_length(params, Fraction(1, 6))

    @pytest.mark.parametrize("K,N", GRID)
    def test_rate_is_n_times_one_minus_m(self, K, N):
        params, lib, g = _system(K, N, stripes=2)
        d = DemandVector((1,) * K, N)
        m_star = params.memory_point
        for memory in (Fraction(0), m_star / 2, m_star):
            x = hybrid_deliver(params, lib, g, seed=1, memory=memory, d=d, check_mds=False)
            assert x.rate == N * (1 - memory)

    @pytest.mark.parametrize("memory", [Fraction(0), Fraction(1, 6), Fraction(1, 3)])
    def test_every_user_decodes(self, memory):
        params, lib, g = _system(2, 2, stripes=2, seed=5)
        placement = hybrid_place(params, lib, g, seed=3, memory=memory)
        for demand in product((1, 2), repeat=2):
            d = DemandVector(demand, 2)
            x = hybrid_deliver_from(placement, lib, d)
            for k in (1, 2):
                assert hybrid_decode(k, placement, d[k], x, g) == lib.file(d[k])

    def test_clear_segments_are_unlabelled(self):
        params, lib, g = _system(2, 2, stripes=2)
        x = hybrid_deliver(params, lib, g, seed=1, memory=Fraction(1, 6), d=DemandVector((1, 2), 2))
        clear = [e for e in x.entries if e.virtual_user is None]
        assert [e.file_index for e in clear] == [1, 2]
        assert all(len(e.symbols) == 3 for e in clear)
