"""
Tests for the system model: parameters, library, demands and transmissions
Run with: pytest tests/
"""

from fractions import Fraction
from itertools import permutations

import pytest

from core.errors import DemandError, LibraryError, ParamsError
from core.galois import Field
from core.model import (
    DemandProfile,
    DemandVector,
    FileLibrary,
    SystemParams,
    TransmissionEntry,
    TransmissionRecord,
    demand_group,
    demand_profile,
    file_label,
    is_uniform,
    load_library,
    parse_file_label,
    random_library,
    save_library,
    zero_library,
)


@pytest.fixture
def params():
    return SystemParams(K=2, N=2, F=6, field=Field(5))


class TestSystemParams:
    def test_derived_sizes(self, params):
        assert params.subpacket_count == 3
        assert params.virtual_user_count == 4
        assert params.stripe_length == 2
        assert params.memory_point == Fraction(1, 3)

    def test_file_length_must_split(self):
        with pytest.raises(ParamsError):
            SystemParams(K=2, N=2, F=4, field=Field(5))

    def test_positive_sizes(self):
        with pytest.raises(ParamsError):
            SystemParams(K=0, N=2, F=3, field=Field(5))


class TestLabels:
    def test_file_labels(self):
        assert [file_label(n) for n in (1, 2, 26, 27)] == ["A", "B", "Z", "W27"]

    @pytest.mark.parametrize("token,expected", [("A", 1), ("b", 2), ("2", 2), ("W2", 2)])
    def test_parse(self, token, expected):
        assert parse_file_label(token, 2) == expected

    def test_out_of_range(self):
        with pytest.raises(DemandError):
            parse_file_label("C", 2)
        with pytest.raises(DemandError):
            parse_file_label("?", 2)


class TestDemands:
    def test_from_labels(self):
        d = DemandVector.from_labels("A,B,B", 2)
        assert d.demands == (1, 2, 2)
        assert d[2] == 2
        assert len(d) == 3
        assert d.labels() == "[A,B,B]"

    def test_complement(self):
        d = DemandVector((1, 2, 1), 2)
        assert d.complement(2) == (1, 1)
        assert d.complement(1) == (2, 1)

    def test_invalid_entries(self):
        with pytest.raises(DemandError):
            DemandVector((1, 3), 2)
        with pytest.raises(DemandError):
            DemandVector((), 2)

    def test_groups_and_profile(self):
        d = DemandVector((1, 2, 2, 1), 2)
        assert demand_group(d, 1) == frozenset({1, 4})
        profile = demand_profile(d, 2)
        assert profile.counts == (2, 2)
        assert is_uniform(profile)

    def test_zero_padded_profile(self):
        profile = demand_profile(DemandVector((1, 1), 3), 3)
        assert profile.counts == (2, 0, 0)
        assert not is_uniform(profile)

    @pytest.mark.parametrize("demands", [(1, 2, 2, 3, 1, 1), (2, 2, 1, 1), (3, 1, 2)])
    def test_profile_ignores_user_order(self, demands):
        expected = demand_profile(DemandVector(demands, 3), 3)
        for order in permutations(demands):
            assert demand_profile(DemandVector(order, 3), 3) == expected

    def test_profile_must_be_sorted(self):
        with pytest.raises(DemandError):
            DemandProfile((1, 2))


class TestLibrary:
    def test_unequal_files(self):
        f = Field(5)
        with pytest.raises(LibraryError):
            FileLibrary((f.vector((1, 2)), f.vector((1,))))

    def test_subfiles_and_segments(self, params):
        lib = FileLibrary(tuple(tuple(params.field.coerce(v) for v in range(n, n + 6)) for n in (0, 1)))
        assert [[s.value for s in sub] for sub in lib.subfiles(1, 3)] == [[0, 1], [2, 3], [4, 0]]
        assert lib.segment(2, 4).F == 2

    def test_seeded_library(self, params):
        assert random_library(params, 9) == random_library(params, 9)
        assert random_library(params, 9) != random_library(params, 10)

    def test_zero_library(self, params):
        lib = zero_library(params)
        assert lib.N == 2 and lib.F == 6
        assert all(s.value == 0 for f in lib.files for s in f)

    def test_save_and_load(self, params, tmp_path):
        lib = random_library(params, 1)
        path = tmp_path / "library.json"
        save_library(path, params, lib)
        assert path.read_text().endswith("\n")
        assert load_library(path) == (params, lib)

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "library.json"
        path.write_text('{"p": 5, "K": 2, "N": 2, "F": 3, "files": [[1, 2, 3]]}')
        with pytest.raises(LibraryError):
            load_library(path)

    def test_symbols_outside_field(self, tmp_path):
        path = tmp_path / "library.json"
        path.write_text('{"p": 2, "K": 1, "N": 1, "F": 1, "files": [[3]]}')
        with pytest.raises(LibraryError):
            load_library(path)


class TestTransmissionRecord:
    def test_canonical_order_and_rate(self, params):
        f = params.field
        entries = (
            TransmissionEntry(virtual_user=None, file_index=1, symbols=f.vector((1, 1))),
            TransmissionEntry(virtual_user=2, file_index=1, symbols=f.vector((2, 2))),
            TransmissionEntry(virtual_user=1, file_index=2, symbols=f.vector((3, 3))),
        )
        record = TransmissionRecord(entries=entries, file_length=6)
        assert [e.sort_key for e in record.entries] == [(0, 1, 2), (0, 2, 1), (1, 0, 1)]
        assert record.rate == Fraction(1)
        assert record.label_key() == ((1, 2), (2, 1), (0, 1))
        assert record.clear_segment(1).symbols == f.vector((1, 1))
        assert record.of_file(1) == [entries[1]]
        assert record.addressed_to(1) == [entries[2]]

    def test_duplicate_entries(self, params):
        f = params.field
        entry = TransmissionEntry(virtual_user=1, file_index=2, symbols=f.vector((0,)))
        with pytest.raises(ParamsError):
            TransmissionRecord(entries=(entry, entry), file_length=3)
