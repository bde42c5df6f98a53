"""
Tests for the exhaustive decodability and privacy audits
Run with: pytest tests/
"""

from fractions import Fraction

import pytest

from analysis.audit import (
    KeyMode,
    case_count,
    decodability_to_document,
    privacy_to_document,
    render_table,
    table1_reconstruct,
    table_to_document,
    verify_decodability,
    verify_privacy,
)
from core.errors import CapExceededError
from core.galois import field_for_params
from core.mds import mutate_generator, systematic_generator
from core.model import FileLibrary, SystemParams, random_library, zero_library
from schemes.presets import get_preset

CONFIGS = [(2, 2), (3, 2), (2, 3)]
SEEDS = [1, 2, 3, 4, 5]


def _system(K, N):
    field = field_for_params(K, N)
    params = SystemParams(K=K, N=N, F=K * (N - 1) + 1, field=field)
    return params, systematic_generator(params.virtual_user_count, params.subpacket_count, field)


class TestDecodability:
    @pytest.mark.parametrize("K,N", CONFIGS)
    def test_every_case_decodes(self, K, N):
        params, g = _system(K, N)
        report = verify_decodability(params, random_library(params, 7), g, jobs=2)
        assert report.passed and report.complete
        assert report.cases_checked == case_count(params) == (N ** K) ** 2

    def test_worked_examples(self):
        for name in ("example1", "example2"):
            params, lib, g = get_preset(name).build()
            assert verify_decodability(params, lib, g).passed

    def test_broken_generator_yields_counterexamples(self):
        params, lib, g = get_preset("example1").build()
        broken = mutate_generator(g, row=1, col=4, value=0)
        report = verify_decodability(params, lib, broken, jobs=1)
        assert not report.passed
        example = report.counterexamples[0]
        assert example.decoded is None and example.error
        doc = decodability_to_document(report)
        assert doc["passed"] is False and doc["counterexamples"]

    def test_cap_reports_partial_coverage(self):
        params, lib, g = get_preset("example1").build()
        report = verify_decodability(params, lib, g, cap=5)
        assert report.cases_checked == 5
        assert not report.complete

    def test_cap_bounds_a_huge_enumeration(self):
        params, g = _system(6, 5)
        report = verify_decodability(params, random_library(params, 1), g, cap=10, jobs=1)
        assert report.total_cases == 5 ** 12
        assert report.cases_checked == 10
        assert report.passed and not report.complete

    def test_worker_processes_agree(self):
        params, lib, g = get_preset("example1").build()
        broken = mutate_generator(g, row=1, col=4, value=0)
        serial = verify_decodability(params, lib, broken, jobs=1)
        pooled = verify_decodability(params, lib, broken, jobs=2)
        assert pooled.counterexamples == serial.counterexamples


class TestPrivacy:
    @pytest.mark.parametrize("K,N", CONFIGS)
    def test_zero_library(self, K, N):
        params, g = _system(K, N)
        report = verify_privacy(params, zero_library(params), g)
        assert report.passed
        assert all(v.max_tv == 0 for v in report.verdicts)

    @pytest.mark.parametrize("K,N", CONFIGS)
    @pytest.mark.parametrize("seed", SEEDS)
    def test_random_libraries(self, K, N, seed):
        params, g = _system(K, N)
        report = verify_privacy(params, random_library(params, seed), g, jobs=2)
        assert report.passed, [v for v in report.verdicts if not v.private]

    def test_worker_processes_agree(self):
        params, g = _system(2, 2)
        lib = random_library(params, 5)
        serial = privacy_to_document(verify_privacy(params, lib, g, jobs=1))
        pooled = privacy_to_document(verify_privacy(params, lib, g, jobs=2))
        assert pooled == serial

    def test_distributions_sum_to_one(self):
        params, lib, g = get_preset("example1").build()
        report = verify_privacy(params, lib, g)
        for per_rest in report.distributions.values():
            for dist in per_rest.values():
                assert sum(dist.values()) == 1

    def test_identity_keys_leak(self):
        params, lib, g = get_preset("example1").build()
        report = verify_privacy(params, lib, g, key_mode=KeyMode.IDENTITY)
        assert not report.passed
        verdict = report.verdict(1)
        assert not verdict.private
        assert verdict.max_tv > 0
        witness = verdict.witness
        assert witness.rest_a != witness.rest_b
        assert witness.probability_a != witness.probability_b

    def test_report_document(self):
        params, lib, g = get_preset("example1").build()
        doc = privacy_to_document(verify_privacy(params, lib, g, key_mode=KeyMode.IDENTITY))
        assert doc["key_mode"] == "identity"
        assert doc["passed"] is False
        assert "witness" in doc["users"][0]
        assert all("/" in p for p in doc["users"][0]["distributions"]["[A]"].values())

    def test_identical_files(self):
        params, g = _system(2, 2)
        same = random_library(params, 3).file(1)
        lib = FileLibrary((same, same))
        assert verify_privacy(params, lib, g).passed
        assert verify_decodability(params, lib, g).passed

    def test_cap(self):
        params, g = _system(2, 3)
        with pytest.raises(CapExceededError):
            verify_privacy(params, zero_library(params), g, cap=10)


class TestBroadcastTable:
    def test_layout(self):
        params, lib, g = get_preset("example1").build()
        table = table1_reconstruct(params, lib, g)
        assert table.row_labels == ["Z_1,Z_3", "Z_1,Z_4", "Z_2,Z_3", "Z_2,Z_4"]
        assert table.cells[0] == ["[A,A]", "[A,B]", "[B,A]", "[B,B]"]
        assert [row[0] for row in table.cells] == ["[A,A]", "[A,B]", "[B,A]", "[B,B]"]
        assert table.column_labels[0] == ["B_1", "A_2", "B_3", "A_1⊕A_2⊕A_3"]
        assert table.column_labels[1] == ["B_1", "A_2", "A_3", "B_1⊕B_2⊕B_3"]
        assert table.latin_square

    def test_every_cell_filled(self):
        params, lib, g = get_preset("example1").build()
        table = table1_reconstruct(params, lib, g)
        assert len(table.cells) == 4 and all(len(row) == 4 for row in table.cells)
        assert all(cell is not None for row in table.cells for cell in row)

    def test_rendering(self):
        params, lib, g = get_preset("example1").build()
        table = table1_reconstruct(params, lib, g)
        text = render_table(table)
        assert text.startswith("Cache 1, Cache 2")
        assert "Z_2,Z_4" in text
        assert table_to_document(table)["latin_square"] is True

    def test_probabilities_are_exact(self):
        params, lib, g = get_preset("example1").build()
        report = verify_privacy(params, lib, g)
        probabilities = {p for dist in report.distributions[1].values() for p in dist.values()}
        assert all(isinstance(p, Fraction) for p in probabilities)
