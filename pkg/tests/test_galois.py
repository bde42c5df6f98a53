"""
Tests for prime field arithmetic and matrix inversion
Run with: pytest tests/
"""

import numpy as np
import pytest

from core.errors import FieldDivisionError, FieldError, FieldMismatchError, ParamsError, SingularMatrixError
from core.galois import (
    Field,
    field_arith,
    field_for_params,
    identity_matrix,
    invert_matrix,
    is_prime,
    mat_mul,
    next_prime,
)


class TestPrimes:
    @pytest.mark.parametrize("n,expected", [(0, False), (1, False), (2, True), (3, True), (4, False), (25, False), (29, True)])
    def test_is_prime(self, n, expected):
        assert is_prime(n) is expected

    def test_next_prime(self):
        assert next_prime(4) == 5
        assert next_prime(5) == 5
        assert next_prime(0) == 2
        assert next_prime(24) == 29

    def test_field_for_params(self):
        """Smallest prime at or above KN"""
        assert field_for_params(2, 2).p == 5
        assert field_for_params(3, 2).p == 7
        assert field_for_params(1, 1).p == 2
        with pytest.raises(ParamsError):
            field_for_params(0, 2)


class TestFieldElements:
    def test_rejects_composite_modulus(self):
        with pytest.raises(FieldError):
            Field(6)

    def test_element_range_checked(self):
        f = Field(5)
        with pytest.raises(FieldError):
            f.element(5)
        assert f.coerce(7).value == 2
        assert f.coerce(-1).value == 4

    def test_operators(self):
        f = Field(5)
        a, b = f.element(3), f.element(4)
        assert (a + b).value == 2
        assert (a - b).value == 4
        assert (a * b).value == 2
        assert (a / b).value == 2
        assert (-a).value == 2
        assert field_arith(a, b, "mul") == a * b

    def test_inverse_table(self):
        f = Field(7)
        for x in list(f.elements())[1:]:
            assert (x * x.inverse()) == f.one

    def test_division_by_zero(self):
        f = Field(5)
        with pytest.raises(FieldDivisionError):
            f.one / f.zero
        with pytest.raises(ZeroDivisionError):
            f.zero.inverse()

    def test_mixed_fields(self):
        with pytest.raises(FieldMismatchError):
            Field(5).one + Field(7).one

    def test_unknown_operation(self):
        f = Field(5)
        with pytest.raises(FieldError):
            field_arith(f.one, f.one, "pow")

    def test_random_vector_is_seeded(self):
        f = Field(11)
        a = f.random_vector(np.random.default_rng(3), 8)
        b = f.random_vector(np.random.default_rng(3), 8)
        assert a == b
        assert all(0 <= x.value < 11 for x in a)


class TestMatrixInversion:
    def test_inverse_times_matrix_is_identity(self):
        f = Field(5)
        m = tuple(f.vector(r) for r in [(1, 2, 0), (0, 1, 3), (1, 0, 1)])
        assert mat_mul(invert_matrix(m), m) == identity_matrix(f, 3)

    def test_gf2_inverse(self):
        f = Field(2)
        m = tuple(f.vector(r) for r in [(1, 1), (0, 1)])
        assert invert_matrix(m) == m

    def test_singular_reports_column(self):
        f = Field(5)
        m = tuple(f.vector(r) for r in [(1, 2), (2, 4)])
        with pytest.raises(SingularMatrixError) as excinfo:
            invert_matrix(m)
        assert excinfo.value.column == 2

    def test_non_square(self):
        f = Field(5)
        with pytest.raises(FieldError):
            invert_matrix((f.vector((1, 0)),))

    def test_worked_inverse(self):
        f = Field(5)
        m = tuple(f.vector(r) for r in [(1, 1), (1, 2)])
        assert invert_matrix(m) == tuple(f.vector(r) for r in [(2, 4), (4, 1)])

    def test_identity_is_its_own_inverse(self):
        f = Field(5)
        assert invert_matrix(identity_matrix(f, 4)) == identity_matrix(f, 4)

    def test_rank_one_is_singular(self):
        f = Field(5)
        with pytest.raises(SingularMatrixError):
            invert_matrix(tuple(f.vector(r) for r in [(1, 1), (2, 2)]))


SMALL_PRIMES = [2, 3, 5, 7, 11, 13]


class TestFieldIdentities:
    @pytest.mark.parametrize("p", SMALL_PRIMES)
    def test_add_then_sub(self, p):
        f = Field(p)
        for a in f.elements():
            for b in f.elements():
                assert field_arith(field_arith(a, b, "add"), b, "sub") == a

    @pytest.mark.parametrize("p", SMALL_PRIMES)
    def test_mul_then_div(self, p):
        f = Field(p)
        for a in f.elements():
            for b in list(f.elements())[1:]:
                assert field_arith(field_arith(a, b, "mul"), b, "div") == a

    def test_worked_values(self):
        f5, f2 = Field(5), Field(2)
        assert field_arith(f5.element(3), f5.element(4), "add").value == 2
        assert field_arith(f5.element(1), f5.element(3), "sub").value == 3
        assert field_arith(f2.one, f2.one, "add") == f2.zero

    def test_backed_by_field_arrays(self):
        f = Field(7)
        assert f.gf.order == 7
        arr = f.array(f.vector((1, 2, 3)))
        assert f.from_array(arr * f.gf(3)) == f.vector((3, 6, 2))
