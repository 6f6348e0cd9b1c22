"""Exact frequency arithmetic, rank computation and torus reduction."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bohrap.errors import BasisMismatchError, ValidationError
from bohrap.freqspace import (Frequency, SymbolBasis, is_rationally_independent,
                              rational_rank, torus_reduce)

B3 = SymbolBasis.make(("a", 1.0), ("b", math.sqrt(2)), ("c", math.pi))

rationals = st.fractions(
    min_value=-20, max_value=20, max_denominator=12
)
freqs3 = st.tuples(rationals, rationals, rationals).map(
    lambda t: Frequency(B3, t)
)


class TestBasisValidation:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ValidationError):
            SymbolBasis.make(("a", 1.0), ("a", 2.0))

    def test_zero_value_rejected(self):
        with pytest.raises(ValidationError):
            SymbolBasis.make(("a", 0.0))

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            SymbolBasis(())

    def test_bad_name_rejected(self):
        with pytest.raises(ValidationError):
            SymbolBasis.make(("2x", 1.0))


class TestFrequencyArithmetic:
    def test_symbol_and_index(self):
        f = B3.symbol("b")
        assert f.coeffs == (Fraction(0), Fraction(1), Fraction(0))
        assert B3.index("c") == 2

    def test_real_value(self):
        f = B3.frequency({"a": 2, "b": Fraction(1, 2)})
        assert f.real_value() == pytest.approx(2.0 + math.sqrt(2) / 2)

    def test_basis_mismatch(self):
        other = SymbolBasis.make(("a", 1.0))
        with pytest.raises(BasisMismatchError):
            B3.symbol("a") + other.symbol("a")

    @given(freqs3, freqs3)
    def test_add_commutes(self, f, g):
        assert f + g == g + f

    @given(freqs3)
    def test_sub_self_is_zero(self, f):
        assert (f - f).is_zero()

    @given(freqs3, st.integers(-5, 5))
    def test_scale_matches_repeated_add(self, f, n):
        acc = B3.zero()
        for _ in range(abs(n)):
            acc = acc + f
        if n < 0:
            acc = -acc
        assert f.scale(n) == acc

    @given(freqs3)
    def test_real_value_is_linear(self, f):
        assert (f + f).real_value() == pytest.approx(2 * f.real_value())


class TestParsing:
    def test_canonical_form(self):
        f = B3.frequency({"a": Fraction(3, 2), "b": Fraction(-1, 4)})
        assert str(f) == "3/2*a + -1/4*b"
        assert Frequency.parse(str(f), B3) == f

    def test_zero(self):
        assert Frequency.parse("0", B3) == B3.zero()
        assert str(B3.zero()) == "0"

    def test_bare_names(self):
        assert Frequency.parse("a + -b", B3) == B3.symbol("a") - B3.symbol("b")

    def test_unknown_symbol(self):
        with pytest.raises(ValidationError):
            Frequency.parse("2*z", B3)

    def test_malformed(self):
        for text in ("", "++a", "1.5*a", "a b"):
            with pytest.raises(ValidationError):
                Frequency.parse(text, B3)

    @given(freqs3)
    def test_roundtrip(self, f):
        assert Frequency.parse(str(f), B3) == f


class TestRank:
    def test_single_nonzero(self):
        assert rational_rank([B3.symbol("a")]) == 1

    def test_zero_frequency(self):
        assert rational_rank([B3.zero()]) == 0
        assert not is_rationally_independent([B3.zero()])

    def test_dependent_pair(self):
        f = B3.frequency({"a": 2, "b": 3})
        g = f.scale(Fraction(5, 7))
        assert rational_rank([f, g]) == 1
        assert not is_rationally_independent([f, g])

    def test_full_rank(self):
        fs = [B3.symbol(n) for n in ("a", "b", "c")]
        assert is_rationally_independent(fs)

    def test_sum_is_dependent(self):
        a, b = B3.symbol("a"), B3.symbol("b")
        assert rational_rank([a, b, a + b]) == 2

    @given(st.lists(freqs3, min_size=1, max_size=5))
    @settings(max_examples=60)
    def test_rank_bounds(self, fs):
        r = rational_rank(fs)
        assert 0 <= r <= min(len(fs), 3)

    @given(st.lists(freqs3, min_size=1, max_size=4), rationals)
    @settings(max_examples=60)
    def test_rank_unchanged_by_scaling(self, fs, q):
        if q == 0:
            q = Fraction(1)
        scaled = [f.scale(q) for f in fs]
        assert rational_rank(scaled) == rational_rank(fs)


class TestTorusReduce:
    def test_reconstruction_exact(self):
        fs = [
            B3.frequency({"a": Fraction(3, 2), "b": 1}),
            B3.frequency({"a": Fraction(1, 2)}),
            B3.frequency({"a": 2, "b": 1}),
        ]
        red = torus_reduce(fs)
        assert red.dim == rational_rank(fs)
        for i, f in enumerate(fs):
            assert red.reconstruct(i) == f

    def test_reduced_basis_independent(self):
        fs = [B3.symbol("a") + B3.symbol("b"), B3.symbol("a").scale(2)]
        red = torus_reduce(fs)
        assert is_rationally_independent(list(red.reduced_basis))

    @given(st.lists(freqs3, min_size=1, max_size=5))
    @settings(max_examples=40)
    def test_roundtrip_property(self, fs):
        if all(f.is_zero() for f in fs):
            red = torus_reduce(fs)
            assert red.dim == 0
            return
        red = torus_reduce(fs)
        assert red.dim == rational_rank(fs)
        for i, f in enumerate(fs):
            assert red.reconstruct(i) == f
