"""Family constructors, flatness ratios and local/global contrasts."""

import math
from fractions import Fraction

import numpy as np
import pytest

from bohrap.appoly import APPoly
from bohrap.bohrint import Budget
from bohrap.errors import ValidationError
from bohrap.flatness import (PolyFamilySpec, RealFreqPoly, build_family,
                             flatness_ratio, local_vs_global_flatness,
                             prikhodko_frequencies, ultraflat_deviation)
from bohrap.freqspace import SymbolBasis

FAST = Budget(samples=1 << 13, seed=23)


class TestSpecs:
    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            PolyFamilySpec(kind="fejer", n=3)

    def test_eps_range(self):
        with pytest.raises(ValidationError):
            PolyFamilySpec(kind="prikhodko", n=4, eps_n=Fraction(3, 2))

    def test_from_config(self):
        spec = PolyFamilySpec.from_config(
            {"kind": "littlewood", "n": 3, "coefficients": [1, -1, 1]}
        )
        assert spec.coefficients == (1, -1, 1)


class TestBuildFamily:
    def test_newman_constant_term(self):
        with pytest.raises(ValidationError):
            build_family(PolyFamilySpec(
                kind="newman", n=2, coefficients=(0, 1)))

    def test_newman_single_one_is_constant(self):
        p = build_family(PolyFamilySpec(kind="newman", n=1, coefficients=(1,)))
        assert isinstance(p, APPoly)
        assert len(p) == 1 and p.mean() == 1.0

    def test_littlewood_signs(self):
        p = build_family(PolyFamilySpec(
            kind="littlewood", n=2, coefficients=(1, -1)))
        coeffs = sorted(c.real for c in p.terms.values())
        assert coeffs == [-1.0, 1.0]
        with pytest.raises(ValidationError):
            build_family(PolyFamilySpec(
                kind="littlewood", n=2, coefficients=(1, 2)))

    def test_unimodular_phases(self):
        p = build_family(PolyFamilySpec(
            kind="unimodular", n=3, coefficients=(0.0, 1.0, 2.0)))
        assert all(abs(abs(c) - 1.0) < 1e-12 for c in p.terms.values())

    def test_frequency_override_and_duplicates(self):
        b = SymbolBasis.make(("w", 1.5))
        w = b.symbol("w")
        spec = PolyFamilySpec(kind="littlewood", n=2, coefficients=(1, 1),
                              frequencies=(w, w.scale(3)))
        p = build_family(spec)
        assert set(p.support()) == {w, w.scale(3)}
        with pytest.raises(ValidationError):
            build_family(PolyFamilySpec(kind="littlewood", n=2,
                                        coefficients=(1, 1),
                                        frequencies=(w, w)))

    def test_prikhodko_frequencies(self):
        # w(p) = 16 e^{p/8} for p_n = 4, m_n = 1, eps_n = 1/2
        w = prikhodko_frequencies(4, 1, Fraction(1, 2))
        want = 16.0 * np.exp(np.arange(4) / 8.0)
        assert np.allclose(w, want, rtol=1e-12)
        assert np.all(np.diff(w) > 0)

    def test_prikhodko_poly_normalized(self):
        p = build_family(PolyFamilySpec(kind="prikhodko", n=16))
        assert isinstance(p, RealFreqPoly)
        assert p.l2_norm() == pytest.approx(1.0)


class TestFlatnessRatio:
    def test_single_character(self):
        b = SymbolBasis.make(("w", 2.0))
        est = flatness_ratio(APPoly.character(b.symbol("w")), FAST)
        assert est.value == pytest.approx(1.0, abs=1e-12)

    def test_one_plus_character(self):
        # |1 + e^{iwt}|_1 / sqrt(2) = (4/pi)/sqrt(2)
        p = build_family(PolyFamilySpec(kind="newman", n=2))
        est = flatness_ratio(p, Budget(samples=1 << 15, seed=3))
        want = 2 * math.sqrt(2) / math.pi
        assert est.value == pytest.approx(want, abs=1e-3)

    def test_never_above_one(self):
        for n in (2, 3, 5):
            p = build_family(PolyFamilySpec(kind="littlewood", n=n))
            est = flatness_ratio(p, FAST)
            assert est.value <= 1.0 + 3 * est.std_error

    def test_zero_rejected(self):
        b = SymbolBasis.make(("w", 1.0))
        with pytest.raises(ValidationError):
            flatness_ratio(APPoly.zero(b), FAST)


class TestUltraflat:
    def test_single_character_is_zero(self):
        b = SymbolBasis.make(("w", 2.0))
        dev = ultraflat_deviation(APPoly.character(b.symbol("w")))
        assert dev == pytest.approx(0.0, abs=1e-12)

    def test_two_terms_deviation_is_one(self):
        # |P| sweeps [0, 2] while |P|_2 = sqrt(2): the deviation below the
        # mean (down to 0) dominates the deviation above (sqrt(2) - 1).
        p = build_family(PolyFamilySpec(
            kind="littlewood", n=2, coefficients=(1, -1)))
        assert ultraflat_deviation(p) == pytest.approx(1.0, abs=2e-3)

    def test_multiple_frequencies_positive(self):
        p = build_family(PolyFamilySpec(kind="littlewood", n=4))
        assert ultraflat_deviation(p) > 0.0


class TestLocalVsGlobal:
    def test_requires_prikhodko(self):
        with pytest.raises(ValidationError):
            local_vs_global_flatness(
                PolyFamilySpec(kind="newman", n=2), 1.0, 2.0, FAST)

    def test_single_term(self):
        rec = local_vs_global_flatness(
            PolyFamilySpec(kind="prikhodko", n=1), 1.0, 2.0, FAST)
        assert rec.local.value == pytest.approx(0.0, abs=1e-12)
        assert rec.global_mean_abs.value == pytest.approx(1.0, abs=1e-12)

    def test_global_near_gaussian_moment(self):
        rec = local_vs_global_flatness(
            PolyFamilySpec(kind="prikhodko", n=64, m_n=4, eps_n=Fraction(1, 4)),
            1.0, 2.0, Budget(samples=1 << 15, seed=5))
        assert rec.global_mean_abs.value == pytest.approx(
            math.sqrt(math.pi) / 2, abs=0.02)
