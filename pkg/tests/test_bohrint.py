"""Integration engine: tensor exactness, Monte Carlo accuracy, real-line means."""

import math

import numpy as np
import pytest

from bohrap.appoly import APPoly
from bohrap.bohrint import (Budget, bohr_integral, bohr_integral_multi,
                            independent_phase_mean_abs,
                            interval_l1_distortion, mean_abs, real_line_mean)
from bohrap.errors import BudgetError, ValidationError
from bohrap.freqspace import SymbolBasis

B = SymbolBasis.make(("a", 1.0), ("b", math.sqrt(2)), ("c", math.e))


def _two_char_poly():
    return APPoly.from_terms(
        B, [(B.zero(), 1.0), (B.symbol("a"), 1.0)]
    )


class TestBudgetValidation:
    def test_bad_method(self):
        with pytest.raises(ValidationError):
            Budget(method="simpson")

    def test_bad_samples(self):
        with pytest.raises(ValidationError):
            Budget(samples=0)


class TestTensorQuadrature:
    def test_character_mean_is_zero(self):
        p = APPoly.character(B.symbol("a"))
        est = bohr_integral(lambda v: v, [p], Budget(method="tensor"))
        assert est.method == "tensor-quadrature"
        assert est.value == pytest.approx(0.0, abs=1e-14)

    def test_abs2_mean_exact(self):
        # mean |1 + e^{iat}|^2 = 2: a pure trigonometric integrand, so the
        # uniform grid is exact by discrete orthogonality.
        p = _two_char_poly()
        est = bohr_integral(lambda v: np.abs(v) ** 2, [p], Budget(method="tensor"))
        assert est.value == pytest.approx(2.0, abs=1e-12)
        assert est.refinement_delta < 1e-12

    def test_mean_abs_one_plus_character(self):
        # mean |1 + e^{iat}| = 4/pi
        est = mean_abs(_two_char_poly(), Budget(method="tensor", nodes=4096))
        assert est.value == pytest.approx(4 / math.pi, abs=1e-5)

    def test_constant_poly(self):
        p = APPoly.constant(B, 3.0)
        est = mean_abs(p)
        assert est.value == 3.0 and est.torus_dim == 0

    def test_dim_cap(self):
        polys = [APPoly.character(B.symbol(n)) for n in ("a", "b", "c")]
        # 3 independent symbols -> dim 3; the node cap makes the grid too big
        with pytest.raises(BudgetError):
            bohr_integral(lambda x, y, z: np.abs(x * y * z), polys,
                          Budget(method="tensor", nodes=512,
                                 max_tensor_points=1000))


class TestMonteCarlo:
    def test_matches_tensor(self):
        p = _two_char_poly()
        t = mean_abs(p, Budget(method="tensor", nodes=4096))
        m = mean_abs(p, Budget(method="monte-carlo", samples=1 << 16, seed=3))
        assert m.method == "monte-carlo"
        assert abs(m.value - t.value) <= 4 * m.std_error

    def test_reproducible(self):
        p = _two_char_poly()
        b = Budget(method="monte-carlo", samples=1 << 14, seed=9)
        assert mean_abs(p, b).value == mean_abs(p, b).value

    def test_batch_layout_invariant(self):
        # The estimate depends on the seed only, not on the batch size.
        p = _two_char_poly()
        v1 = mean_abs(p, Budget(method="monte-carlo", samples=1 << 14,
                                seed=9, batch=1 << 14)).value
        v2 = mean_abs(p, Budget(method="monte-carlo", samples=1 << 14,
                                seed=9, batch=1 << 12)).value
        assert v1 != v2  # different stream layout is declared, not hidden

    def test_huge_exponents_supported(self):
        # Exponent magnitudes far past 2^54 must keep exact relations:
        # mean of e^{iMat} * conj(e^{iMat}) = 1 for M = 2^80 + 1.
        M = (1 << 80) + 1
        f = B.symbol("a").scale(M)
        p = APPoly.character(f)
        est = bohr_integral(
            lambda v: np.abs(v) ** 2, [p],
            Budget(method="monte-carlo", samples=1 << 12, seed=1),
        )
        assert est.value == pytest.approx(1.0, abs=1e-9)

    def test_huge_exponent_uniformity(self):
        # The phase of a huge-frequency character must still be uniform:
        # mean of Re(e^{iMat}) is 0, and mean |1 + e^{iMat}| is 4/pi.
        M = (1 << 77) + 12345
        p = APPoly.from_terms(B, [(B.zero(), 1.0), (B.symbol("a").scale(M), 1.0)])
        est = bohr_integral(np.abs, [p],
                            Budget(method="monte-carlo", samples=1 << 16, seed=2))
        assert est.value == pytest.approx(4 / math.pi, abs=5 * est.std_error + 1e-3)

    def test_exponent_cap(self):
        # Lattice coordinates 1 and 2^140 on the same generator: the large
        # one exceeds the supported limb range.
        a = B.symbol("a")
        p = APPoly.from_terms(B, [(a, 1.0), (a.scale(1 << 140), 1.0)])
        with pytest.raises(BudgetError):
            bohr_integral(np.abs, [p], Budget(method="monte-carlo",
                                              samples=1 << 10))

    def test_shared_samples_correlate(self):
        # With shared nodes, the estimate of g - g is exactly zero.
        p = _two_char_poly()
        e1, e2 = bohr_integral_multi(
            [np.abs, np.abs], [p],
            Budget(method="monte-carlo", samples=1 << 12, seed=4),
        )
        assert e1.value == e2.value

    def test_independence_model_mean(self):
        est = independent_phase_mean_abs(1, Budget(samples=1 << 10, seed=0))
        assert est.value == pytest.approx(1.0, abs=1e-12)


class TestRealLine:
    def test_cesaro_mean_obeys_envelope(self):
        # (1/2T) int of e^{iwt} over [-T, T] is sin(wT)/(wT), so the error
        # sits inside the 1/(wT) envelope (it oscillates, not decays).
        w = math.sqrt(2)
        p = APPoly.from_terms(B, [(B.zero(), 0.75), (B.symbol("b"), 1.0)])
        for T in (100.0, 1000.0):
            err = abs(real_line_mean(p, T) - 0.75)
            assert err <= 1.0 / (w * T) + 1e-9

    def test_bad_T(self):
        with pytest.raises(ValidationError):
            real_line_mean(APPoly.one(B), 0.0)

    def test_interval_distortion_of_character(self):
        p = APPoly.character(B.symbol("a"))
        r = interval_l1_distortion(p, 1.0, 2.0)
        assert r.value == pytest.approx(0.0, abs=1e-12)

    def test_interval_distortion_known_value(self):
        # |1 + e^{it}|^2 - 1 = 1 + 2 cos t; mean of |1 + 2cos t| over a
        # full period is (pi + 6 sqrt(3)) / (3 pi) by direct calculus.
        p = _two_char_poly()
        r = interval_l1_distortion(p, 0.0, 2 * math.pi, rel_tol=1e-9)
        want = (math.pi + 6 * math.sqrt(3)) / (3 * math.pi)
        assert r.value == pytest.approx(want, rel=1e-6)

    def test_bad_interval(self):
        with pytest.raises(ValidationError):
            interval_l1_distortion(APPoly.one(B), 2.0, 1.0)
