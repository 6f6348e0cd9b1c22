"""Singularity and flatness criteria evaluated numerically.

All verdicts here are evidence-graded: the underlying criteria quantify
over infinitely many subsequences, so a finite scan can only gather
evidence, never certify.  Every inequality is tested on shared sample
sets so that correlated integration errors cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .appoly import APPoly, ExactComplex
from .bohrint import Budget, IntegralEstimate, bohr_integral_multi
from .errors import InternalInconsistencyError, ValidationError
from .freqspace import SymbolBasis, rational_rank
from .riesz import RankOneParams, abs2_polynomial, build_polynomial

#: Geometric contraction factor of the inductive singularity construction:
#: the limit L1 norm sqrt(pi)/2 plus a fixed slack of sqrt(pi)/100.
GEOMETRIC_FACTOR = 51.0 * math.sqrt(math.pi) / 100.0

#: Gaussian first absolute moment: the limit of mean_abs for large cut numbers.
GAUSS_MEAN_ABS = math.sqrt(math.pi) / 2.0


def _derived_budget(budget: Budget, *tags: int) -> Budget:
    """A copy of the budget with a seed derived from (seed, tags).

    Distinct tags give independent streams while keeping the whole scan
    reproducible from the one top-level seed.
    """
    seed = int(np.random.SeedSequence([budget.seed, *tags]).generate_state(1)[0])
    return replace(budget, seed=seed)


def _prod_abs(n: int):
    def g(*vals):
        acc = np.abs(vals[0])
        for v in vals[1:n]:
            acc = acc * np.abs(v)
        return acc
    return g


def _prod_abs2(n: int):
    def g(*vals):
        acc = np.abs(vals[0]) ** 2
        for v in vals[1:n]:
            acc = acc * np.abs(v) ** 2
        return acc
    return g


def _unit_estimate() -> IntegralEstimate:
    return IntegralEstimate(
        value=1.0, std_error=0.0, method="tensor-quadrature",
        nodes_or_samples=1, seed=None, torus_dim=0,
    )


# ---------------------------------------------------------------------------
# Bourgain criterion scan


@dataclass(frozen=True)
class ScanReport:
    """One scan of the subsequence infimum behind the singularity criterion."""

    indices: tuple[int, ...]
    estimates: tuple[IntegralEstimate, ...]  # I_0 = 1, then one per chosen stage
    decay_ratios: tuple[float, ...]
    candidates: tuple[tuple[tuple[int, float, float], ...], ...]
    verdict: str  # singularity-evidence | inconclusive

    def to_json(self) -> dict:
        return {
            "indices": list(self.indices),
            "estimates": [e.to_json() for e in self.estimates],
            "decay_ratios": list(self.decay_ratios),
            "candidates": [
                [{"stage": s, "value": v, "std_error": e} for s, v, e in step]
                for step in self.candidates
            ],
            "verdict": self.verdict,
        }


def bourgain_scan(params: RankOneParams, strategy: str = "greedy",
                  k_max: int = 5, budget: Budget = Budget(),
                  window: int = 3, stride: int = 1,
                  threshold: float = 0.1) -> ScanReport:
    """Drive I_k = mean of the product of |P_{n_j}| toward zero.

    The greedy strategy mimics the inductive construction: at each step it
    tries the next ``window`` unused stages and keeps the one minimizing the
    estimated integral.  The verdict is singularity-evidence when I_{k_max}
    is below the threshold with 3 sigma to spare.
    """
    if k_max < 1:
        raise ValidationError("k_max must be at least 1")
    if strategy not in ("greedy", "fixed-stride"):
        raise ValidationError(f"unknown scan strategy {strategy!r}")
    if window < 1 or stride < 1:
        raise ValidationError("window and stride must be positive")

    chosen: list[int] = []
    chosen_polys: list[APPoly] = []
    estimates: list[IntegralEstimate] = [_unit_estimate()]
    all_candidates: list[tuple[tuple[int, float, float], ...]] = []

    for step in range(k_max):
        start = chosen[-1] + 1 if chosen else 0
        if strategy == "greedy":
            cands = [m for m in range(start, min(start + window, params.n_stages))]
        else:
            cands = [start + stride - 1] if start + stride - 1 < params.n_stages else []
        if not cands:
            raise ValidationError(
                f"scan step {step} has no candidate stages left "
                f"({params.n_stages} stages available)"
            )
        results = []
        for m in cands:
            polys = chosen_polys + [build_polynomial(params, m)]
            est = bohr_integral_multi(
                [_prod_abs(len(polys))], polys, _derived_budget(budget, step, m)
            )[0]
            results.append((m, est))
        all_candidates.append(
            tuple((m, e.value, e.std_error) for m, e in results)
        )
        best_m, best_est = min(results, key=lambda r: r[1].value)
        chosen.append(best_m)
        chosen_polys.append(build_polynomial(params, best_m))
        estimates.append(best_est)

    ratios = []
    for a, b in zip(estimates, estimates[1:]):
        if a.value > 0:
            ratios.append(b.value / a.value)
    last = estimates[-1]
    verdict = (
        "singularity-evidence"
        if last.value + 3.0 * last.std_error < threshold
        else "inconclusive"
    )
    return ScanReport(
        indices=tuple(chosen),
        estimates=tuple(estimates),
        decay_ratios=tuple(ratios),
        candidates=tuple(all_candidates),
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# Inequality checks


@dataclass(frozen=True)
class InequalityRecord:
    lhs: float
    rhs: float
    lhs_error: float
    rhs_error: float
    holds: bool

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs, "rhs": self.rhs,
            "lhs_error": self.lhs_error, "rhs_error": self.rhs_error,
            "holds": self.holds,
        }


def cs_subsequence_bound(params: RankOneParams, full_n: int,
                         indices: Sequence[int],
                         budget: Budget = Budget()) -> InequalityRecord:
    """mean of prod_{k<=N}|P_k| <= (mean of prod over the index subset)^(1/2).

    Both sides share one sample set.  An empty subset gives rhs = 1.
    """
    indices = sorted(set(indices))
    if any(i < 0 or i > full_n for i in indices):
        raise ValidationError("subsequence indices must lie in 0..full_n")
    polys = [build_polynomial(params, k) for k in range(full_n + 1)]
    sel = list(indices)

    def g_inner(*vals):
        if not sel:
            return np.ones_like(np.abs(vals[0]))
        acc = np.abs(vals[sel[0]])
        for i in sel[1:]:
            acc = acc * np.abs(vals[i])
        return acc

    e_lhs, e_inner = bohr_integral_multi(
        [_prod_abs(len(polys)), g_inner], polys, budget
    )
    inner = max(e_inner.value, 0.0)
    rhs = math.sqrt(inner)
    # d(sqrt(x))/dx = 1/(2 sqrt(x)); guard the degenerate root.
    rhs_err = e_inner.std_error / (2.0 * rhs) if rhs > 1e-12 else math.sqrt(
        e_inner.std_error
    )
    tol = 3.0 * math.hypot(e_lhs.std_error, rhs_err)
    return InequalityRecord(
        lhs=e_lhs.value, rhs=rhs,
        lhs_error=e_lhs.std_error, rhs_error=rhs_err,
        holds=e_lhs.value <= rhs + tol,
    )


def klemes_inequality_check(params: RankOneParams, indices: Sequence[int],
                            m: int, budget: Budget = Budget()) -> InequalityRecord:
    """With Q the partial product of |P_j|^2 over ``indices``:

        int Q|P_m| <= (int Q + int Q|P_m|^2)/2 - (int Q * ||P_m|^2 - 1|)^2 / 8.

    All four integrals come from one shared-sample pass.
    """
    indices = sorted(set(indices))
    if indices and m <= max(indices):
        raise ValidationError("stage m must exceed every index of Q")
    q_polys = [build_polynomial(params, j) for j in indices]
    pm = build_polynomial(params, m)
    polys = q_polys + [pm]
    nq = len(q_polys)
    q_of = _prod_abs2(nq) if nq else (lambda *vals: np.ones(vals[0].shape))

    def g1(*vals):
        return q_of(*vals) * np.abs(vals[nq])

    def g2(*vals):
        return q_of(*vals)

    def g3(*vals):
        return q_of(*vals) * np.abs(vals[nq]) ** 2

    def g4(*vals):
        return q_of(*vals) * np.abs(np.abs(vals[nq]) ** 2 - 1.0)

    e1, e2, e3, e4 = bohr_integral_multi([g1, g2, g3, g4], polys, budget)
    rhs = 0.5 * (e2.value + e3.value) - e4.value ** 2 / 8.0
    rhs_err = math.sqrt(
        0.25 * e2.std_error ** 2
        + 0.25 * e3.std_error ** 2
        + (e4.value / 4.0) ** 2 * e4.std_error ** 2
    )
    tol = 3.0 * math.hypot(e1.std_error, rhs_err)
    return InequalityRecord(
        lhs=e1.value, rhs=rhs,
        lhs_error=e1.std_error, rhs_error=rhs_err,
        holds=e1.value <= rhs + tol,
    )


# ---------------------------------------------------------------------------
# Weak convergence toward Haar


@dataclass(frozen=True)
class HaarLimitRecord:
    m: int
    q_mean: float
    q_pm2_mean: float
    deviation: float
    combined_error: float
    rank_additive: bool  # frequencies of stage m independent from Q's

    def to_json(self) -> dict:
        return {
            "m": self.m, "q_mean": self.q_mean,
            "q_pm2_mean": self.q_pm2_mean, "deviation": self.deviation,
            "combined_error": self.combined_error,
            "rank_additive": self.rank_additive,
        }


def _rank_additive(q_polys: Sequence[APPoly], pm: APPoly) -> bool:
    q_freqs = [f for p in q_polys for f in p.support() if not f.is_zero()]
    m_freqs = [f for f in pm.support() if not f.is_zero()]
    if not q_freqs or not m_freqs:
        return True
    return (rational_rank(q_freqs + m_freqs)
            == rational_rank(q_freqs) + rational_rank(m_freqs))


def haar_weak_limit_check(params: RankOneParams, q_indices: Sequence[int],
                          m_list: Sequence[int],
                          budget: Budget = Budget()) -> list[HaarLimitRecord]:
    """Deviation of int Q |P_m|^2 from int Q as m runs over ``m_list``.

    When the stage-m frequencies are rationally independent of Q's the
    deviation is zero up to sampling error (mean factorization); this is
    reported, not asserted.
    """
    q_indices = sorted(set(q_indices))
    q_polys = [build_polynomial(params, j) for j in q_indices]
    nq = len(q_polys)
    q_of = _prod_abs2(nq) if nq else (lambda *vals: np.ones(vals[0].shape))
    out = []
    for i, m in enumerate(m_list):
        pm = build_polynomial(params, m)
        polys = q_polys + [pm]

        def g_q(*vals):
            return q_of(*vals)

        def g_qm(*vals):
            return q_of(*vals) * np.abs(vals[nq]) ** 2

        e_q, e_qm = bohr_integral_multi(
            [g_q, g_qm], polys, _derived_budget(budget, i, m)
        )
        out.append(HaarLimitRecord(
            m=m, q_mean=e_q.value, q_pm2_mean=e_qm.value,
            deviation=e_qm.value - e_q.value,
            combined_error=math.hypot(e_q.std_error, e_qm.std_error),
            rank_additive=_rank_additive(q_polys, pm),
        ))
    return out


# ---------------------------------------------------------------------------
# Guenais absolutely-continuous-component condition


@dataclass(frozen=True)
class GuenaisRecord:
    norms: tuple[float, ...]  # estimated L1 norms per stage
    increments: tuple[float, ...]  # sqrt(max(0, 1 - norm^2))
    partial_sums: tuple[float, ...]
    tail_slope: float  # least-squares slope of log-increments vs stage

    def to_json(self) -> dict:
        return {
            "norms": list(self.norms),
            "increments": list(self.increments),
            "partial_sums": list(self.partial_sums),
            "tail_slope": self.tail_slope,
        }


def guenais_sum(params: RankOneParams, K: int,
                budget: Budget = Budget()) -> GuenaisRecord:
    """Partial sums of sqrt(1 - |P_k|_1^2) over the first K stages.

    Convergence of the full series forces an absolutely continuous
    component; only the trend is reported, never a verdict.
    """
    if K < 0:
        raise ValidationError("K must be nonnegative")
    norms, incs, psums = [], [], []
    acc = 0.0
    for k in range(K):
        p = build_polynomial(params, k)
        est = bohr_integral_multi(
            [np.abs], [p], _derived_budget(budget, k)
        )[0]
        if est.value > 1.0 + 3.0 * est.std_error:
            raise InternalInconsistencyError(
                f"estimated L1 norm {est.value:.6f} of stage {k} exceeds 1 "
                f"beyond 3 sigma; integration failure"
            )
        v = min(est.value, 1.0)
        inc = math.sqrt(max(0.0, 1.0 - v * v))
        norms.append(est.value)
        incs.append(inc)
        acc += inc
        psums.append(acc)
    pos = [(k, math.log(i)) for k, i in enumerate(incs) if i > 0]
    if len(pos) >= 2:
        xs = np.array([k for k, _ in pos], dtype=float)
        ys = np.array([y for _, y in pos])
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = 0.0
    return GuenaisRecord(
        norms=tuple(norms), increments=tuple(incs),
        partial_sums=tuple(psums), tail_slope=slope,
    )


# ---------------------------------------------------------------------------
# Fejer-type factorization


@dataclass(frozen=True)
class FejerRecord:
    joint: float
    product: float
    relative_gap: float
    combined_error: float
    holds: bool
    symbolic_exact: bool  # exact mean factorization for |P_m|^2 against Q

    def to_json(self) -> dict:
        return {
            "joint": self.joint, "product": self.product,
            "relative_gap": self.relative_gap,
            "combined_error": self.combined_error,
            "holds": self.holds, "symbolic_exact": self.symbolic_exact,
        }


def fejer_factorization_check(params: RankOneParams, q_indices: Sequence[int],
                              m: int, budget: Budget = Budget()) -> FejerRecord:
    """int Q|P_m| = (int Q)(int |P_m|) under rational independence.

    Requires rank additivity between the stage-m frequencies and Q's in the
    symbol model; the exact factorization is also verified symbolically on
    the polynomial functional |P_m|^2.
    """
    q_indices = sorted(set(q_indices))
    q_polys = [build_polynomial(params, j) for j in q_indices]
    pm = build_polynomial(params, m)
    if not _rank_additive(q_polys, pm):
        raise ValidationError(
            "stage frequencies are not rationally independent of the "
            "partial product; the factorization hypothesis fails"
        )
    nq = len(q_polys)
    q_of = _prod_abs2(nq) if nq else (lambda *vals: np.ones(vals[0].shape))
    polys = q_polys + [pm]

    def g_joint(*vals):
        return q_of(*vals) * np.abs(vals[nq])

    def g_q(*vals):
        return q_of(*vals)

    def g_m(*vals):
        return np.abs(vals[nq])

    e_joint, e_q, e_m = bohr_integral_multi([g_joint, g_q, g_m], polys, budget)
    product = e_q.value * e_m.value
    prod_err = math.hypot(e_m.value * e_q.std_error, e_q.value * e_m.std_error)
    gap = abs(e_joint.value - product)
    combined = math.hypot(e_joint.std_error, prod_err)

    q_exact = APPoly.one(params.basis, exact=True)
    for j in q_indices:
        q_exact = q_exact * abs2_polynomial(params, j)
    pm2 = abs2_polynomial(params, m)
    symbolic = (q_exact * pm2).mean() == q_exact.mean() * pm2.mean()

    return FejerRecord(
        joint=e_joint.value, product=product,
        relative_gap=gap / max(abs(product), 1e-12),
        combined_error=combined,
        holds=gap <= 3.0 * combined,
        symbolic_exact=symbolic,
    )


# ---------------------------------------------------------------------------
# Kac CLT diagnostics and moment identity


@dataclass(frozen=True)
class KacCltRecord:
    q: int
    n_samples: int
    seed: int
    ks_distance_re: float
    ks_distance_im: float
    mean_abs: float
    mean_abs_std_error: float
    mean_abs2: float
    mean_abs2_std_error: float

    def to_json(self) -> dict:
        return {
            "q": self.q, "n_samples": self.n_samples, "seed": self.seed,
            "ks_distance_re": self.ks_distance_re,
            "ks_distance_im": self.ks_distance_im,
            "mean_abs": self.mean_abs,
            "mean_abs_std_error": self.mean_abs_std_error,
            "mean_abs2": self.mean_abs2,
            "mean_abs2_std_error": self.mean_abs2_std_error,
        }


def kac_clt_diagnostics(q: int, n_samples: int = 100_000,
                        seed: int = 0) -> KacCltRecord:
    """Empirics for Z = (1/sqrt(q)) sum of q independent unit phases.

    Re(Z) and Im(Z) are tested against the normal law with variance 1/2;
    E|Z| approaches sqrt(pi)/2 and E|Z|^2 is 1 exactly.
    """
    if q < 1 or n_samples < 2:
        raise ValidationError("need q >= 1 and at least two samples")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    theta = rng.random((q, n_samples))
    z = np.exp((2j * np.pi) * theta).sum(axis=0) / math.sqrt(q)
    sigma = math.sqrt(0.5)
    ks_re = float(stats.kstest(z.real, "norm", args=(0.0, sigma)).statistic)
    ks_im = float(stats.kstest(z.imag, "norm", args=(0.0, sigma)).statistic)
    a = np.abs(z)
    a2 = a * a
    return KacCltRecord(
        q=q, n_samples=n_samples, seed=seed,
        ks_distance_re=ks_re, ks_distance_im=ks_im,
        mean_abs=float(a.mean()),
        mean_abs_std_error=float(a.std(ddof=1) / math.sqrt(n_samples)),
        mean_abs2=float(a2.mean()),
        mean_abs2_std_error=float(a2.std(ddof=1) / math.sqrt(n_samples)),
    )


def kac_moment_formula(exponents: Sequence[int]) -> Fraction:
    """Mean of prod_j cos^{l_j} at rationally independent frequencies.

    Each even l_j contributes binom(l_j, l_j/2) / 2^{l_j}; any odd exponent
    makes the whole mean vanish.
    """
    out = Fraction(1)
    for l in exponents:
        if l < 0:
            raise ValidationError("exponents must be nonnegative")
        if l % 2:
            return Fraction(0)
        out *= Fraction(math.comb(l, l // 2), 2 ** l)
    return out


def kac_moment_identity(exponents: Sequence[int]) -> Fraction:
    """The moment via the binomial formula, cross-checked symbolically.

    The symbolic route expands prod cos^{l_j}(w_j t) as an exact-coefficient
    polynomial over fresh independent symbols and reads off the mean; the
    two routes must agree exactly.
    """
    exponents = list(exponents)
    formula = kac_moment_formula(exponents)
    if exponents:
        basis = SymbolBasis.make(*[(f"w{j}", float(j + 2)) for j in range(len(exponents))])
        half = ExactComplex.of(Fraction(1, 2))
        prod = APPoly.one(basis, exact=True)
        for j, l in enumerate(exponents):
            w = basis.symbol(f"w{j}")
            cos = (APPoly.character(w, half, exact=True)
                   + APPoly.character(-w, half, exact=True))
            for _ in range(l):
                prod = prod * cos
        m = prod.mean()
        if m.im != 0:
            raise InternalInconsistencyError("cosine-product mean is not real")
        if m.re != formula:
            raise InternalInconsistencyError(
                f"moment identity mismatch: formula {formula}, symbolic {m.re}"
            )
    return formula
