"""Rank-one flow parameters and Riesz-product bookkeeping.

The construction: cut numbers p_k >= 2 and nonnegative spacers s_{k,0..p_k}
(with s_{k,0} = 0) define heights h_0 = 1, h_{k+1} = p_k h_k + sum_l s_{k,l}
and stage polynomials

    P_k(t) = (1/sqrt(p_k)) * sum_{j<p_k} e^{i t (j h_k + s_{k,0}+...+s_{k,j-1})}.

Everything height- and frequency-shaped is exact; |P_k|^2 and the partial
products Q_n carry exact rational coefficients, so sigma-hat values and the
probability normalization are checked with exact equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .appoly import APPoly, EXACT_ONE, ExactComplex
from .errors import InternalInconsistencyError, SupportCapError, ValidationError
from .freqspace import Frequency, SymbolBasis, is_rationally_independent

DEFAULT_SUPPORT_CAP = 1_000_000


@dataclass(frozen=True)
class Stage:
    """One cutting stage: cut number p and spacers s_0..s_p (s_0 = 0)."""

    p: int
    spacers: tuple[Frequency, ...]

    def __post_init__(self):
        if self.p < 2:
            raise ValidationError(f"cut number must be at least 2, got {self.p}")
        if len(self.spacers) != self.p + 1:
            raise ValidationError(
                f"stage with p={self.p} needs {self.p + 1} spacers, "
                f"got {len(self.spacers)}"
            )
        if not self.spacers[0].is_zero():
            raise ValidationError("the first spacer s_{k,0} must be zero")
        for j, s in enumerate(self.spacers):
            if s.real_value() < 0:
                raise ValidationError(f"spacer {j} has negative real value")


@dataclass(frozen=True)
class RankOneParams:
    """The full parameter sequence of a rank-one flow, over one basis."""

    basis: SymbolBasis
    unit: Frequency
    stages: tuple[Stage, ...]

    def __post_init__(self):
        if self.unit.basis != self.basis:
            raise ValidationError("unit frequency over a different basis")
        if self.unit.real_value() != 1.0:
            raise ValidationError("the unit frequency must evaluate to exactly 1")
        for k, st in enumerate(self.stages):
            for s in st.spacers:
                if s.basis != self.basis:
                    raise ValidationError(f"stage {k} spacer over a different basis")

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def stage(self, k: int) -> Stage:
        if not 0 <= k < len(self.stages):
            raise ValidationError(f"stage index {k} out of range")
        return self.stages[k]

    @classmethod
    def from_config(cls, doc: dict) -> "RankOneParams":
        """Build from a config document with basis, unit and stage lists."""
        try:
            symbols = tuple(
                (entry["name"], float(entry["value"])) for entry in doc["basis"]
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad basis declaration: {exc}") from exc
        basis = SymbolBasis(symbols)
        unit_name = doc.get("unit", symbols[0][0])
        unit = basis.symbol(unit_name)
        stages = []
        for k, st in enumerate(doc.get("stages", [])):
            try:
                p = int(st["p"])
                spacers = tuple(
                    Frequency.parse(text, basis) for text in st["spacers"]
                )
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"bad stage {k}: {exc}") from exc
            stages.append(Stage(p=p, spacers=spacers))
        return cls(basis=basis, unit=unit, stages=tuple(stages))


def heights(params: RankOneParams, k: int) -> Frequency:
    """h_k: h_0 = 1 and h_{k+1} = p_k h_k + sum of all stage-k spacers."""
    if not 0 <= k <= params.n_stages:
        raise ValidationError(f"height index {k} out of range")
    h = params.unit
    for m in range(k):
        st = params.stages[m]
        h = h.scale(st.p)
        for s in st.spacers:
            h = h + s
    return h


def heights_list(params: RankOneParams) -> list[Frequency]:
    out = [params.unit]
    for m in range(params.n_stages):
        st = params.stages[m]
        h = out[-1].scale(st.p)
        for s in st.spacers:
            h = h + s
        out.append(h)
    return out


def spacer_sum(params: RankOneParams, n: int, p: int, q: int) -> Frequency:
    """s-check_{n,p,q}: the spacer sum over j in [min(p,q), max(p,q))."""
    st = params.stage(n)
    if not (0 <= p <= st.p - 1 and 0 <= q <= st.p - 1):
        raise ValidationError("spacer-sum indices out of range")
    lo, hi = min(p, q), max(p, q)
    acc = params.basis.zero()
    for j in range(lo, hi):
        acc = acc + st.spacers[j]
    return acc


def stage_exponents(params: RankOneParams, k: int) -> list[Frequency]:
    """The p_k exponents j*h_k + s_{k,0} + ... + s_{k,j-1} of stage k."""
    st = params.stage(k)
    h = heights(params, k)
    out = []
    acc = params.basis.zero()
    for j in range(st.p):
        out.append(h.scale(j) + acc)
        acc = acc + st.spacers[j]
    if len(set(out)) != len(out):
        raise ValidationError(
            f"stage {k} exponents collide; degenerate rank-one parameters"
        )
    return out


def build_polynomial(params: RankOneParams, k: int) -> APPoly:
    """P_k with floating coefficients 1/sqrt(p_k); unit L2 norm."""
    st = params.stage(k)
    c = 1.0 / math.sqrt(st.p)
    return APPoly.from_terms(
        params.basis, [(f, c) for f in stage_exponents(params, k)]
    )


def abs2_polynomial(params: RankOneParams, k: int) -> APPoly:
    """|P_k|^2 with exact rational coefficients (multiples of 1/p_k)."""
    st = params.stage(k)
    unnorm = APPoly.from_terms(
        params.basis,
        [(f, EXACT_ONE) for f in stage_exponents(params, k)],
        exact=True,
    )
    return unnorm.abs2().scale(Fraction(1, st.p))


def delta(params: RankOneParams, k: int) -> APPoly:
    """Delta_k = |P_k|^2 - 1, exactly; its mean is zero."""
    return abs2_polynomial(params, k) - APPoly.one(params.basis, exact=True)


@dataclass(frozen=True)
class SigmaHatValue:
    value: Fraction
    on_support: bool  # False means this is sigma-hat_n = 0, not the limit


@dataclass(frozen=True)
class RieszState:
    """Partial Riesz product after folding stages 0..n.

    R = P_0 ... P_n (floating coefficients), Q = |R|^2 (exact rational
    coefficients, computed as the product of the exact stage |P_k|^2).
    """

    params: RankOneParams
    n: int  # index of the last folded stage; -1 for the empty product
    R: APPoly
    Q: APPoly

    def sigma_hat(self, lam: Frequency) -> SigmaHatValue:
        c = self.Q.fourier_coeff(lam)
        if isinstance(c, ExactComplex):
            if c.im != 0:
                raise InternalInconsistencyError("sigma-hat value is not real")
            on = not c.is_zero() or lam in self.Q.terms
            return SigmaHatValue(value=c.re, on_support=on)
        return SigmaHatValue(value=Fraction(0), on_support=False)

    def sigma_hat_table(self) -> dict[Frequency, Fraction]:
        out = {}
        for f, c in self.Q.terms.items():
            if c.im != 0:
                raise InternalInconsistencyError("sigma-hat value is not real")
            out[f] = c.re
        return out


def initial_state(params: RankOneParams) -> RieszState:
    return RieszState(
        params=params,
        n=-1,
        R=APPoly.one(params.basis),
        Q=APPoly.one(params.basis, exact=True),
    )


def extend(state: RieszState, k: int,
           support_cap: int = DEFAULT_SUPPORT_CAP) -> RieszState:
    """Fold stage k = state.n + 1 into the partial product."""
    if k != state.n + 1:
        raise ValidationError(
            f"extend expects stage {state.n + 1}, got {k}"
        )
    st = state.params.stage(k)
    if len(state.R) * st.p > support_cap or len(state.Q) * st.p * st.p > support_cap:
        raise SupportCapError(
            f"extending to stage {k} would exceed the support cap {support_cap}"
        )
    return RieszState(
        params=state.params,
        n=k,
        R=state.R * build_polynomial(state.params, k),
        Q=state.Q * abs2_polynomial(state.params, k),
    )


def riesz_property_check(params: RankOneParams,
                         indices: Sequence[int]) -> Fraction:
    """Exact mean of the product of |P_{n_j}|^2 over a strictly increasing index set."""
    indices = list(indices)
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValidationError("indices must be strictly increasing")
    prod = APPoly.one(params.basis, exact=True)
    for i in indices:
        prod = prod * abs2_polynomial(params, i)
    m = prod.mean()
    if m.im != 0:
        raise InternalInconsistencyError("mean of |R|^2 is not real")
    return m.re


@dataclass(frozen=True)
class DegreeReport:
    degrees: tuple[float, ...]  # d_m for each requested index
    heights: tuple[float, ...]  # h_0..h_{n_stages} as real values
    q_k: float  # sum of the requested degrees
    checks: tuple[tuple[str, float, float, bool], ...]  # (name, lhs, rhs, holds)
    all_hold: bool

    def to_json(self) -> dict:
        return {
            "degrees": list(self.degrees),
            "heights": list(self.heights),
            "q_k": self.q_k,
            "checks": [list(c) for c in self.checks],
            "all_hold": self.all_hold,
        }


def degree_report(params: RankOneParams, indices: Sequence[int],
                  rel_tol: float = 1e-9) -> DegreeReport:
    """Degree bookkeeping: d_m < h_{m+1}, h_m <= h_{m+1}/2, q_k < h_{n_k+1}.

    Degrees are computed from the actual polynomial supports, not from the
    closed-form identity (see the telescoping bound); q_k is the telescoped
    sum of the per-stage degrees.
    """
    indices = sorted(set(indices))
    if not indices:
        raise ValidationError("need at least one stage index")
    hs = [h.real_value() for h in heights_list(params)]
    degs = []
    checks = []

    def leq(x, y):
        return x <= y * (1.0 + rel_tol) + rel_tol

    def lt(x, y):
        return x < y * (1.0 + rel_tol) + rel_tol

    for m in indices:
        d = build_polynomial(params, m).degree()
        degs.append(d)
        checks.append((f"d_{m} < h_{m + 1}", d, hs[m + 1], lt(d, hs[m + 1])))
    for m in range(params.n_stages):
        checks.append((
            f"h_{m} <= h_{m + 1}/2", hs[m], hs[m + 1] / 2.0,
            leq(hs[m], hs[m + 1] / 2.0),
        ))
    q_k = float(sum(degs))
    top = indices[-1]
    checks.append((
        f"q_k < h_{top + 1}", q_k, hs[top + 1], lt(q_k, hs[top + 1])
    ))
    return DegreeReport(
        degrees=tuple(degs),
        heights=tuple(hs),
        q_k=q_k,
        checks=tuple(checks),
        all_hold=all(c[3] for c in checks),
    )


def validate_main_hypothesis(params: RankOneParams,
                             indices: Sequence[int]) -> dict[int, bool]:
    """Check, per designated stage, that the height and the (nonzero) spacers
    are rationally independent in the symbol model.

    The forced s_{m,0} = 0 is excluded: a set containing the zero frequency
    is never independent, and the singularity argument only ever uses the
    remaining spacers.
    """
    out = {}
    for m in indices:
        st = params.stage(m)
        freqs = [heights(params, m)] + list(st.spacers[1:st.p])
        out[m] = is_rationally_independent(freqs)
    return out


def make_independent_params(cuts: Sequence[int], seed: int = 0,
                            value_low: float = 0.1,
                            value_high: float = 0.9) -> RankOneParams:
    """Rank-one parameters whose spacers are fresh independent symbols.

    Each stage k gets p_k fresh symbols s{k}_{1..p_k}; s_{k,0} is zero.  The
    symbol values are only used for real-line evaluation and degrees, so any
    positive values do; they are drawn reproducibly from the seed.
    """
    rng = np.random.default_rng(seed)
    symbols = [("one", 1.0)]
    for k, p in enumerate(cuts):
        for j in range(1, p + 1):
            symbols.append((f"s{k}_{j}", float(rng.uniform(value_low, value_high))))
    basis = SymbolBasis(tuple(symbols))
    stages = []
    for k, p in enumerate(cuts):
        spacers = [basis.zero()]
        for j in range(1, p + 1):
            spacers.append(basis.symbol(f"s{k}_{j}"))
        stages.append(Stage(p=p, spacers=tuple(spacers)))
    return RankOneParams(basis=basis, unit=basis.symbol("one"), stages=tuple(stages))
