"""Exact arithmetic for real frequencies over a declared independence basis.

A frequency is a vector of exact rationals over an ordered list of named
real "symbols".  The symbols are treated as free generators: the toolkit
decides rational (in)dependence inside this symbol model and never tries
to detect relations between the floating symbol values themselves.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BasisMismatchError, InternalInconsistencyError, ValidationError

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TERM_RE = re.compile(r"([+-]?\d+(?:/\d+)?)(?:\*([A-Za-z_][A-Za-z0-9_]*))?\Z")
_BARE_RE = re.compile(r"([+-]?)([A-Za-z_][A-Za-z0-9_]*)\Z")


@dataclass(frozen=True)
class SymbolBasis:
    """Ordered, immutable list of (name, real value) generator symbols."""

    symbols: tuple[tuple[str, float], ...]

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if not names:
            raise ValidationError("basis must declare at least one symbol")
        if len(set(names)) != len(names):
            raise ValidationError("basis symbol names must be unique")
        for name, value in self.symbols:
            if not _NAME_RE.match(name):
                raise ValidationError(f"bad symbol name {name!r}")
            if not math.isfinite(value) or value == 0.0:
                raise ValidationError(f"symbol {name!r} must have a finite nonzero value")

    @classmethod
    def make(cls, *symbols: tuple[str, float]) -> "SymbolBasis":
        return cls(tuple((name, float(value)) for name, value in symbols))

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(value for _, value in self.symbols)

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.symbols):
            if n == name:
                return i
        raise ValidationError(f"symbol {name!r} is not declared in the basis")

    def zero(self) -> "Frequency":
        return Frequency(self, (Fraction(0),) * self.size)

    def symbol(self, name: str) -> "Frequency":
        """The frequency equal to one declared symbol."""
        coeffs = [Fraction(0)] * self.size
        coeffs[self.index(name)] = Fraction(1)
        return Frequency(self, tuple(coeffs))

    def frequency(self, coeffs: Mapping[str, Fraction | int | str]) -> "Frequency":
        vec = [Fraction(0)] * self.size
        for name, q in coeffs.items():
            vec[self.index(name)] = Fraction(q)
        return Frequency(self, tuple(vec))


@dataclass(frozen=True)
class Frequency:
    """Element of the frequency group: exact rational coefficients per symbol."""

    basis: SymbolBasis
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.basis.size:
            raise ValidationError(
                f"coefficient vector has length {len(self.coeffs)}, "
                f"basis has {self.basis.size} symbols"
            )
        if not all(isinstance(c, Fraction) for c in self.coeffs):
            object.__setattr__(
                self, "coeffs", tuple(Fraction(c) for c in self.coeffs)
            )

    def _check(self, other: "Frequency") -> None:
        if self.basis != other.basis:
            raise BasisMismatchError("frequencies live over different bases")

    def __add__(self, other: "Frequency") -> "Frequency":
        self._check(other)
        return Frequency(self.basis, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Frequency") -> "Frequency":
        self._check(other)
        return Frequency(self.basis, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Frequency":
        return Frequency(self.basis, tuple(-a for a in self.coeffs))

    def scale(self, q: Fraction | int) -> "Frequency":
        q = Fraction(q)
        return Frequency(self.basis, tuple(q * a for a in self.coeffs))

    __rmul__ = scale
    __mul__ = scale

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def real_value(self) -> float:
        """Floating evaluation against the declared symbol values."""
        return float(sum(float(c) * v for c, v in zip(self.coeffs, self.basis.values)))

    def sort_key(self):
        return self.coeffs

    def __str__(self) -> str:
        parts = []
        for c, name in zip(self.coeffs, self.basis.names):
            if c != 0:
                parts.append(f"{c}*{name}")
        return " + ".join(parts) if parts else "0"

    @classmethod
    def parse(cls, text: str, basis: SymbolBasis) -> "Frequency":
        """Parse the canonical text form, e.g. ``3/2*a + -1/4*b``.

        Whitespace is ignored; omitted symbols mean a zero coefficient;
        a bare name means coefficient one; ``0`` is the zero frequency.
        """
        compact = re.sub(r"\s+", "", text)
        if compact == "":
            raise ValidationError("empty frequency text")
        if compact == "0":
            return basis.zero()
        vec = [Fraction(0)] * basis.size
        for token in compact.split("+"):
            if token == "":
                raise ValidationError(f"malformed frequency text {text!r}")
            m = _TERM_RE.match(token)
            if m:
                coeff = Fraction(m.group(1))
                name = m.group(2)
                if name is None:
                    if coeff != 0:
                        raise ValidationError(
                            f"bare rational {token!r} needs a symbol name"
                        )
                    continue
            else:
                m = _BARE_RE.match(token)
                if not m:
                    raise ValidationError(f"malformed frequency term {token!r}")
                coeff = Fraction(-1 if m.group(1) == "-" else 1)
                name = m.group(2)
            vec[basis.index(name)] += coeff
        return cls(basis, tuple(vec))


def freq_add(a: Frequency, b: Frequency) -> Frequency:
    """Group law of the frequency module (componentwise rational sum)."""
    return a + b


def real_value(f: Frequency) -> float:
    return f.real_value()


def _shared_basis(freqs: Sequence[Frequency]) -> SymbolBasis:
    if not freqs:
        raise ValidationError("frequency set must be nonempty")
    basis = freqs[0].basis
    for f in freqs[1:]:
        if f.basis != basis:
            raise BasisMismatchError("frequencies live over different bases")
    return basis


def _integer_rows(freqs: Sequence[Frequency], common_scale: bool = False):
    """Rows as integer vectors.

    Per-row denominator clearing preserves rank; a common scale preserves
    the generated lattice (needed by torus_reduce).  Returns (rows, L)
    where L is the common denominator (1 when per-row scaling is used).
    """
    if common_scale:
        L = 1
        for f in freqs:
            for c in f.coeffs:
                L = L * c.denominator // math.gcd(L, c.denominator)
        rows = [[int(c * L) for c in f.coeffs] for f in freqs]
        return rows, L
    rows = []
    for f in freqs:
        d = 1
        for c in f.coeffs:
            d = d * c.denominator // math.gcd(d, c.denominator)
        rows.append([int(c * d) for c in f.coeffs])
    return rows, 1


def _bareiss_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    m = [r[:] for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    rank = 0
    prev = 1
    col = 0
    while rank < nrows and col < ncols:
        piv = None
        for r in range(rank, nrows):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            col += 1
            continue
        if piv != rank:
            m[rank], m[piv] = m[piv], m[rank]
        pval = m[rank][col]
        for r in range(rank + 1, nrows):
            rv = m[r][col]
            row = m[r]
            top = m[rank]
            # Standard Bareiss update; the division by the previous pivot is exact.
            m[r] = [(row[c] * pval - rv * top[c]) // prev for c in range(ncols)]
        prev = pval
        rank += 1
        col += 1
    return rank


def rational_rank(freqs: Iterable[Frequency]) -> int:
    """Rank over the rationals of the coefficient matrix of the given frequencies."""
    freqs = list(freqs)
    _shared_basis(freqs)
    rows, _ = _integer_rows(freqs)
    return _bareiss_rank(rows)


def is_rationally_independent(freqs: Iterable[Frequency]) -> bool:
    freqs = list(freqs)
    return rational_rank(freqs) == len(freqs)


@dataclass(frozen=True)
class TorusReduction:
    """Integer exponent coordinates of a finite frequency set.

    Each input frequency equals the integer combination of ``reduced_basis``
    given by its row of ``exponents`` (an exact rational identity), and the
    reduced basis is rationally independent, so under Haar measure the
    characters at the reduced basis become independent uniform phases.
    """

    dim: int
    reduced_basis: tuple[Frequency, ...]
    exponents: tuple[tuple[int, ...], ...]

    def reconstruct(self, i: int) -> Frequency:
        basis = self.reduced_basis[0].basis if self.dim else None
        if self.dim == 0:
            raise ValidationError("zero-dimensional reduction has no basis rows")
        acc = basis.zero()
        for e, b in zip(self.exponents[i], self.reduced_basis):
            acc = acc + b.scale(e)
        return acc


def _pivot_col(row: list[int]) -> int:
    for c, v in enumerate(row):
        if v != 0:
            return c
    raise InternalInconsistencyError("zero row reached the lattice basis")


def _lattice_echelon(rows: list[list[int]]) -> list[list[int]]:
    """Hermite-style echelon basis of the lattice generated by integer rows."""
    ncols = len(rows[0]) if rows else 0
    work = [r[:] for r in rows if any(r)]
    basis: list[list[int]] = []
    for c in range(ncols):
        sub = [r for r in work if r[c] != 0]
        if not sub:
            continue
        rest = [r for r in work if r[c] == 0]
        while len(sub) > 1:
            sub.sort(key=lambda r: abs(r[c]))
            r0 = sub[0]
            keep = [r0]
            for r in sub[1:]:
                q = r[c] // r0[c]
                rr = [a - q * b for a, b in zip(r, r0)]
                if rr[c] != 0:
                    keep.append(rr)
                elif any(rr):
                    rest.append(rr)
            sub = keep
        piv = sub[0]
        if piv[c] < 0:
            piv = [-a for a in piv]
        basis.append(piv)
        work = rest
    # Reduce entries above each pivot so the output is canonical (HNF).
    for i in range(len(basis)):
        ci = _pivot_col(basis[i])
        for j in range(i):
            q = basis[j][ci] // basis[i][ci]
            if q:
                basis[j] = [a - q * b for a, b in zip(basis[j], basis[i])]
    return basis


def _express_in_basis(v: list[int], basis: list[list[int]], pivots: list[int]) -> list[int]:
    r = list(v)
    e = []
    for brow, c in zip(basis, pivots):
        q, rem = divmod(r[c], brow[c])
        if rem:
            raise InternalInconsistencyError("input row not in the lattice of its echelon basis")
        e.append(q)
        if q:
            r = [a - q * b for a, b in zip(r, brow)]
    if any(r):
        raise InternalInconsistencyError("nonzero residue in lattice back-substitution")
    return e


def torus_reduce(freqs: Sequence[Frequency]) -> TorusReduction:
    """Reduce a finite frequency list to integer exponents on a finite torus.

    The reduced basis generates the same lattice as the inputs, has
    ``dim == rational_rank(freqs)`` rows, and is canonically ordered by
    pivot position (Hermite normal form of the row lattice).
    """
    freqs = list(freqs)
    basis = _shared_basis(freqs)
    rows, L = _integer_rows(freqs, common_scale=True)
    echelon = _lattice_echelon(rows)
    pivots = [_pivot_col(r) for r in echelon]
    exps = tuple(tuple(_express_in_basis(v, echelon, pivots)) for v in rows)
    reduced = tuple(
        Frequency(basis, tuple(Fraction(a, L) for a in row)) for row in echelon
    )
    return TorusReduction(dim=len(echelon), reduced_basis=reduced, exponents=exps)
