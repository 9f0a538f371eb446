"""Generators, PBW-normal normally ordered monomials, and graded weight spaces.

A strong generator of index i >= 2 has conformal weight i and Z2-parity
(-1)^i (index 2 is the Virasoro field L). A normally ordered monomial is a
tuple of factors (m, i) -- the m-th derivative of the index-i generator --
interpreted as the right-nested iterated Wick product. PBW normal form sorts
factors by ascending generator index and, within one index, by descending
derivative order.

This module is pure bookkeeping: no Wick reordering corrections happen here
(that is the OPE engine's job). In particular `derivative` is the formal
Leibniz derivative on PBW words, i.e. the derivative of the associated-graded
object, not the translation operator of the vertex algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple

Factor = Tuple[int, int]          # (derivative order m >= 0, generator index i >= 2)
Monomial = Tuple[Factor, ...]     # PBW word; () is the vacuum

VACUUM: Monomial = ()


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    """Strong generator W^i; index 2 is L."""
    index: int

    def __post_init__(self):
        if self.index < 2:
            raise FieldError(f"generator index must be >= 2, got {self.index}")

    @property
    def weight(self) -> int:
        return self.index

    @property
    def parity(self) -> int:
        return -1 if self.index % 2 else 1


def factor_key(f: Factor):
    m, i = f
    return (i, -m)


def factor_weight(f: Factor) -> int:
    m, i = f
    return i + m


def canonicalize(factors: Iterable[Factor]) -> Monomial:
    """Sort a factor sequence into PBW order. Pure bookkeeping, no corrections."""
    fs = []
    for f in factors:
        m, i = f
        if m < 0 or i < 2:
            raise FieldError(f"bad factor {f}")
        fs.append((int(m), int(i)))
    return tuple(sorted(fs, key=factor_key))


def is_canonical(mono: Monomial) -> bool:
    return all(factor_key(mono[k]) <= factor_key(mono[k + 1])
               for k in range(len(mono) - 1))


def mono_weight(mono: Monomial) -> int:
    return sum(i + m for m, i in mono)


def mono_parity(mono: Monomial) -> int:
    return -1 if sum(i for _, i in mono) % 2 else 1


def mono_max_index(mono: Monomial) -> int:
    return max((i for _, i in mono), default=0)


def basis_sort_key(mono: Monomial):
    """Deterministic weight-space order: highest generator index leads."""
    return (-mono_max_index(mono), len(mono), mono)


def mono_text(mono: Monomial) -> str:
    if not mono:
        return "1"
    parts = []
    for m, i in mono:
        name = "L" if i == 2 else f"W{i}"
        parts.append(f"({name})" if m == 0 else f"(d^{m} {name})")
    return ":" + " ".join(parts) + ":"


def parse_mono(text: str) -> Monomial:
    text = text.strip()
    if text == "1":
        return VACUUM
    if not (text.startswith(":") and text.endswith(":")):
        raise FieldError(f"bad monomial text {text!r}")
    body = text[1:-1].strip()
    factors = []
    for piece in body.split(") "):
        piece = piece.strip()
        if piece.startswith("("):
            piece = piece[1:]
        if piece.endswith(")"):
            piece = piece[:-1]
        if piece.startswith("d^"):
            dpart, name = piece.split(" ", 1)
            m = int(dpart[2:])
        else:
            m, name = 0, piece
        name = name.strip()
        i = 2 if name == "L" else int(name[1:])
        factors.append((m, i))
    mono = tuple(factors)
    if not is_canonical(mono):
        raise FieldError(f"non-canonical monomial text {text!r}")
    return mono


class FieldPoly(dict):
    """Linear combination of PBW monomials; maps Monomial -> coefficient.

    Coefficients may be Fractions, ParamPolys, ParamRats, or any exact type
    supporting +, -, *, and truthiness for zero-testing.
    """

    __slots__ = ()

    @classmethod
    def term(cls, mono: Monomial, coef) -> "FieldPoly":
        out = cls()
        if coef:
            out[mono] = coef
        return out

    def iadd_term(self, mono: Monomial, coef) -> None:
        cur = self.get(mono)
        if cur is None:
            if coef:
                self[mono] = coef
        else:
            cur = cur + coef
            if cur:
                self[mono] = cur
            else:
                del self[mono]

    def iadd(self, other: "FieldPoly", scale=None) -> None:
        if scale is None:
            for mono, coef in other.items():
                self.iadd_term(mono, coef)
        else:
            if not scale:
                return
            for mono, coef in other.items():
                self.iadd_term(mono, coef * scale)

    def __add__(self, other: "FieldPoly") -> "FieldPoly":
        out = FieldPoly(self)
        out.iadd(other)
        return out

    def __sub__(self, other: "FieldPoly") -> "FieldPoly":
        out = FieldPoly(self)
        out.iadd(other, -1)
        return out

    def __neg__(self) -> "FieldPoly":
        return FieldPoly({m: -c for m, c in self.items()})

    def scaled(self, scale) -> "FieldPoly":
        if not scale:
            return FieldPoly()
        return FieldPoly({m: c * scale for m, c in self.items()})

    def map_coeffs(self, fn) -> "FieldPoly":
        out = FieldPoly()
        for mono, coef in self.items():
            out.iadd_term(mono, fn(coef))
        return out

    def is_zero(self) -> bool:
        return not self

    def weight(self) -> Optional[int]:
        """Common weight of all monomials; raises if inhomogeneous."""
        ws = {mono_weight(m) for m in self}
        if not ws:
            return None
        if len(ws) > 1:
            raise FieldError(f"inhomogeneous field polynomial, weights {sorted(ws)}")
        return ws.pop()

    def parity(self) -> Optional[int]:
        ps = {mono_parity(m) for m in self}
        if not ps:
            return None
        if len(ps) > 1:
            raise FieldError("mixed parity field polynomial")
        return ps.pop()

    def text(self) -> str:
        if not self:
            return "0"
        parts = []
        for mono in sorted(self, key=basis_sort_key):
            parts.append(f"[{self[mono]}] {mono_text(mono)}")
        return "  +  ".join(parts)


def derivative(fp: FieldPoly) -> FieldPoly:
    """Formal Leibniz derivative: bump one factor per summand, re-sort.

    Raises each monomial's weight by one and preserves parity. This is the
    derivative of the associated-graded object; exact translation (with Wick
    reordering corrections) lives in the OPE engine.
    """
    out = FieldPoly()
    for mono, coef in fp.items():
        for k, (m, i) in enumerate(mono):
            bumped = canonicalize(mono[:k] + ((m + 1, i),) + mono[k + 1:])
            out.iadd_term(bumped, coef)
    return out


@dataclass(frozen=True)
class WeightSpaceBasis:
    weight: int
    monomials: Tuple[Monomial, ...]

    def __len__(self):
        return len(self.monomials)

    def index(self, mono: Monomial) -> int:
        return self.monomials.index(mono)


@lru_cache(maxsize=None)
def _monomials(weight: int, cutoff: int) -> Tuple[Monomial, ...]:
    if weight < 0:
        return ()
    if weight == 0:
        return (VACUUM,)

    out = []

    def extend(prefix, remaining, min_i, max_m_for_min):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for i in range(min_i, min(cutoff, remaining) + 1):
            m_hi = remaining - i
            if i == min_i and max_m_for_min is not None:
                m_hi = min(m_hi, max_m_for_min)
            for m in range(m_hi, -1, -1):
                prefix.append((m, i))
                extend(prefix, remaining - i - m, i, m)
                prefix.pop()

    extend([], weight, 2, None)
    return tuple(sorted(out, key=basis_sort_key))


def enumerate_basis(weight: int, cutoff: int, parity: Optional[int] = None) -> WeightSpaceBasis:
    """All PBW monomials of the given weight with generator indices <= cutoff.

    When cutoff >= weight this is the full weight space and its size matches
    the graded character. An optional parity restricts to one Z2-eigenspace.
    """
    monos = _monomials(weight, cutoff)
    if parity is not None:
        monos = tuple(m for m in monos if mono_parity(m) == parity)
    return WeightSpaceBasis(weight, monos)


def series_ranks(w_max: int) -> list:
    """Coefficients of prod_{m>=2} (1-q^m)^(-(m-1)) through q^w_max."""
    a = [0] * (w_max + 1)
    a[0] = 1
    for m in range(2, w_max + 1):
        for _ in range(m - 1):
            for i in range(m, w_max + 1):
                a[i] += a[i - m]
    return a


def character(w_max: int) -> list:
    """Rank of each weight space, 0..w_max, computed two ways and cross-checked."""
    series = series_ranks(w_max)
    counted = [len(_monomials(n, max(n, 2))) for n in range(w_max + 1)]
    if series != counted:
        raise FieldError(
            f"weight-space enumeration disagrees with the character series: "
            f"{counted} vs {series}")
    return series


@lru_cache(maxsize=None)
def parity_dim(weight: int, parity: int, cutoff: int) -> int:
    return sum(1 for m in _monomials(weight, cutoff) if mono_parity(m) == parity)
