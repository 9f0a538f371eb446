"""The OPE engine: n-th products of normally ordered polynomials.

Everything reduces to generator-generator products stored in an OPETable,
via five identities that hold in any vertex algebra:

* derivative rule        (d^m a)_(n) = (-1)^m n(n-1)...(n-m+1) a_(n-m)
* skew-symmetry          a_(n)b = sum_i (-1)^(n+i+1)/i! T^i (b_(n+i)a)
* noncommutative Wick    a_(n):bc: = :(a_(n)b)c: + :b(a_(n)c):
                                   + sum_{i=1..n} C(n,i) (a_(n-i)b)_(i-1) c
* the iterate formula    (:bc:)_(n)a = sum_i b_(-1-i)(c_(n+i)a) + c_(n-1-i)(b_(i)a)
* quasi-commutativity    [a_(-1), b_(-1)] = sum_i (-1)^i (a_(i)b)_(-2-i)

with a_(-1-i)b = :(d^i a / i!) b:. All products land back in the PBW basis.
The engine memoizes monomial-level products; tables are immutable once
complete and the memo behaves as a single logical map (idempotent inserts),
so concurrent readers are safe.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial
from typing import Dict, Iterable, Optional, Tuple

from .fields import (FieldPoly, Monomial, VACUUM, canonicalize, factor_key,
                     mono_parity, mono_weight, parity_dim)

Key = Tuple[int, int, int]      # (i, j, k): W^i_(k) W^j with i <= j, k >= 0


class BudgetError(LookupError):
    """A product needs an OPE entry outside the table's coverage."""

    def __init__(self, i: int, j: int, k: int):
        super().__init__(f"OPE entry W{i}_({k})W{j} not covered by this table")
        self.key = (i, j, k)


def entry_cutoff(i: int, j: int, k: int) -> int:
    """Highest generator index that may appear in W^i_(k)W^j."""
    return i + j - 2 if k <= 1 else i + j - 4


def entry_weight(i: int, j: int, k: int) -> int:
    return i + j - k - 1


def entry_parity(i: int, j: int) -> int:
    return -1 if (i + j) % 2 else 1


class _ProductCore:
    """Shared product recursion; subclasses provide `lookup` and `_memo`."""

    _memo: dict

    def lookup(self, i: int, j: int, k: int) -> FieldPoly:
        raise NotImplementedError

    def _delegate(self, wsum: int, single_single: bool) -> Optional["_ProductCore"]:
        """A core to which products with total weight `wsum` may be routed.

        Composite products only consult generator pairs of level <= wsum - 2
        (the entry cutoff invariant), so a view over one new level can route
        them to its base whenever wsum <= level + 1; bare generator-generator
        products touch level wsum itself and stay local from wsum = level on.
        """
        return None

    # -- structure constants ------------------------------------------------

    def entry(self, i: int, j: int, k: int) -> FieldPoly:
        """W^i_(k)W^j for i <= j, k >= 0, with parity/weight auto-zeros."""
        w = entry_weight(i, j, k)
        if w < 0:
            return FieldPoly()
        cut = min(entry_cutoff(i, j, k), w)
        if parity_dim(w, entry_parity(i, j), max(cut, 0)) == 0:
            return FieldPoly()
        return self.lookup(i, j, k)

    def pair(self, g: int, h: int, n: int) -> FieldPoly:
        """W^g_(n)W^h for any orientation and any n >= 0."""
        if g <= h:
            return self.entry(g, h, n)
        # skew-symmetry flip onto the stored orientation
        out = FieldPoly()
        top = g + h - 1
        for i in range(0, top - n + 1):
            val = self.entry(h, g, n + i)
            if not val:
                continue
            sign = -1 if (n + i + 1) % 2 else 1
            out.iadd(self.texact_pow(val, i), Fraction(sign, factorial(i)))
        return out

    # -- exact translation ---------------------------------------------------

    def texact_mono(self, mono: Monomial) -> FieldPoly:
        other = self._delegate(mono_weight(mono), True)
        if other is not None:
            return other.texact_mono(mono)
        memo = self._memo
        key = ("t", mono)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = FieldPoly()
        for k, (m, i) in enumerate(mono):
            word = mono[:k] + ((m + 1, i),) + mono[k + 1:]
            out.iadd(self.normal_order_word(word))
        memo[key] = out
        return out

    def texact(self, fp: FieldPoly) -> FieldPoly:
        out = FieldPoly()
        for mono, coef in fp.items():
            out.iadd(self.texact_mono(mono), coef)
        return out

    def texact_pow(self, fp: FieldPoly, k: int) -> FieldPoly:
        for _ in range(k):
            fp = self.texact(fp)
        return fp

    # -- normal ordering -------------------------------------------------------

    def wick_insert(self, f, mono: Monomial) -> FieldPoly:
        """Normally ordered :f mono: for a single factor f, in the PBW basis."""
        if not mono:
            return FieldPoly.term((f,), 1)
        if factor_key(f) <= factor_key(mono[0]):
            return FieldPoly.term((f,) + mono, 1)
        other = self._delegate(f[1] + mono_weight(mono), True)
        if other is not None:
            return other.wick_insert(f, mono)
        memo = self._memo
        key = ("w", f, mono)
        hit = memo.get(key)
        if hit is not None:
            return hit
        head, tail = mono[0], mono[1:]
        out = FieldPoly()
        for m2, coef in self.wick_insert(f, tail).items():
            out.iadd(self.wick_insert(head, m2), coef)
        # [f_(-1), head_(-1)] tail = sum_i (-1)^i/(i+1)! (d^{i+1}(f_(i) head))_(-1) tail
        mf, gf = f
        mh, gh = head
        for i in range(0, gf + mf + gh + mh):
            ci = self.prod_mono((f,), (head,), i)
            if not ci:
                continue
            scale = Fraction((-1) ** i, factorial(i + 1))
            shifted = self.texact_pow(ci, i + 1)
            for u, cu in shifted.items():
                out.iadd(self.prod_mono(u, tail, -1), cu * scale)
        memo[key] = out
        return out

    def normal_order_word(self, word: Tuple) -> FieldPoly:
        """Rewrite an arbitrary factor word (right-nested Wick product) into PBW form."""
        out = FieldPoly.term(VACUUM, 1)
        for f in reversed(word):
            nxt = FieldPoly()
            for mono, coef in out.items():
                nxt.iadd(self.wick_insert(f, mono), coef)
            out = nxt
        return out

    def wick(self, left: FieldPoly, right: FieldPoly) -> FieldPoly:
        """Normally ordered product :left right: of two field polynomials."""
        out = FieldPoly()
        for u, cu in left.items():
            for v, cv in right.items():
                out.iadd(self.prod_mono(u, v, -1), cu * cv)
        return out

    # -- the master product ------------------------------------------------------

    def prod_mono(self, x: Monomial, y: Monomial, n: int) -> FieldPoly:
        """Exact x_(n) y for PBW monomials, in the PBW basis."""
        if not x:
            return FieldPoly.term(y, 1) if n == -1 else FieldPoly()
        other = self._delegate(mono_weight(x) + mono_weight(y),
                               len(x) == 1 and len(y) == 1)
        if other is not None:
            return other.prod_mono(x, y, n)
        memo = self._memo
        key = (x, y, n)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = self._prod_mono_uncached(x, y, n)
        memo[key] = out
        return out

    def _prod_mono_uncached(self, x: Monomial, y: Monomial, n: int) -> FieldPoly:
        if n >= 0 and mono_weight(x) + mono_weight(y) - n - 1 < 0:
            return FieldPoly()
        if len(x) == 1:
            m, g = x[0]
            if m > 0:
                c = 1
                for t in range(m):
                    c *= (n - t)
                if c == 0:
                    return FieldPoly()
                if m % 2:
                    c = -c
                return self.prod_mono(((0, g),), y, n - m).scaled(Fraction(c))
            if n <= -1:
                k = -n - 1
                out = FieldPoly()
                for mono, coef in self._insert_factor((k, g), y).items():
                    out.iadd_term(mono, coef)
                return out.scaled(Fraction(1, factorial(k))) if k else out
            # n >= 0, x a bare generator
            if not y:
                return FieldPoly()
            if len(y) == 1:
                m2, h = y[0]
                if m2 == 0:
                    return self.pair(g, h, n)
                b = ((m2 - 1, h),)
                out = self.texact(self.prod_mono(x, b, n))
                if n:
                    out.iadd(self.prod_mono(x, b, n - 1), Fraction(n))
                return out
            # noncommutative Wick formula, peeling y's head
            b, c = y[0], y[1:]
            gb = self.prod_mono(x, (b,), n)
            out = FieldPoly()
            for u, cu in gb.items():
                out.iadd(self.prod_mono(u, c, -1), cu)
            gc = self.prod_mono(x, c, n)
            for u, cu in gc.items():
                out.iadd(self.wick_insert(b, u), cu)
            for i in range(1, n + 1):
                left = self.prod_mono(x, (b,), n - i)
                if not left:
                    continue
                bc = comb(n, i)
                for u, cu in left.items():
                    out.iadd(self.prod_mono(u, c, i - 1), cu * bc)
            return out
        # x composite: iterate formula on its head
        b, cx = x[0], x[1:]
        mb, gb = b
        wcx, wy = mono_weight(cx), mono_weight(y)
        out = FieldPoly()
        for i in range(0, wcx + wy - n):
            inner = self.prod_mono(cx, y, n + i)
            if not inner:
                continue
            scale = Fraction(1, factorial(i))
            for u, cu in inner.items():
                out.iadd(self.wick_insert((mb + i, gb), u), cu * scale)
        for i in range(0, gb + mb + wy):
            inner = self.prod_mono((b,), y, i)
            if not inner:
                continue
            for u, cu in inner.items():
                out.iadd(self.prod_mono(cx, u, n - 1 - i), cu)
        return out

    def _insert_factor(self, f, y: Monomial) -> FieldPoly:
        return self.wick_insert(f, y)

    # -- public operations ----------------------------------------------------

    def nth(self, a: FieldPoly, b: FieldPoly, n: int) -> FieldPoly:
        out = FieldPoly()
        for u, cu in a.items():
            for v, cv in b.items():
                out.iadd(self.prod_mono(u, v, n), cu * cv)
        return out

    def gen(self, i: int) -> FieldPoly:
        return FieldPoly.term(((0, i),), 1)

    def jacobi_residual(self, a: int, b: int, c: int, r: int, s: int) -> FieldPoly:
        """a_(r)(b_(s)c) - b_(s)(a_(r)c) - sum_i C(r,i) (a_(i)b)_(r+s-i) c, generators."""
        am, bm, cm = ((0, a),), ((0, b),), ((0, c),)
        out = FieldPoly()
        for u, cu in self.prod_mono(bm, cm, s).items():
            out.iadd(self.prod_mono(am, u, r), cu)
        for u, cu in self.prod_mono(am, cm, r).items():
            out.iadd(self.prod_mono(bm, u, s), -cu)
        for i in range(0, r + 1):
            left = self.prod_mono(am, bm, i)
            if not left:
                continue
            bc = -comb(r, i)
            for u, cu in left.items():
                out.iadd(self.prod_mono(u, cm, r + s - i), cu * bc)
        return out


class OPETable(_ProductCore):
    """All products W^i_(k)W^j (i <= j, k >= 0) up to a level budget.

    `max_level` is the highest complete i+j; `caps` optionally limits, per
    level, the stored entries to result weight <= cap (high poles only), which
    is how high-weight Shapovalov computations stay affordable.
    """

    def __init__(self, params=("c", "λ")):
        self.params = tuple(params) if params is not None else None
        self.entries: Dict[Key, FieldPoly] = {}
        self.max_level = 3
        self.caps: Dict[int, int] = {}
        self._memo = {}

    def copy(self) -> "OPETable":
        out = OPETable(self.params)
        out.entries = dict(self.entries)
        out.max_level = self.max_level
        out.caps = dict(self.caps)
        return out

    def level_cap(self, level: int) -> Optional[int]:
        """None = level fully stored; otherwise max stored result weight."""
        if level <= self.max_level:
            return None
        return self.caps.get(level)

    def covers(self, i: int, j: int, k: int) -> bool:
        level = i + j
        if level <= self.max_level:
            return True
        cap = self.caps.get(level)
        return cap is not None and entry_weight(i, j, k) <= cap

    def lookup(self, i: int, j: int, k: int) -> FieldPoly:
        val = self.entries.get((i, j, k))
        if val is not None:
            return val
        if self.covers(i, j, k):
            return FieldPoly()
        raise BudgetError(i, j, k)

    def set_entry(self, i: int, j: int, k: int, fp: FieldPoly) -> None:
        if not (2 <= i <= j) or k < 0:
            raise ValueError(f"bad entry key {(i, j, k)}")
        w = entry_weight(i, j, k)
        cut = entry_cutoff(i, j, k)
        for mono in fp:
            if mono_weight(mono) != w:
                raise ValueError(f"entry {(i, j, k)}: wrong weight term {mono}")
            if mono_parity(mono) != entry_parity(i, j):
                raise ValueError(f"entry {(i, j, k)}: wrong parity term {mono}")
            if any(g > cut for _, g in mono):
                raise ValueError(f"entry {(i, j, k)}: generator beyond cutoff in {mono}")
        if fp:
            self.entries[(i, j, k)] = fp
        else:
            self.entries.pop((i, j, k), None)

    def generators(self) -> range:
        return range(2, self.max_level - 1)


class TableView(_ProductCore):
    """A table extended by in-progress entries at one new level.

    Lookups below `level` go to the base table (sharing its memo via
    delegation); entries at `level` come from the `pending` dict and raise
    BudgetError when absent, so the bootstrap can skip unusable equations.
    """

    def __init__(self, base: OPETable, level: int, pending: Dict[Key, FieldPoly]):
        self.base = base
        self.level = level
        self.pending = pending
        self._memo = {}

    def _delegate(self, wsum: int, single_single: bool):
        if wsum < self.level:
            return self.base
        if not single_single and wsum <= self.level + 1:
            return self.base
        return None

    def lookup(self, i: int, j: int, k: int) -> FieldPoly:
        if i + j == self.level:
            val = self.pending.get((i, j, k))
            if val is None:
                raise BudgetError(i, j, k)
            return val
        return self.base.lookup(i, j, k)


def nth_product(a: FieldPoly, b: FieldPoly, n: int, table: OPETable) -> FieldPoly:
    """Exact a_(n)b in PBW normal form."""
    return table.nth(a, b, n)


def jacobi_residual(a: int, b: int, c: int, r: int, s: int, table: OPETable) -> FieldPoly:
    return table.jacobi_residual(a, b, c, r, s)


def positive_modes_annihilate(v: FieldPoly, table: OPETable,
                              max_generator: Optional[int] = None):
    """Check W^i_(m)v = 0 for all generators i and positive modes m >= i.

    Returns (ok, certificate). The certificate records the range of
    generators actually certified; if the table budget cut the check short of
    the requested range, `complete` is False rather than silently true.
    """
    w = v.weight()
    if w is None:
        return True, {"checked_to": None, "complete": True, "failures": []}
    requested = max_generator
    hard_stop = max(table.max_level, max(table.caps, default=0)) + 1
    failures = []
    checked = 1
    i = 2
    while i <= (requested if requested is not None else hard_stop):
        try:
            for m in range(i, i + w):
                r = table.nth(table.gen(i), v, m)
                if r:
                    failures.append((i, m, r))
        except BudgetError:
            break
        checked = i
        i += 1
    complete = requested is None or checked >= requested
    return (not failures) and complete, {
        "checked_to": checked,
        "complete": complete,
        "failures": failures,
    }
