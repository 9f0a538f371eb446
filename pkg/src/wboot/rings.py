"""Exact multivariate polynomial and rational-function arithmetic over Q.

Everything downstream (OPE coefficients, Gram matrices, curve ideals) is
built on two types:

* ParamPoly -- a sparse polynomial in named parameters (default ("c", "λ"))
  with Fraction coefficients, kept in canonical form: no zero terms, graded
  lexicographic term order on the declared parameter tuple.
* ParamRat -- a reduced fraction of two ParamPolys with a normalized
  denominator (integer content 1, positive leading coefficient).

No floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

DEFAULT_PARAMS = ("c", "λ")

Scalar = Union[int, Fraction]


class RingError(ValueError):
    pass


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise RingError(f"not an exact scalar: {x!r}")


def _grlex_key(expt: tuple) -> tuple:
    return (sum(expt), expt)


class ParamPoly:
    """Polynomial over Q in an ordered tuple of named parameters."""

    __slots__ = ("params", "terms")

    def __init__(self, params: Sequence[str] = DEFAULT_PARAMS,
                 terms: Optional[Mapping[tuple, Scalar]] = None):
        self.params = tuple(params)
        clean = {}
        if terms:
            n = len(self.params)
            for e, c in terms.items():
                c = _as_fraction(c)
                if c == 0:
                    continue
                e = tuple(e)
                if len(e) != n or any(x < 0 for x in e):
                    raise RingError(f"bad exponent vector {e} for params {self.params}")
                clean[e] = clean.get(e, Fraction(0)) + c
                if clean[e] == 0:
                    del clean[e]
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, params=DEFAULT_PARAMS) -> "ParamPoly":
        return cls(params, {})

    @classmethod
    def const(cls, value: Scalar, params=DEFAULT_PARAMS) -> "ParamPoly":
        value = _as_fraction(value)
        if value == 0:
            return cls(params, {})
        return cls(params, {(0,) * len(tuple(params)): value})

    @classmethod
    def var(cls, name: str, params=DEFAULT_PARAMS) -> "ParamPoly":
        params = tuple(params)
        if name not in params:
            raise RingError(f"parameter {name!r} not among {params}")
        e = [0] * len(params)
        e[params.index(name)] = 1
        return cls(params, {tuple(e): Fraction(1)})

    def with_params(self, params: Sequence[str]) -> "ParamPoly":
        """Embed into a ring with a superset of the parameters."""
        params = tuple(params)
        if params == self.params:
            return self
        idx = []
        for p in self.params:
            if p not in params:
                raise RingError(f"cannot drop parameter {p!r}")
            idx.append(params.index(p))
        terms = {}
        for e, c in self.terms.items():
            ne = [0] * len(params)
            for i, x in enumerate(e):
                ne[idx[i]] = x
            terms[tuple(ne)] = c
        return ParamPoly(params, terms)

    # -- basic structure ---------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise RingError(f"not a constant: {self}")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, var: str) -> int:
        i = self._vindex(var)
        return max((e[i] for e in self.terms), default=-1)

    def _vindex(self, var: str) -> int:
        try:
            return self.params.index(var)
        except ValueError:
            raise RingError(f"parameter {var!r} not among {self.params}") from None

    def sorted_terms(self):
        """Terms in canonical (descending graded-lex) order."""
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def leading(self) -> tuple:
        """(exponent, coefficient) of the canonical leading term."""
        if not self.terms:
            raise RingError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ParamPoly.const(other, self.params)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        return self.params == other.params and self.terms == other.terms

    def __hash__(self):
        return hash((self.params, frozenset(self.terms.items())))

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "ParamPoly":
        if isinstance(other, ParamPoly):
            if other.params != self.params:
                raise RingError(f"parameter mismatch: {self.params} vs {other.params}")
            return other
        return ParamPoly.const(_as_fraction(other), self.params)

    def __add__(self, other) -> "ParamPoly":
        if not isinstance(other, (int, Fraction, ParamPoly)):
            return NotImplemented
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e)
            if s is None:
                terms[e] = c
            else:
                s = s + c
                if s:
                    terms[e] = s
                else:
                    del terms[e]
        out = ParamPoly.__new__(ParamPoly)
        out.params = self.params
        out.terms = terms
        return out

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        out = ParamPoly.__new__(ParamPoly)
        out.params = self.params
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other) -> "ParamPoly":
        if not isinstance(other, (int, Fraction, ParamPoly)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ParamPoly":
        return (-self) + self._coerce(other)

    def __mul__(self, other) -> "ParamPoly":
        if not isinstance(other, (int, Fraction, ParamPoly)):
            return NotImplemented
        if isinstance(other, (int, Fraction)):
            c0 = _as_fraction(other)
            if c0 == 0:
                return ParamPoly.zero(self.params)
            out = ParamPoly.__new__(ParamPoly)
            out.params = self.params
            out.terms = {e: c * c0 for e, c in self.terms.items()}
            return out
        other = self._coerce(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e)
                if s is None:
                    terms[e] = c1 * c2
                else:
                    s = s + c1 * c2
                    if s:
                        terms[e] = s
                    else:
                        del terms[e]
        out = ParamPoly.__new__(ParamPoly)
        out.params = self.params
        out.terms = terms
        return out

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ParamPoly":
        if not isinstance(n, int) or n < 0:
            raise RingError("exponent must be a non-negative integer")
        out = ParamPoly.const(1, self.params)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c0 = _as_fraction(other)
            if c0 == 0:
                raise ZeroDivisionError("division by zero scalar")
            return self * (Fraction(1) / c0)
        return ParamRat(self, self._coerce(other))

    # -- division / divisibility -------------------------------------------

    def divides(self, q: "ParamPoly"):
        """Return (True, q/self) if self exactly divides q, else (False, None)."""
        if not self:
            raise RingError("zero divisor in divides()")
        q = self._coerce(q)
        if not q:
            return True, ParamPoly.zero(self.params)
        le, lc = self.leading()
        rem = q
        quot_terms = {}
        while rem:
            re, rc = rem.leading()
            de = tuple(a - b for a, b in zip(re, le))
            if any(x < 0 for x in de):
                return False, None
            f = rc / lc
            quot_terms[de] = quot_terms.get(de, Fraction(0)) + f
            rem = rem - self * ParamPoly(self.params, {de: f})
        return True, ParamPoly(self.params, quot_terms)

    def exact_div(self, other: "ParamPoly") -> "ParamPoly":
        ok, r = self._coerce(other).divides(self)
        if not ok:
            raise RingError("inexact polynomial division")
        return r

    # -- evaluation / substitution ------------------------------------------

    def eval(self, assignment: Mapping[str, Scalar]) -> Fraction:
        vals = []
        for p in self.params:
            if p not in assignment:
                raise RingError(f"missing assignment for parameter {p!r}")
            vals.append(_as_fraction(assignment[p]))
        total = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for v, x in zip(vals, e):
                if x:
                    t *= v ** x
            total += t
        return total

    def eval_partial(self, assignment: Mapping[str, Scalar]) -> "ParamPoly":
        """Substitute rationals for a subset of the parameters."""
        keep = [p for p in self.params if p not in assignment]
        out = ParamPoly.zero(tuple(keep))
        kidx = [self.params.index(p) for p in keep]
        for e, c in self.terms.items():
            t = c
            for p, x in zip(self.params, e):
                if p in assignment and x:
                    t *= _as_fraction(assignment[p]) ** x
            ne = tuple(e[i] for i in kidx)
            out = out + ParamPoly(tuple(keep), {ne: t})
        return out

    def subst(self, assignment: Mapping[str, "ParamRat"]) -> "ParamRat":
        """Substitute a ParamRat for every parameter (rational parametrization)."""
        target = None
        for p in self.params:
            if p not in assignment:
                raise RingError(f"missing substitution for parameter {p!r}")
            r = assignment[p]
            if target is None:
                target = r.num.params
            elif r.num.params != target:
                raise RingError("substitution values live in different rings")
        if target is None:
            target = ()
        one = ParamRat.const(1, target)
        out = ParamRat.const(0, target)
        powcache = {}
        for e, c in self.terms.items():
            t = one * Fraction(c)
            for p, x in zip(self.params, e):
                if x:
                    key = (p, x)
                    if key not in powcache:
                        powcache[key] = assignment[p] ** x
                    t = t * powcache[key]
            out = out + t
        return out

    # -- normalization helpers ----------------------------------------------

    def rational_content(self) -> Fraction:
        """Positive rational r with self/r integer-primitive; sign of leading term kept aside."""
        if not self.terms:
            return Fraction(1)
        from math import gcd
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, abs(c.numerator))
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def primitive_normalized(self) -> "ParamPoly":
        """Integer content 1 and positive canonical leading coefficient."""
        if not self.terms:
            return self
        r = self.rational_content()
        _, lc = self.leading()
        if lc < 0:
            r = -r
        return self * (Fraction(1) / r)

    # -- text form ------------------------------------------------------------

    def to_text(self) -> str:
        """Canonical form: `+`-joined `num/den * p^a * q^b` terms, graded-lex descending."""
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = [str(c.numerator) if c.denominator == 1
                       else f"{c.numerator}/{c.denominator}"]
            for p, x in zip(self.params, e):
                if x == 1:
                    factors.append(p)
                elif x > 1:
                    factors.append(f"{p}^{x}")
            parts.append(" * ".join(factors))
        return " + ".join(parts)

    @classmethod
    def from_text(cls, text: str, params=DEFAULT_PARAMS) -> "ParamPoly":
        params = tuple(params)
        text = text.strip()
        if text == "0":
            return cls.zero(params)
        terms = {}
        for part in text.split(" + "):
            factors = [f.strip() for f in part.split(" * ")]
            head = factors[0]
            if "/" in head:
                a, b = head.split("/")
                c = Fraction(int(a), int(b))
            else:
                c = Fraction(int(head))
            e = [0] * len(params)
            for f in factors[1:]:
                if "^" in f:
                    name, x = f.split("^")
                    x = int(x)
                else:
                    name, x = f, 1
                if name not in params:
                    raise RingError(f"unknown parameter {name!r} in {text!r}")
                e[params.index(name)] += x
            terms[tuple(e)] = terms.get(tuple(e), Fraction(0)) + c
        return cls(params, terms)

    def __repr__(self):
        return f"ParamPoly({self.to_text()!r})"

    def __str__(self):
        return self.to_text()


# -- univariate views ---------------------------------------------------------


def _as_univariate(p: ParamPoly, var: str) -> dict:
    """Map degree-in-var -> ParamPoly coefficient (with var exponent zeroed)."""
    i = p._vindex(var)
    out: dict = {}
    for e, c in p.terms.items():
        d = e[i]
        ne = list(e)
        ne[i] = 0
        coef = out.setdefault(d, {})
        ne = tuple(ne)
        coef[ne] = coef.get(ne, Fraction(0)) + c
    return {d: ParamPoly(p.params, t) for d, t in out.items() if any(t.values())}


def _from_univariate(coeffs: Mapping[int, ParamPoly], var: str, params) -> ParamPoly:
    i = tuple(params).index(var)
    terms = {}
    for d, poly in coeffs.items():
        for e, c in poly.terms.items():
            ne = list(e)
            ne[i] += d
            terms[tuple(ne)] = terms.get(tuple(ne), Fraction(0)) + c
    return ParamPoly(params, terms)


def _uni_mul_xk(p: ParamPoly, var: str, k: int) -> ParamPoly:
    i = p._vindex(var)
    terms = {}
    for e, c in p.terms.items():
        ne = list(e)
        ne[i] += k
        terms[tuple(ne)] = c
    return ParamPoly(p.params, terms)


def _pseudo_rem(a: ParamPoly, b: ParamPoly, var: str) -> ParamPoly:
    """Pseudo-remainder of a by b with respect to var."""
    da, db = a.degree(var), b.degree(var)
    if db < 0:
        raise RingError("pseudo-division by zero")
    if da < db:
        return a
    bu = _as_univariate(b, var)
    lb = bu[db]
    r = a
    while r and r.degree(var) >= db:
        dr = r.degree(var)
        ru = _as_univariate(r, var)
        lr = ru[dr]
        r = r * lb - _uni_mul_xk(lr * b, var, dr - db)
    return r


def poly_gcd(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    """Primitive, sign-normalized gcd via subresultant-style PRS with content extraction."""
    if a.params != b.params:
        raise RingError("parameter mismatch in gcd")
    if not a:
        return b.primitive_normalized()
    if not b:
        return a.primitive_normalized()
    var = None
    for p in a.params:
        if a.degree(p) > 0 or b.degree(p) > 0:
            var = p
            break
    if var is None:
        return ParamPoly.const(1, a.params)

    def content(p: ParamPoly) -> ParamPoly:
        cs = list(_as_univariate(p, var).values())
        g = cs[0]
        for c in cs[1:]:
            g = poly_gcd(g, c)
        return g

    ca, cb = content(a), content(b)
    g_cont = poly_gcd(ca, cb)
    pa = a.exact_div(ca)
    pb = b.exact_div(cb)
    if pa.degree(var) < pb.degree(var):
        pa, pb = pb, pa
    while pb:
        r = _pseudo_rem(pa, pb, var)
        pa, pb = pb, r
        if pb:
            pb = pb.exact_div(content(pb))
    return (g_cont * pa.exact_div(content(pa))).primitive_normalized()


def _bareiss_det(m: list) -> ParamPoly:
    """Fraction-free determinant of a square matrix of ParamPolys."""
    n = len(m)
    if n == 0:
        raise RingError("empty matrix")
    params = m[0][0].params
    m = [row[:] for row in m]
    sign = 1
    prev = ParamPoly.const(1, params)
    for k in range(n - 1):
        if not m[k][k]:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return ParamPoly.zero(params)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = num.exact_div(prev)
            m[i][k] = ParamPoly.zero(params)
        prev = m[k][k]
    return m[n - 1][n - 1] * sign


def resultant(a: ParamPoly, b: ParamPoly, var: str) -> ParamPoly:
    """Sylvester resultant eliminating var."""
    if a.params != b.params:
        raise RingError("parameter mismatch in resultant")
    if not a or not b:
        raise RingError("resultant of a zero polynomial")
    da, db = a.degree(var), b.degree(var)
    params = a.params
    if da <= 0 and db <= 0:
        return ParamPoly.const(1, params)
    if da <= 0:
        return a ** db
    if db <= 0:
        return b ** da
    au, bu = _as_univariate(a, var), _as_univariate(b, var)
    zero = ParamPoly.zero(params)
    size = da + db
    rows = []
    for i in range(db):
        row = [zero] * size
        for d, cf in au.items():
            row[i + (da - d)] = cf
        rows.append(row)
    for i in range(da):
        row = [zero] * size
        for d, cf in bu.items():
            row[i + (db - d)] = cf
        rows.append(row)
    return _bareiss_det(rows)


def rational_roots(p: ParamPoly, var: str):
    """All rational roots (with multiplicity) of a univariate-in-var polynomial.

    Returns (roots, residual) where roots is a list of (Fraction, multiplicity)
    and residual is the rootless cofactor (constant if fully split).
    """
    for q in p.params:
        if q != var and p.degree(q) > 0:
            raise RingError(f"rational_roots: {q!r} still present")
    if not p:
        raise RingError("rational_roots of zero polynomial")
    work = p.primitive_normalized()
    roots = []
    # strip roots at 0
    u = _as_univariate(work, var)
    low = min(u) if u else 0
    if low > 0:
        roots.append((Fraction(0), low))
        work = _uni_mul_xk(work, var, -low)
        u = _as_univariate(work, var)
    deg = work.degree(var)
    if deg <= 0:
        return roots, work
    a0 = u.get(0, ParamPoly.zero(p.params)).constant_value()
    an = u[deg].constant_value()

    def divisors(n: int):
        n = abs(n)
        out = set()
        d = 1
        while d * d <= n:
            if n % d == 0:
                out.add(d)
                out.add(n // d)
            d += 1
        return sorted(out)

    cands = set()
    for r in divisors(a0.numerator if a0 else 1):
        for s in divisors(an.numerator):
            cands.add(Fraction(r, s))
            cands.add(Fraction(-r, s))
    lin = {}
    for cand in sorted(cands):
        while work.degree(var) > 0 and work.eval({var: cand}) == 0:
            factor = ParamPoly.var(var, p.params) - ParamPoly.const(cand, p.params)
            work = work.exact_div(factor)
            lin[cand] = lin.get(cand, 0) + 1
    roots.extend(sorted(lin.items()))
    return roots, work.primitive_normalized() if work.degree(var) > 0 else work


class ParamRat:
    """Reduced fraction of ParamPolys.

    Invariants: den nonzero, gcd(num, den) a unit, den integer-primitive with
    positive canonical leading coefficient.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: ParamPoly, den: Optional[ParamPoly] = None):
        if den is None:
            den = ParamPoly.const(1, num.params)
        if num.params != den.params:
            raise RingError("parameter mismatch in ParamRat")
        if not den:
            raise RingError("zero denominator")
        if num:
            g = poly_gcd(num, den)
            if g.total_degree() > 0:
                num = num.exact_div(g)
                den = den.exact_div(g)
            r = den.rational_content()
            _, lc = den.leading()
            if lc < 0:
                r = -r
            scale = Fraction(1) / r
            num = num * scale
            den = den * scale
        else:
            den = ParamPoly.const(1, num.params)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, value: Scalar, params=DEFAULT_PARAMS) -> "ParamRat":
        return cls(ParamPoly.const(value, params))

    @classmethod
    def from_poly(cls, p: ParamPoly) -> "ParamRat":
        return cls(p)

    def __bool__(self):
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> ParamPoly:
        if not self.is_polynomial():
            raise RingError(f"not polynomial: {self}")
        return self.num * (Fraction(1) / self.den.constant_value())

    def _coerce(self, other) -> "ParamRat":
        if isinstance(other, ParamRat):
            if other.num.params != self.num.params:
                raise RingError("parameter mismatch")
            return other
        if isinstance(other, ParamPoly):
            return ParamRat(self.num._coerce(other))
        return ParamRat.const(_as_fraction(other), self.num.params)

    def __add__(self, other):
        if not isinstance(other, (int, Fraction, ParamPoly, ParamRat)):
            return NotImplemented
        other = self._coerce(other)
        return ParamRat(self.num * other.den + other.num * self.den,
                        self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        out = ParamRat.__new__(ParamRat)
        out.num = -self.num
        out.den = self.den
        return out

    def __sub__(self, other):
        if not isinstance(other, (int, Fraction, ParamPoly, ParamRat)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + self._coerce(other)

    def __mul__(self, other):
        if not isinstance(other, (int, Fraction, ParamPoly, ParamRat)):
            return NotImplemented
        if isinstance(other, (int, Fraction)):
            return ParamRat(self.num * _as_fraction(other), self.den)
        other = self._coerce(other)
        return ParamRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if not other.num:
            raise ZeroDivisionError("division by zero rational function")
        return ParamRat(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            if not self.num:
                raise ZeroDivisionError("inverse of zero")
            return ParamRat(self.den, self.num) ** (-n)
        return ParamRat(self.num ** n, self.den ** n)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = self._coerce(other)
        if not isinstance(other, ParamRat):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def eval(self, assignment: Mapping[str, Scalar]) -> Fraction:
        d = self.den.eval(assignment)
        if d == 0:
            raise RingError("evaluation at a pole")
        return self.num.eval(assignment) / d

    def subst(self, assignment: Mapping[str, "ParamRat"]) -> "ParamRat":
        den = self.den.subst(assignment)
        if not den:
            raise RingError("denominator vanishes identically after substitution")
        return self.num.subst(assignment) / den

    def to_text(self) -> str:
        if self.den == ParamPoly.const(1, self.num.params):
            return self.num.to_text()
        return f"({self.num.to_text()}) / ({self.den.to_text()})"

    def __repr__(self):
        return f"ParamRat({self.to_text()!r})"

    def __str__(self):
        return self.to_text()


def poly(text: str, params=DEFAULT_PARAMS) -> ParamPoly:
    """Shorthand parser for canonical polynomial text."""
    return ParamPoly.from_text(text, params)
