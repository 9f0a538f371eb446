"""Registry of truncation-curve ideals with rational parametrizations.

Each entry carries the curve generator in Q[c,λ] (when known), a rational
parametrization k -> (c(k), λ(k)) (when known), the epistemic status, and the
weight at which the curve first meets the Shapovalov spectrum. Intersections
of two curves are computed exactly over Q by resultants; irrational
intersection content is reported as residual factors, never approximated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .rings import (DEFAULT_PARAMS, ParamPoly, ParamRat, RingError, poly_gcd,
                    rational_roots, resultant)

KPARAMS = ("k",)


class AtlasError(ValueError):
    pass


@dataclass
class CurveIdeal:
    name: str
    family_param: Optional[int]
    generator: Optional[ParamPoly]
    parametrization: Optional[Tuple[ParamRat, ParamRat]]
    status: str                      # "proved" | "conjectural"
    source: str                      # which one-parameter algebra this curve carries
    level: Optional[int]             # weight where it first divides det_n

    def label(self) -> str:
        if self.family_param is None:
            return self.name
        return f"{self.name}({self.family_param})"


@dataclass
class IntersectionReport:
    rational_points: List[Tuple[Tuple[Fraction, Fraction], int]]  # ((c, λ), multiplicity)
    residual: List[ParamPoly]

    def points(self) -> List[Tuple[Fraction, Fraction]]:
        return [pt for pt, _ in self.rational_points]

    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.rational_points)


def _kpoly(expr: Callable[[ParamPoly], ParamPoly]) -> ParamPoly:
    return expr(ParamPoly.var("k", KPARAMS))


def _krat(num: Callable[[ParamPoly], ParamPoly],
          den: Callable[[ParamPoly], ParamPoly]) -> ParamRat:
    return ParamRat(_kpoly(num), _kpoly(den))


def _cl() -> Tuple[ParamPoly, ParamPoly]:
    return (ParamPoly.var("c", DEFAULT_PARAMS), ParamPoly.var("λ", DEFAULT_PARAMS))


def _n(x) -> Callable[[ParamPoly], ParamPoly]:
    return lambda k: ParamPoly.const(x, KPARAMS)


def wsln_generator(n: int) -> ParamPoly:
    c, y = _cl()
    un = ParamPoly.const
    P = DEFAULT_PARAMS
    return (y * (n - 2) * (un(3 * n * n - n - 2, P) + c * (n + 2))
            - un((n - 1) * (n + 1), P))


def _wsln_param(n: int) -> Tuple[ParamRat, ParamRat]:
    c = _krat(lambda k: -(ParamPoly.const(n - 1, KPARAMS)
                          * (ParamPoly.const(n * n - n - 1, KPARAMS) + k * n)
                          * (ParamPoly.const(n * n, KPARAMS) + k + k * n)),
              lambda k: k + ParamPoly.const(n, KPARAMS))
    lam = _krat(lambda k: -(k + ParamPoly.const(n, KPARAMS)),
                lambda k: (ParamPoly.const(n - 2, KPARAMS)
                           * (ParamPoly.const(n * n - n - 2, KPARAMS) + k * n)
                           * (ParamPoly.const(n + n * n, KPARAMS) + k * 2 + k * n)))
    return c, lam


def parafermion_generator() -> ParamPoly:
    c, y = _cl()
    return y * 4 * (c + 7) * (c * 2 - 1) + (c - 2) * (c + 4)


def bp_generator() -> ParamPoly:
    c, y = _cl()
    return (48 + c * 8 + y * 240 - c * y * 62 - c * c * y * 5
            + y * y * 300 + c * y * y * 524 + c * c * y * y * 40)


def subreg4_generator() -> ParamPoly:
    c, y = _cl()
    return (320 + c * 40 + y * 1536 - c * y * 804 - c * c * y * 57
            + y * y * 1456 + c * y * y * 1536 + c * c * y * y * 444
            + c * c * c * y * y * 20)


def gpara_generator(n: int) -> ParamPoly:
    c, y = _cl()
    c2, c3, y2 = c * c, c * c * c, y * y
    out = (-3 * c2 * y - 12 * c2 * y2 + 12 * c3 * y2
           + (-2 * c - 13 * c * y + 10 * c2 * y - 20 * c * y2 + 28 * c2 * y2 - 8 * c3 * y2) * n
           + (ParamPoly.const(4, DEFAULT_PARAMS) - c + 20 * y - 34 * c * y + 8 * c2 * y
              + 25 * y2 - 45 * c * y2 + 99 * c2 * y2 - 7 * c3 * y2) * n ** 2
           + (ParamPoly.const(2, DEFAULT_PARAMS) + 2 * c + y + 18 * c * y - 4 * c2 * y
              - 10 * y2 + 154 * c * y2 - 2 * c2 * y2 + 2 * c3 * y2) * n ** 3
           + (ParamPoly.const(-4, DEFAULT_PARAMS) + c - 59 * y + 37 * c * y - 2 * c2 * y
              - 163 * y2 + 267 * c * y2 - 33 * c2 * y2 + c3 * y2) * n ** 4
           + (ParamPoly.const(-2, DEFAULT_PARAMS) - 31 * y + 10 * c * y - 92 * y2
              + 100 * c * y2 - 8 * c2 * y2) * n ** 5
           + (-3 * y - 12 * y2 + 12 * c * y2) * n ** 6)
    return out


def minw_generator(n: int) -> ParamPoly:
    c, y = _cl()
    c2, y2 = c * c, y * y
    y3 = y2 * y
    one = ParamPoly.const(1, DEFAULT_PARAMS)
    out = (one * 3 + 108 * y - 12 * c * y + 1152 * y2 - 384 * c * y2 + 3072 * y3
           - 3072 * c * y3
           + (one * -4 - 144 * y + 20 * c * y - 1536 * y2 + 592 * c * y2 - 16 * c2 * y2
              - 4096 * y3 + 4352 * c * y3 - 256 * c2 * y3) * n
           + (one * -2 - 28 * y - 2 * c * y + 100 * y2 - 152 * c * y2 + 4 * c2 * y2
              + 576 * y3 - 1920 * c * y3 + 192 * c2 * y3) * n ** 2
           + (one * 4 + 94 * y - 8 * c * y + 548 * y2 - 144 * c * y2 + 4 * c2 * y2
              + 1088 * y3 + 32 * c * y3 + 32 * c2 * y3) * n ** 3
           + (one * -1 - 32 * y + 2 * c * y - 199 * y2 + 80 * c * y2 - c2 * y2
              - 384 * y3 + 144 * c * y3 - 48 * c2 * y3) * n ** 4
           + (2 * y + 4 * y2 - 10 * c * y2 - 16 * y3 + 8 * c * y3 + 8 * c2 * y3) * n ** 5
           + (3 * y2 + 12 * y3 - 12 * c * y3) * n ** 6)
    return out


def winf_generator() -> ParamPoly:
    c, y = _cl()
    return y * 4 * (c - 1) - 1


def wslminus2_generator() -> ParamPoly:
    _, y = _cl()
    return y * 16 + 1


def winfneg_generator(n: int) -> ParamPoly:
    c, y = _cl()
    un = ParamPoly.const
    P = DEFAULT_PARAMS
    return (y * (n + 2) * (un(3 * n * n + n - 2, P) + c * (2 - n))
            - un((1 + n) * (1 - n), P))


@dataclass
class AtlasFamily:
    name: str
    needs_n: bool
    n_min: int
    status: str
    source: str
    build: Callable[[Optional[int]], CurveIdeal]

    def instantiate(self, n: Optional[int] = None) -> CurveIdeal:
        if self.needs_n:
            if n is None or n < self.n_min:
                raise AtlasError(f"{self.name} needs a family index n >= {self.n_min}")
        elif n is not None:
            raise AtlasError(f"{self.name} is not an n-family")
        return self.build(n)


def _build_registry() -> Dict[str, AtlasFamily]:
    fams: Dict[str, AtlasFamily] = {}

    def add(name, needs_n, n_min, status, source, build):
        fams[name] = AtlasFamily(name, needs_n, n_min, status, source, build)

    add("wsln", True, 3, "proved", "principal W-algebra of sl_n",
        lambda n: CurveIdeal("wsln", n, wsln_generator(n), _wsln_param(n),
                             "proved", "principal W-algebra of sl_n", n + 1))

    add("parafermion", False, 0, "proved", "sl_2 parafermion coset",
        lambda n: CurveIdeal(
            "parafermion", None, parafermion_generator(),
            (_krat(lambda k: (k - 1) * 2, lambda k: k + 2),
             _krat(lambda k: k + 1,
                   lambda k: (k - 2) * (k * 3 + 4))),
            "proved", "sl_2 parafermion coset", 6))

    add("bp", False, 0, "proved", "Bershadsky-Polyakov Heisenberg coset",
        lambda n: CurveIdeal(
            "bp", None, bp_generator(),
            (_krat(lambda k: -3 * (k * 2 - 1) ** 2, lambda k: k * 2 + 3),
             _krat(lambda k: (k * 2 + 1) * (k * 2 + 3),
                   lambda k: (k - 1) * (k * 4 + 3) * 8)),
            "proved", "Bershadsky-Polyakov Heisenberg coset", 8))

    add("subreg4", False, 0, "proved", "subregular sl_4 Heisenberg coset",
        lambda n: CurveIdeal(
            "subreg4", None, subreg4_generator(),
            (_krat(lambda k: -4 * (k * 2 + 5) * (k * 3 + 7), lambda k: k + 4),
             _krat(lambda k: -((k + 3) * (k + 4)),
                   lambda k: (k + 2) ** 2 * (k * 5 + 16) * 3)),
            "proved", "subregular sl_4 Heisenberg coset", 10))

    add("gpara", True, 2, "proved", "generalized parafermions gl_n in sl_{n+1}",
        lambda n: CurveIdeal(
            "gpara", n, gpara_generator(n),
            (_krat(lambda k: (k - 1) * (ParamPoly.const(1 + n, KPARAMS) + k * 2) * n,
                   lambda k: (k + n) * (k + ParamPoly.const(1 + n, KPARAMS))),
             _krat(lambda k: (k + n) * (k + ParamPoly.const(1 + n, KPARAMS)),
                   lambda k: (k - 2) * (k + 2 * n)
                   * (k * 3 + ParamPoly.const(2 + 2 * n, KPARAMS)))),
            "proved", "generalized parafermions gl_n in sl_{n+1}", n * n + 3 * n + 2))

    add("minw", True, 4, "conjectural", "minimal W-algebra coset (type A)",
        lambda n: CurveIdeal(
            "minw", n, minw_generator(n),
            (_krat(lambda k: -((k + 1) * (k * 2 + n - 1) * (k * 3 + 2 * n)),
                   lambda k: (k + n - 1) * (k + n)),
             _krat(lambda k: (k + n - 1) * (k + n),
                   lambda k: (ParamPoly.const(n - 2, KPARAMS))
                   * (k * 2 + n - 2) * (k * 4 + 3 * n))),
            "conjectural", "minimal W-algebra coset (type A)", n * n - 1))

    add("subregn", True, 4, "conjectural", "subregular W-algebra coset (type A)",
        lambda n: CurveIdeal(
            "subregn", n, None,
            (_krat(lambda k: -n * (ParamPoly.const(n * n - 3 * n + 1, KPARAMS)
                                   + k * (n - 2))
                   * (ParamPoly.const(n * n - 2 * n - 1, KPARAMS) + k * (n - 1)),
                   lambda k: k + n),
             _krat(lambda k: -((k + n - 1) * (k + n)),
                   lambda k: (ParamPoly.const(n * n - 4 * n + 2, KPARAMS) + k * (n - 3))
                   * (ParamPoly.const(n * n - 2 * n - 2, KPARAMS) + k * (n - 1))
                   * (ParamPoly.const(n * n, KPARAMS) + k * (n + 1)))),
            "conjectural", "subregular W-algebra coset (type A)", 2 * n + 2))

    add("winf", False, 0, "proved", "deformed W_{1+infinity} Heisenberg coset",
        lambda n: CurveIdeal(
            "winf", None, winf_generator(),
            (_krat(lambda k: k, _n(1)),
             _krat(_n(1), lambda k: (k - 1) * 4)),
            "proved", "deformed W_{1+infinity} Heisenberg coset", None))

    add("wslminus2", False, 0, "proved", "λ = -1/16 line (W_{1+infinity,-2} coset)",
        lambda n: CurveIdeal(
            "wslminus2", None, wslminus2_generator(),
            (_krat(lambda k: -3 * (k + 1) * (k + 4), lambda k: (k + 2) * (k + 3)),
             ParamRat(ParamPoly.const(Fraction(-1, 16), KPARAMS))),
            "proved", "λ = -1/16 line (W_{1+infinity,-2} coset)", 9))

    add("winfneg", True, 3, "conjectural", "deformed W_{1+infinity} at negative integer",
        lambda n: CurveIdeal(
            "winfneg", n, winfneg_generator(n),
            (_krat(lambda k: -((k + 1) * (k + 2 * n)) * (1 + n),
                   lambda k: (k + n) * (k + ParamPoly.const(1 + n, KPARAMS))),
             _krat(lambda k: -((k + n) * (k + ParamPoly.const(1 + n, KPARAMS))),
                   lambda k: (ParamPoly.const(n + 2, KPARAMS))
                   * (k * 2 + n + 2) * (k * 2 + 3 * n))),
            "conjectural", "deformed W_{1+infinity} at negative integer", (n + 1) ** 2))

    return fams


_REGISTRY = _build_registry()


def atlas() -> List[AtlasFamily]:
    return list(_REGISTRY.values())


def curve(name: str, n: Optional[int] = None) -> CurveIdeal:
    if name not in _REGISTRY:
        raise AtlasError(f"unknown curve {name!r}")
    return _REGISTRY[name].instantiate(n)


def parametrize(name: str, k: Fraction, n: Optional[int] = None) -> Tuple[Fraction, Fraction]:
    """Exact point (c(k), λ(k)) on the curve; poles raise."""
    entry = curve(name, n)
    if entry.parametrization is None:
        raise AtlasError(f"{entry.label()} has no parametrization")
    k = Fraction(k)
    cr, lr = entry.parametrization
    try:
        return cr.eval({"k": k}), lr.eval({"k": k})
    except RingError:
        raise AtlasError(
            f"{entry.label()}: k={k} is a pole; the algebra there is not obtainable "
            f"as a quotient at this point") from None


def on_curve(name: str, c0, l0, n: Optional[int] = None) -> bool:
    entry = curve(name, n)
    if entry.generator is None:
        raise AtlasError(f"{entry.label()} has no generator polynomial")
    return entry.generator.eval({"c": Fraction(c0), "λ": Fraction(l0)}) == 0


def check_parametrization(entry: CurveIdeal) -> bool:
    """subst_param(generator, parametrization) must vanish identically in k."""
    if entry.generator is None or entry.parametrization is None:
        raise AtlasError(f"{entry.label()} lacks generator or parametrization")
    cr, lr = entry.parametrization
    val = entry.generator.subst({"c": cr, "λ": lr})
    return not val


def intersect(a: CurveIdeal, b: CurveIdeal) -> IntersectionReport:
    """All common zeros of two curve generators, exactly over Q."""
    if a.generator is None or b.generator is None:
        raise AtlasError("intersect needs generator polynomials on both curves")
    if a.generator.primitive_normalized() == b.generator.primitive_normalized():
        raise AtlasError("identical generators: degenerate intersection request")
    p, q = a.generator, b.generator
    g = poly_gcd(p, q)
    if g.total_degree() > 0:
        raise AtlasError(f"curves share a component: {g}")
    res_c = resultant(p, q, "λ")   # polynomial in c
    res_l = resultant(p, q, "c")   # polynomial in λ
    residual: List[ParamPoly] = []
    points: List[Tuple[Tuple[Fraction, Fraction], int]] = []
    if res_c.is_constant() or res_l.is_constant():
        return IntersectionReport([], [])
    c_roots, c_resid = rational_roots(res_c, "c")
    l_roots, l_resid = rational_roots(res_l, "λ")
    if c_resid.total_degree() > 0:
        residual.append(c_resid)
    if l_resid.total_degree() > 0:
        residual.append(l_resid)
    l_mult = dict(l_roots)
    for c0, mc in c_roots:
        pc = p.eval_partial({"c": c0})
        qc = q.eval_partial({"c": c0})
        if not pc or not qc:
            # one curve contains the whole line c = c0
            common = qc if not pc else pc
        else:
            common = poly_gcd(pc, qc)
        if common.degree("λ") <= 0:
            continue
        lam_roots, _ = rational_roots(common, "λ")
        for l0, _ in lam_roots:
            if (p.eval({"c": c0, "λ": l0}) != 0 or q.eval({"c": c0, "λ": l0}) != 0):
                raise AtlasError("intersection point failed re-verification")
            mult = min(mc, l_mult.get(l0, mc))
            points.append(((c0, l0), mult))
    points.sort()
    return IntersectionReport(points, residual)


def mu_lambda(mu, cparam: str = "c") -> ParamRat:
    """λ(μ) = (μ-1)(μ+1) / ((μ-2)(3μ² - μ - 2 + c(μ+2))), exact.

    `mu` may be a Fraction/int or a symbol name for a fully symbolic answer.
    """
    if isinstance(mu, str):
        params = (cparam, mu)
        m = ParamPoly.var(mu, params)
    else:
        mu = Fraction(mu)
        if mu == 2:
            raise AtlasError("μ = 2 is a pole of the λ(μ) normalization")
        params = (cparam,)
        m = ParamPoly.const(mu, params)
    c = ParamPoly.var(cparam, params)
    one = ParamPoly.const(1, params)
    num = (m - 1) * (m + 1)
    den = (m - 2) * (m * m * 3 - m - one * 2 + c * (m + 2))
    if not den:
        raise AtlasError("λ(μ) denominator vanishes")
    return ParamRat(num, den)


# ---------------------------------------------------------------------------
# Coincidence families: predicted intersection points with the wsln curves
# ---------------------------------------------------------------------------


def _f(a, b) -> Optional[Fraction]:
    if b == 0:
        return None
    return Fraction(a, b)


def predicted_intersections(name: str, n_other: Optional[int], m: int
                            ) -> Optional[List[Tuple[Fraction, Fraction]]]:
    """Known closed-form intersection points of `name` with wsln(m).

    Returns None when unavailable; family members whose formulas hit a pole
    at this (n, m) are omitted (they escape to infinity).
    """
    pts: List[Optional[Tuple[Optional[Fraction], Optional[Fraction]]]] = []
    if name == "wsln":
        n = n_other
        if n == m:
            raise AtlasError("wsln x wsln needs distinct indices")
        pts = [(_f(-(m - 1) * (n - 1) * (m + n + m * n), m + n),
                _f(-(m + n), (m - 2) * (n - 2) * (2 * m + 2 * n + m * n)))]
    elif name == "parafermion":
        pts = [
            (_f(2 * (m - 1), m + 2), _f(m + 1, (m - 2) * (3 * m + 4))),
            (_f(-2 * (2 * m - 1), m - 2), _f(m - 1, (m - 4) * (3 * m - 2))),
            (_f(-(3 * m + 1), 1), _f(-(m - 1) * (m + 1), 4 * (m - 2) * (2 * m + 1))),
        ]
    elif name == "bp":
        pts = [
            (_f(-3 * (m - 1) ** 2, 3 + m), _f((1 + m) * (3 + m), 4 * (m - 2) * (3 + 2 * m))),
            (_f(-6 * (m - 1) ** 2, (m - 3) * (m - 2)), _f(m - 3, (m - 6) * (3 * m - 4))),
            (_f(-2 * (1 + 2 * m) ** 2, 2 + m), _f(-(m - 1), (m - 2) * (5 * m + 4))),
        ]
    elif name == "subreg4":
        pts = [
            (_f(-4 * (m - 1) * (2 * m - 1), 4 + m),
             _f(-(1 + m) * (4 + m), (m - 2) ** 2 * (8 + 5 * m))),
            (_f(-4 * (m - 1) * (2 * m - 3), (m - 4) * (m - 3)),
             _f((m - 4) * (m - 3), 3 * (m - 8) * (m - 2) ** 2)),
            (_f(-(1 + 3 * m) * (3 + 5 * m), 3 + m),
             _f(-(m - 1) * (m + 3), 12 * (m - 2) * (m + 1) ** 2)),
        ]
    elif name == "wslminus2":
        pts = [(_f(-3 * (m - 1) * (m + 2), m - 2), Fraction(-1, 16))]
    elif name == "gpara":
        n = n_other
        pts = [
            (_f(n * (m - 1) * (1 + n + 2 * m), (n + m) * (1 + n + m)),
             _f((n + m) * (1 + n + m), (m - 2) * (2 * n + m) * (2 + 2 * n + 3 * m))),
            (_f((1 + n - m + n * m) * (m + n * m - 1), 1 + n - m),
             _f(-(m - 1) * (m - 1 - n), (m - 2) * (2 + 2 * n - 2 * m + n * m) * (2 * m + n * m - 2))),
            (_f(n * (m - 1) * (1 + 2 * m + n * m), n - m),
             _f(-(1 + m) * (m - n), (m - 2) * (2 * n - m + n * m) * (2 + 3 * m + n * m))),
        ]
    elif name == "winfneg":
        n = n_other
        pts = [(_f(-(m - 1) * (n + 1) * (n - m + m * n), m - n),
                _f(-(m - n), (m - 2) * (n + 2) * (2 * n - 2 * m + m * n)))]
    elif name == "minw":
        n = n_other
        pts = [
            (_f(-(m - 1) * (2 + m - n) * (3 * m + n), (m + n - 2) * (m + n)),
             _f((m + n - 2) * (m + n), 4 * (m - 2) * (n - 2) * (2 * m + n))),
            (_f(-(m - 1) * (2 + m + m * n) * (n + m * n - m - 2), (2 + m) * (2 + m - n)),
             _f(-(2 + m - n), (m - 2) * (n - 2) * (4 + 2 * m + m * n))),
            (_f(-(m - 1) * (m * n - 2 - m) * (n - 3 * m + m * n), (m - 2) * (m - n)),
             _f(-(m - n), (m * n - 4) * (2 * n - 4 * m + m * n))),
        ]
    else:
        return None
    out = []
    for pt in pts:
        if pt is None:
            continue
        cc, ll = pt
        if cc is None or ll is None:
            continue
        out.append((cc, ll))
    return out


def coincidence_report(name_a: str, name_b: str, n_range: Sequence[int],
                       n_a: Optional[int] = None) -> List[dict]:
    """Compare computed curve intersections against the predicted families.

    `name_b` must be "wsln"; rows cover wsln(m) for m in n_range. For family
    curves on the left, `n_a` fixes the member. Mismatches are flagged, never
    silently dropped.
    """
    if name_b != "wsln":
        raise AtlasError("coincidence families are tabulated against wsln")
    rows = []
    for m in n_range:
        if name_a == "wsln" and n_a == m:
            continue
        a = curve(name_a, n_a)
        b = curve("wsln", m)
        predicted = predicted_intersections(name_a, n_a, m)
        if a.generator is None:
            rows.append({"m": m, "computed": None, "predicted": predicted,
                         "match": None, "note": "no generator; prediction only"})
            continue
        rep = intersect(a, b)
        computed = sorted(set(rep.points()))
        pred_set = sorted(set(predicted)) if predicted is not None else None
        rows.append({
            "m": m,
            "computed": computed,
            "multiplicities": rep.rational_points,
            "residual": rep.residual,
            "predicted": pred_set,
            "match": (pred_set == computed) if pred_set is not None else None,
        })
    return rows
