"""Shapovalov form, determinants, singular vectors, and decoupling.

The weight-n bilinear form is <u, v> = u_(2n-1) v, valued in the weight-0
space. Its Gram matrix in the canonical PBW basis order gives det_n up to the
basis convention; every acceptance statement is a divisibility or rank fact,
which is basis independent.

Full symbolic determinants are computed through weight 6 (12x12). Above that,
divisibility of det_n by a curve generator is certified by rank-drop
sampling: the Gram matrix is singular at many exact rational points of the
curve and nonsingular off it, with exact kernel extraction available over the
parametrized function field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .bootstrap import extend, specialize, specialize_curve
from .fields import (FieldPoly, Monomial, VACUUM, WeightSpaceBasis,
                     enumerate_basis, mono_weight)
from .ope import BudgetError, OPETable, entry_weight, positive_modes_annihilate
from .rings import ParamPoly, ParamRat, RingError, poly_gcd


class ShapovalovError(RuntimeError):
    pass


@dataclass
class GramMatrix:
    weight: int
    basis: WeightSpaceBasis
    entries: List[List[object]]

    def dim(self) -> int:
        return len(self.basis.monomials)


@dataclass
class SingularVector:
    weight: int
    vector: FieldPoly
    certificate: dict
    decoupling: Optional[object] = None


def _zero_like(table: OPETable):
    if table.params is None:
        return Fraction(0)
    return ParamPoly.zero(table.params)


def gram(n: int, table: OPETable) -> GramMatrix:
    """Exact symmetric Gram matrix of the weight-n Shapovalov form."""
    basis = enumerate_basis(n, max(n, 2))
    monos = basis.monomials
    zero = _zero_like(table)
    dim = len(monos)
    entries: List[List[object]] = [[zero] * dim for _ in range(dim)]
    for a in range(dim):
        for b in range(a, dim):
            val = table.prod_mono(monos[a], monos[b], 2 * n - 1)
            for mono in val:
                if mono != VACUUM:
                    raise ShapovalovError(
                        f"pairing <{monos[a]}, {monos[b]}> left weight-0 space")
            coef = val.get(VACUUM, zero)
            entries[a][b] = coef
            entries[b][a] = coef
    return GramMatrix(n, basis, entries)


def _exact_div(a, b):
    if isinstance(a, ParamPoly):
        return a.exact_div(b)
    return a / b


def bareiss_det(rows: List[List[object]], one) -> object:
    """Fraction-free determinant; works over ParamPoly, Fraction, or ParamRat."""
    n = len(rows)
    m = [list(r) for r in rows]
    sign = 1
    prev = one
    for k in range(n - 1):
        if not m[k][k]:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return one - one
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = _exact_div(m[i][j] * m[k][k] - m[i][k] * m[k][j], prev)
            m[i][k] = None
        prev = m[k][k]
    out = m[n - 1][n - 1]
    return out if sign > 0 else -out


def det(n: int, table: OPETable) -> object:
    """Shapovalov determinant at weight n in the canonical basis order."""
    g = gram(n, table)
    if g.dim() == 0:
        raise ShapovalovError(f"empty weight-{n} space")
    one = ParamPoly.const(1, table.params) if table.params is not None else Fraction(1)
    return bareiss_det(g.entries, one)


def _complexity(x) -> int:
    if isinstance(x, ParamRat):
        return len(x.num.terms) + len(x.den.terms)
    if isinstance(x, ParamPoly):
        return len(x.terms)
    return 1


def _as_field(x):
    if isinstance(x, ParamPoly):
        return ParamRat(x)
    return x


def kernel_basis(matrix: List[List[object]]) -> List[List[object]]:
    """Kernel of a square matrix over an exact field (Fraction or ParamRat).

    Columns are eliminated left to right, so with the canonical basis order
    the returned reduced vectors lead with the earliest basis element
    (the highest-index generator).
    """
    if not matrix:
        return []
    rows = [[_as_field(x) for x in r] for r in matrix]
    ncols = len(rows[0])
    pivots: Dict[int, int] = {}
    r = 0
    for cpiv in range(ncols):
        best = None
        for i in range(r, len(rows)):
            if rows[i][cpiv]:
                if best is None or _complexity(rows[i][cpiv]) < best[1]:
                    best = (i, _complexity(rows[i][cpiv]))
        if best is None:
            continue
        i = best[0]
        rows[r], rows[i] = rows[i], rows[r]
        pv = rows[r][cpiv]
        rows[r] = [x / pv for x in rows[r]]
        for i2 in range(len(rows)):
            if i2 != r and rows[i2][cpiv]:
                f = rows[i2][cpiv]
                rows[i2] = [a - f * b for a, b in zip(rows[i2], rows[r])]
        pivots[cpiv] = r
        r += 1
    free_cols = [c for c in range(ncols) if c not in pivots]
    out = []
    for fc in free_cols:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for pc, pr in pivots.items():
            vec[pc] = -rows[pr][fc]
        out.append(vec)
    return out


def rank(matrix: List[List[object]]) -> int:
    if not matrix:
        return 0
    return len(matrix[0]) - len(kernel_basis(matrix))


def is_singular(g: GramMatrix) -> bool:
    return len(kernel_basis(g.entries)) > 0


# ---------------------------------------------------------------------------
# Budget profiles for high-weight Gram matrices
# ---------------------------------------------------------------------------


def gram_caps(n: int, max_full: int, slack: int = 3) -> Dict[int, Optional[int]]:
    """Per-level weight caps adequate for the weight-n pairing."""
    caps: Dict[int, Optional[int]] = {}
    for s in range(max_full + 1, 2 * n + 1):
        cap = 2 * n - s + slack
        caps[s] = None if cap >= s - 1 else max(cap, 0)
    return caps


def gram_auto(n: int, table: OPETable, slack: int = 3, progress=None) -> GramMatrix:
    """gram(n) with on-demand capped extension of the table."""
    attempts = 0
    while True:
        try:
            return gram(n, table)
        except BudgetError as e:
            attempts += 1
            if attempts > 12:
                raise
            i, j, k = e.key
            level = i + j
            need_w = entry_weight(i, j, k)
            caps = gram_caps(max(n, (level + 1) // 2), table.max_level, slack)
            lv_cap = caps.get(level)
            if lv_cap is not None and lv_cap < need_w:
                caps[level] = need_w
            for lv in list(table.caps):
                if caps.get(lv) is not None and table.caps[lv] is not None:
                    caps[lv] = max(caps[lv], table.caps[lv])
            extend(table, max(level, max(caps, default=level)), caps=caps,
                   progress=progress)


# ---------------------------------------------------------------------------
# Divisibility / factor level
# ---------------------------------------------------------------------------


def factor_level(p: ParamPoly, table: OPETable, n_max: int,
                 symbolic_max: int = 6,
                 curve_points: Optional[Sequence[Tuple[Fraction, Fraction]]] = None,
                 off_points: Optional[Sequence[Tuple[Fraction, Fraction]]] = None,
                 progress=None) -> Optional[int]:
    """Smallest n <= n_max with p | det_n, or None.

    Weights <= symbolic_max use the full symbolic determinant. Above that a
    sampled rank-drop certificate is used and `curve_points` (exact rational
    points on V(p)) must be supplied; `off_points` guards against det_n = 0.
    """
    if not p:
        raise ShapovalovError("zero polynomial has no factor level")
    if p.is_constant():
        return None
    for n in range(2, min(n_max, symbolic_max) + 1):
        if progress:
            progress(f"factor_level: symbolic det_{n}")
        ok, _ = p.divides(det(n, table))
        if ok:
            return n
    specials = None
    for n in range(symbolic_max + 1, n_max + 1):
        if curve_points is None:
            raise ShapovalovError(
                "factor_level beyond the symbolic range needs curve sample points")
        if specials is None:
            specials = [_point_table(table, c0, l0, 2 * n)
                        for (c0, l0) in curve_points]
            offs = [_point_table(table, c0, l0, 2 * n)
                    for (c0, l0) in (off_points or [])]
        drop = True
        for t in specials:
            g = gram_auto(n, t, progress=progress)
            if not is_singular(g):
                drop = False
                break
        if drop:
            for t in offs:
                g = gram_auto(n, t, progress=progress)
                if is_singular(g):
                    raise ShapovalovError(
                        f"det_{n} vanished at an off-curve control point")
            return n
    return None


def _point_table(table: OPETable, c0, l0, needed_level: int) -> OPETable:
    t = specialize(table, {"c": c0, "λ": l0})
    return t


# ---------------------------------------------------------------------------
# Singular vectors and decoupling
# ---------------------------------------------------------------------------


def find_singular(table: OPETable, n: int, max_generator: Optional[int] = None,
                  progress=None) -> List[SingularVector]:
    """Kernel of the weight-n Gram form of an already-specialized table.

    Each kernel vector is certified by positive_modes_annihilate; a kernel
    vector failing certification is an engine bug and raises.
    """
    g = gram_auto(n, table, progress=progress)
    out = []
    for vec in kernel_basis(g.entries):
        fp = FieldPoly()
        for mono, coef in zip(g.basis.monomials, vec):
            fp.iadd_term(mono, coef)
        ok, cert = positive_modes_annihilate(fp, table, max_generator=max_generator)
        if cert["failures"]:
            raise ShapovalovError(
                f"kernel vector at weight {n} is not annihilated: {cert['failures'][:1]}")
        top = fp.get(((0, n),))
        out.append(SingularVector(n, fp, cert, top))
    return out


def find_singular_point(table: OPETable, c0, l0, n: int, **kw) -> List[SingularVector]:
    return find_singular(specialize(table, {"c": c0, "λ": l0}), n, **kw)


def find_singular_curve(table: OPETable, parametrization: Mapping[str, ParamRat],
                        n: int, **kw) -> List[SingularVector]:
    return find_singular(specialize_curve(table, parametrization), n, **kw)


def substitute_relations(fp: FieldPoly, relations: Mapping[int, FieldPoly],
                         table: OPETable, top: int) -> FieldPoly:
    """Eliminate all generators above `top` using W^m = P_m relations."""
    work = FieldPoly(fp)
    guard = 0
    while True:
        target = None
        for mono in work:
            for pos, (m, g) in enumerate(mono):
                if g > top:
                    target = (mono, pos, m, g)
                    break
            if target:
                break
        if target is None:
            return work
        guard += 1
        if guard > 10000:
            raise ShapovalovError("relation substitution did not terminate")
        mono, pos, m, g = target
        if g not in relations:
            raise ShapovalovError(f"no decoupling relation for W{g}")
        coef = work.pop(mono)
        prefix, suffix = mono[:pos], mono[pos + 1:]
        repl = table.texact_pow(relations[g], m)
        spliced = FieldPoly()
        for u, cu in repl.items():
            spliced.iadd(table.prod_mono(u, suffix, -1), cu)
        for f in reversed(prefix):
            nxt = FieldPoly()
            for u, cu in spliced.items():
                nxt.iadd(table.wick_insert(f, u), cu)
            spliced = nxt
        work.iadd(spliced, coef)


def decouple(sv: SingularVector, table: OPETable, m_max: int) -> Dict[int, FieldPoly]:
    """Relations W^m = P_m (N+1 <= m <= m_max) from a decoupling singular vector.

    The vector must have invertible W^{N+1} coefficient in the working ring;
    the inversion is recorded implicitly by scaling. Each returned P_m only
    involves generators of index <= N.
    """
    n = sv.weight
    topmono = ((0, n),)
    alpha = sv.vector.get(topmono)
    if not alpha:
        raise ShapovalovError(
            f"singular vector has no W{n} component; cannot decouple (vector: "
            f"{sv.vector.text()})")
    rest = FieldPoly(sv.vector)
    del rest[topmono]
    inv = Fraction(1, 1) / alpha if isinstance(alpha, (int, Fraction)) else 1 / _as_field(alpha)
    relations: Dict[int, FieldPoly] = {n: rest.scaled(-1 * inv)}
    w3 = FieldPoly.term(((0, 3),), 1)
    for m in range(n, m_max):
        # W^{m+1} = W3_(1) P_m - C_{3,m},   C_{3,m} = W3_(1)W^m - W^{m+1}
        lifted = table.nth(w3, relations[m], 1)
        c3m = FieldPoly(table.entry(3, m, 1))
        c3m.iadd_term(((0, m + 1),), -1)
        nxt = lifted - c3m
        relations[m + 1] = substitute_relations(nxt, relations, table, n - 1)
    # normalize: every P_m reduced to generators <= N
    for m in list(relations):
        relations[m] = substitute_relations(relations[m], relations, table, n - 1)
    return relations


def closure_report(relations: Dict[int, FieldPoly], table: OPETable,
                   top: int, poles_table: Optional[OPETable] = None) -> dict:
    """Check the survivor OPEs close after substituting the relations."""
    src = poles_table or table
    surviving = {}
    leaks = []
    for i in range(2, top + 1):
        for j in range(i, top + 1):
            for k in range(0, i + j):
                try:
                    val = src.entry(i, j, k)
                except BudgetError:
                    continue
                if not val:
                    continue
                reduced = substitute_relations(val, relations, table, top)
                surviving[(i, j, k)] = reduced
                for mono in reduced:
                    if any(g > top for _, g in mono):
                        leaks.append((i, j, k, mono))
    return {"closed": not leaks, "leaks": leaks, "entries": surviving}
