"""Commode Newton diagrams: facets, intercepts, flags, lattice points.

A singularity type is specified by the support of a representative germ in
local coordinates z_1..z_n.  The diagram is the compact lower boundary of
the convex hull of support + R^n_{>=0}; each top-dimensional facet has a
supporting hyperplane sum(m_i / k_i) = 1 with positive axis intercepts k_i
(not necessarily integers).  The intercepts of a facet, sorted, determine a
flag of coordinate subspaces; the flags of all facets are combined into the
collection of vector spaces that drives the covariant defining conditions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction


class DiagramError(Exception):
    pass


class NotCommode(DiagramError):
    """The support does not span a diagram meeting all coordinate axes."""


# ---------------------------------------------------------------------------
# small exact linear algebra helpers
# ---------------------------------------------------------------------------

def _solve_square(rows, rhs):
    """Solve an n x n rational system; None if singular."""
    n = len(rows)
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def _affine_rank(points):
    """Dimension of the affine hull of a set of rational points."""
    if len(points) <= 1:
        return 0
    base = points[0]
    vecs = [[Fraction(p[i] - base[i]) for i in range(len(base))] for p in points[1:]]
    rank = 0
    ncols = len(base)
    for col in range(ncols):
        piv = next((r for r in range(rank, len(vecs)) if vecs[r][col] != 0), None)
        if piv is None:
            continue
        vecs[rank], vecs[piv] = vecs[piv], vecs[rank]
        inv = Fraction(1) / vecs[rank][col]
        vecs[rank] = [x * inv for x in vecs[rank]]
        for r in range(len(vecs)):
            if r != rank and vecs[r][col]:
                f = vecs[r][col]
                vecs[r] = [x - f * y for x, y in zip(vecs[r], vecs[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Facet:
    """One top-dimensional face: hyperplane sum(m_i / k_i) = 1, all k_i > 0.

    weights are the 1/k_i; touching is the set of support points on the
    hyperplane.
    """

    weights: tuple
    touching: tuple

    @property
    def intercepts(self) -> tuple:
        return tuple(Fraction(1) / w for w in self.weights)

    def value(self, point) -> Fraction:
        return sum(w * m for w, m in zip(self.weights, point))

    def is_below(self, point) -> bool:
        return self.value(point) < 1


@dataclass(frozen=True)
class FlagSpec:
    """Flag V_1 <= ... <= V_n of coordinate subspaces of C^n.

    spaces[i] is the axis index set (1-based) of V_{i+1}; lifted[i] is the
    homogeneous version spanned additionally by e_0.
    """

    spaces: tuple

    @property
    def lifted(self) -> tuple:
        return tuple(frozenset(s) | {0} for s in self.spaces)

    def associated_space(self, axis: int) -> frozenset:
        """Smallest flag space containing the given axis (1-based)."""
        for s in self.spaces:
            if axis in s:
                return s
        raise ValueError(f"axis {axis} not in any flag space")


@dataclass(frozen=True)
class VectorSpaceCollection:
    """Deduplicated coordinate subspaces collected from all facet flags."""

    spaces: tuple  # frozensets of 1-based axis indices, sorted by (size, elements)

    def inclusion_pairs(self):
        return [(a, b) for a in self.spaces for b in self.spaces
                if a < b]


@dataclass(frozen=True)
class NewtonDiagram:
    n: int
    support: frozenset
    facets: tuple
    name: str | None = None

    def min_facet_value(self, point) -> Fraction:
        return min(f.value(point) for f in self.facets)

    def is_below(self, point) -> bool:
        """Strictly below the diagram: below at least one facet hyperplane."""
        return any(f.is_below(point) for f in self.facets)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def build_diagram(n: int, support, name: str | None = None) -> NewtonDiagram:
    """Compute the facets of the lower hull of a support set, exactly.

    Raises NotCommode when the support admits no top-dimensional facet with
    all-positive intercepts (e.g. an axis the diagram never meets).
    """
    if n < 1:
        raise DiagramError("n must be >= 1")
    pts = sorted({tuple(int(c) for c in p) for p in support})
    if not pts:
        raise DiagramError("support must be non-empty")
    for p in pts:
        if len(p) != n or any(c < 0 for c in p):
            raise DiagramError(f"bad support point {p}")

    facets = {}
    if n == 1:
        m = min(p[0] for p in pts)
        if m == 0:
            raise DiagramError("support contains the constant monomial")
        w = (Fraction(1, m),)
        facets[w] = Facet(w, ((m,),))
    else:
        for combo in itertools.combinations(pts, n):
            sol = _solve_square(combo, [1] * n)
            if sol is None or any(w <= 0 for w in sol):
                continue
            w = tuple(sol)
            if w in facets:
                continue
            vals = [sum(wi * mi for wi, mi in zip(w, p)) for p in pts]
            if any(v < 1 for v in vals):
                continue
            touching = tuple(p for p, v in zip(pts, vals) if v == 1)
            if _affine_rank(touching) == n - 1:
                facets[w] = Facet(w, touching)

    if not facets:
        raise NotCommode(
            "support has no top-dimensional facet with positive intercepts; "
            "add monomials so the diagram meets every axis")
    ordered = tuple(sorted(facets.values(), key=lambda f: f.weights))
    return NewtonDiagram(n=n, support=frozenset(pts), facets=ordered, name=name)


def points_under(diagram: NewtonDiagram, r: int):
    """All lattice points with coordinate sum r strictly below the diagram."""
    if r < 0:
        raise DiagramError("r must be >= 0")
    out = set()
    for m in _compositions(r, diagram.n):
        if diagram.is_below(m):
            out.add(m)
    return out


def all_points_under(diagram: NewtonDiagram):
    """Union of points_under over all levels, as a sorted list."""
    top = max(max(f.intercepts) for f in diagram.facets)
    levels = int(top) + 1
    pts = []
    for r in range(levels + 1):
        pts.extend(points_under(diagram, r))
    return sorted(set(pts), key=monomial_key)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def face_flag(facet: Facet, n: int) -> FlagSpec:
    """Flag of a facet: sort intercepts descending, grow spaces at strict
    drops, then undo the sorting permutation."""
    ks = facet.intercepts
    order = sorted(range(n), key=lambda i: (-ks[i], i))
    sorted_ks = [ks[i] for i in order]
    sizes = [n]  # |V_n| = n
    for i in range(n - 1, 0, -1):
        # V_{i} from V_{i+1}: equal intercepts share the space
        if sorted_ks[i - 1] == sorted_ks[i]:
            sizes.append(sizes[-1])
        else:
            sizes.append(i)
    sizes.reverse()
    spaces = tuple(frozenset(order[j] + 1 for j in range(sizes[i])) for i in range(n))
    return FlagSpec(spaces=spaces)


def vector_space_collection(diagram: NewtonDiagram) -> VectorSpaceCollection:
    """Union of all facet flags, coinciding spaces identified."""
    seen = set()
    for f in diagram.facets:
        for s in face_flag(f, diagram.n).spaces:
            seen.add(s)
    ordered = tuple(sorted(seen, key=lambda s: (len(s), sorted(s))))
    return VectorSpaceCollection(spaces=ordered)


def is_linear_type(diagram: NewtonDiagram) -> bool:
    """Slope criterion: on every facet, max intercept <= 2 * min intercept."""
    for f in diagram.facets:
        ks = f.intercepts
        if max(ks) > 2 * min(ks):
            return False
    return True


def multiplicity_and_determinacy(diagram: NewtonDiagram):
    """(multiplicity, determinacy order): minimal total degree of the support
    and the maximal intercept rounded up."""
    p = min(sum(pt) for pt in diagram.support)
    top = max(max(f.intercepts) for f in diagram.facets)
    k = -(-top.numerator // top.denominator)  # ceil
    return p, int(k)


def stable_extension(diagram: NewtonDiagram, extra: int) -> NewtonDiagram:
    """Diagram of f + sum of squares in `extra` fresh variables."""
    if extra < 0:
        raise DiagramError("extra must be >= 0")
    if extra == 0:
        return diagram
    p, _ = multiplicity_and_determinacy(diagram)
    if p <= 2:
        raise DiagramError("stable extension requires multiplicity > 2")
    n2 = diagram.n + extra
    support = [pt + (0,) * extra for pt in sorted(diagram.support)]
    for j in range(extra):
        axis = [0] * n2
        axis[diagram.n + j] = 2
        support.append(tuple(axis))
    return build_diagram(n2, support, name=diagram.name)


def monomial_key(exponents):
    """Sort key for the monomial order: total degree, then lexicographic
    with z_1 greatest (higher power of an earlier variable = greater)."""
    return (sum(exponents),) + tuple(exponents)


def monomial_compare(a, b) -> int:
    """-1, 0, or 1 as the monomial a is smaller, equal, or greater than b."""
    if len(a) != len(b):
        raise DiagramError("exponent vectors of different length")
    ka, kb = monomial_key(a), monomial_key(b)
    return (ka > kb) - (ka < kb)


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def diagram_from_json(obj: dict) -> NewtonDiagram:
    return build_diagram(obj["n"], obj["support"], name=obj.get("name"))


def facet_report(diagram: NewtonDiagram) -> str:
    """One facet per line, intercepts as exact fractions a/b."""
    lines = []
    for f in diagram.facets:
        ks = " ".join(f"{k.numerator}/{k.denominator}" if k.denominator != 1
                      else str(k.numerator) for k in f.intercepts)
        lines.append(ks)
    return "\n".join(lines)
