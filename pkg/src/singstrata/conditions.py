"""Covariant defining conditions of a linear singularity type.

Every lattice point under the Newton diagram is one vanishing derivative of
the defining polynomial.  For a linear type these conditions can be written
covariantly: contract the derivative tensor f^(p) at the singular point x
with auxiliary points y_i ranging over the vector spaces of the diagram's
flag.  Each covariant condition with q free tensor slots stands for a
symmetric tensor with C(q+n, q) components; one component hypersurface has
cohomology class F + (d-p)X + (one generator per contraction slot).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from singstrata import diagram as dg
from singstrata import ring as rg


class ConditionError(Exception):
    pass


class NotLinear(ConditionError):
    """Covariant conditions exist only for linear types."""


@dataclass(frozen=True)
class CovariantCondition:
    """One covariant condition f^(order)|_x(contractions..., free...) = 0.

    contractions maps point labels ('x', 'y1', ...) to multiplicities.
    free_indices is the number of unconstrained tensor slots; the condition
    stands for free_index_space_dim component hypersurfaces, of which
    component_count are independent of the earlier conditions (equal to the
    number of lattice points the condition absorbs).
    """

    order: int
    contractions: tuple          # sorted ((label, multiplicity), ...)
    free_indices: int
    free_index_space_dim: int
    component_count: int
    points: tuple                # absorbed lattice points, sorted

    def contraction_map(self) -> dict:
        return dict(self.contractions)

    def describe(self) -> str:
        args = []
        for label, m in self.contractions:
            args.extend([label] * m)
        args.extend(["."] * self.free_indices)
        inner = ",".join(args)
        return f"f^({self.order})({inner})=0"


@dataclass
class LiftedStratumSpec:
    """Auxiliary-space layout plus the ordered covariant condition list."""

    ring: rg.RingSpec
    aux_layout: tuple            # ("x", (("y1", axis-set), ...))
    conditions: tuple
    diagram: dg.NewtonDiagram | None = None
    clazz: rg.ClassPoly | None = None

    @property
    def y_labels(self):
        return tuple(label for label, _ in self.aux_layout[1])

    @property
    def total_components(self) -> int:
        return sum(c.component_count for c in self.conditions)


def aux_points(diagram: dg.NewtonDiagram):
    """Assign auxiliary points to the proper spaces of the collection.

    Each proper space V contributes dim(V) - dim(largest proper subspace)
    new points; the new axes of V are mapped to those points in sorted
    order.  For a single-facet (SQH) diagram this is the usual flag layout
    y_1, ..., y_m with m the dimension of the largest proper flag space.
    """
    coll = dg.vector_space_collection(diagram)
    proper = [s for s in coll.spaces if len(s) < diagram.n]
    axis_to_label = {}
    labels = []
    counter = 0
    for space in proper:  # sorted by (size, elements) already
        inside = [w for w in proper if w < space]
        covered = set().union(*inside) if inside else set()
        new_axes = sorted(space - covered)
        for axis in new_axes:
            counter += 1
            label = f"y{counter}"
            labels.append((label, space))
            axis_to_label[axis] = label
    return labels, axis_to_label


def covariant_conditions(diagram: dg.NewtonDiagram, f_cap: int | None = None) -> LiftedStratumSpec:
    """Generate the ordered covariant condition list of a linear diagram.

    All lattice points up to level p-1 (p the multiplicity) merge into the
    single tensor condition f^(p-1) = 0.  A point at level r >= p becomes
    f^(r) contracted with the point of the space associated to each special
    axis; full-space slots stay free.  Conditions implied by one with fewer
    contractions at the same order are identified with it.
    """
    if not dg.is_linear_type(diagram):
        raise NotLinear("the slope criterion fails; use a degeneration recipe instead")
    n = diagram.n
    p_mult, _ = dg.multiplicity_and_determinacy(diagram)
    labels, axis_to_label = aux_points(diagram)
    points = dg.all_points_under(diagram)

    low = [pt for pt in points if sum(pt) <= p_mult - 1]
    assert len(low) == comb(n + p_mult - 1, n), "commode diagram must contain all low levels"

    raw = {}
    for pt in points:
        r = sum(pt)
        if r <= p_mult - 1:
            continue
        contr: dict[str, int] = {}
        free = 0
        for axis0, m in enumerate(pt):
            if m == 0:
                continue
            label = axis_to_label.get(axis0 + 1)
            if label is None:
                free += m
            else:
                contr[label] = contr.get(label, 0) + m
        key = (r, tuple(sorted(contr.items())), free)
        raw.setdefault(key, []).append(pt)

    # identify a condition with one having fewer contractions at the same order
    def subsumed_by(key_small, key_big):
        (r1, c1, _), (r2, c2, _) = key_small, key_big
        if r1 != r2 or key_small == key_big:
            return False
        m1, m2 = dict(c1), dict(c2)
        return all(m1.get(k, 0) >= v for k, v in m2.items()) and sum(m2.values()) < sum(m1.values())

    keys = sorted(raw)
    kept = {}
    for k in keys:
        target = k
        for other in keys:
            if subsumed_by(target, other):
                target = other
        kept.setdefault(target, []).extend(raw[k])

    conds = [CovariantCondition(
        order=p_mult - 1, contractions=(), free_indices=p_mult - 1,
        free_index_space_dim=comb(n + p_mult - 1, p_mult - 1),
        component_count=len(low), points=tuple(sorted(low, key=dg.monomial_key)))]
    for (r, contr, free), pts in sorted(kept.items(),
                                        key=lambda kv: dg.monomial_key(min(kv[1], key=dg.monomial_key))):
        conds.append(CovariantCondition(
            order=r, contractions=contr, free_indices=free,
            free_index_space_dim=comb(n + free, free),
            component_count=len(pts), points=tuple(sorted(pts, key=dg.monomial_key))))

    spec = rg.RingSpec(n=n, num_y=len(labels),
                       f_cap=f_cap if f_cap is not None else len(points) + 2)
    layout = ("x", tuple((lab, frozenset(space)) for lab, space in labels))
    return LiftedStratumSpec(ring=spec, aux_layout=layout,
                             conditions=tuple(conds), diagram=diagram)


def condition_class(c: CovariantCondition, ring: rg.RingSpec, d_offset: int) -> rg.ClassPoly:
    """Class of one component hypersurface, over the Q-basis with offset k.

    F + (d-p)X + contraction generators, i.e. Q + (k-p+#x)X + sum(m_i Y_i)
    for Q = (d-k)X + F.
    """
    terms = {}
    nv = ring.nvars
    q_exp = [0] * nv
    q_exp[-1] = 1
    terms[tuple(q_exp)] = rg.ONE
    x_coeff = d_offset - c.order
    for label, m in c.contractions:
        if label == "x":
            x_coeff += m
        else:
            i = ring.var_index("Y" + label[1:])
            e = [0] * nv
            e[i] = 1
            terms[tuple(e)] = rg.DPoly((m,))
    if x_coeff:
        e = [0] * nv
        e[0] = 1
        terms[tuple(e)] = rg.DPoly((x_coeff,))
    return rg.ClassPoly(ring, terms)


def ordinary_point_class(n: int, p: int, ring: rg.RingSpec | None = None) -> rg.ClassPoly:
    """Lifted class of the point where all derivatives up to order p vanish:
    Q^C(n+p, n) over the Q-basis with offset k = p."""
    if p < 1:
        raise ConditionError("p must be >= 1")
    if ring is None:
        ring = rg.RingSpec(n=n, num_y=0, f_cap=comb(n + p, n) + 2)
    q = rg.ClassPoly.gen(ring, "Q")
    return q ** comb(n + p, n)


def conditions_report(spec: LiftedStratumSpec) -> list:
    """JSON-ready ordered condition list."""
    return [{"order": c.order,
             "contractions": {k: v for k, v in c.contractions},
             "free_indices": c.free_indices,
             "components": c.free_index_space_dim,
             "independent_components": c.component_count}
            for c in spec.conditions]
