"""The degeneration engine.

A lifted stratum is cut out of a product of projective spaces by condition
hypersurfaces, one per lattice point under the Newton diagram.  Each cut is
generically transversal but degenerates over cycles of jump in the
auxiliary space (dependency loci of the tracked points and coordinate
degenerations), leaving residual pieces whose classes, weighted by
intersection multiplicities, must be removed.

Residual classes are rarely computed directly.  Instead the unknown pieces
are left symbolic and pinned down by two consistency conditions on the
resulting stratum class, written over the Q-basis:

  * the power of each Y_i is at most n - r_i, where P^{r_i} is the generic
    fiber of forgetting y_i, and
  * the class is invariant under the point permutations preserving the
    flag (for pure corank forms this includes X).

The solver reports NoSolution and NonUnique honestly instead of guessing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, gcd

from singstrata import conditions as cnd
from singstrata import diagram as dg
from singstrata import interp
from singstrata import ring as rg
from singstrata.ring import ClassPoly, DPoly, RingSpec


class DegenError(Exception):
    pass


class NoSolution(DegenError):
    """Consistency constraints are inconsistent: a modeling error."""


class NonUnique(DegenError):
    """Constraints underdetermine the class; kernel dimension attached."""

    def __init__(self, message, kernel_dim=None):
        super().__init__(message)
        self.kernel_dim = kernel_dim


class OutOfRange(DegenError):
    """The derivative-case multiplicity formula does not apply."""


class NonIntegral(DegenError):
    """A residual derivative is not divisible by the required factorial."""


class TooManyPoints(DegenError):
    pass


class UnsupportedType(DegenError):
    """No engine path is implemented for this diagram; supply a recipe."""


# ---------------------------------------------------------------------------
# cycle classes and standard residual machinery
# ---------------------------------------------------------------------------

def diagonal_class(k: int, points, ring: RingSpec) -> ClassPoly:
    """Class of the locus where k tracked points lie in a (k-2)-plane.

    This is the complete homogeneous symmetric polynomial of degree n+2-k
    in the k point generators (codimension n+2-k): for k = 2 the diagonal
    sum_{i} A^i B^{n-i}, whose telescoping identity (A-B)*h = A^{n+1}-B^{n+1}
    = 0 lets any multiplier trade A for B.
    """
    if k < 2:
        raise DegenError("need at least two points")
    if k > ring.n + 1:
        raise TooManyPoints(f"{k} points always span at most an (n={ring.n})-plane")
    if len(set(points)) != k:
        raise DegenError("points must be k distinct generators")
    return rg.hsym(ring, ring.n + 2 - k, points)


def proportionality_class(m: int, a_gen: str, b_gen: str, ring: RingSpec) -> ClassPoly:
    """Class of proportionality of two symmetric tensors with M independent
    components: sum_{i=0}^{M-1} A^i B^{M-1-i}, truncated by nilpotency."""
    if m < 1:
        raise DegenError("M must be >= 1")
    a = ClassPoly.gen(ring, a_gen)
    b = ClassPoly.gen(ring, b_gen)
    total = ClassPoly.zero(ring)
    for i in range(m):
        total = total + a ** i * b ** (m - 1 - i)
    return total


def intersection_multiplicity(stratum_order: int, condition_order: int,
                              contractions: int) -> int:
    """Vanishing order of f^(p)(y,...,y) along the diagonal x = y when the
    stratum already forces f^(m)|_x = 0: expanding y = x + t gives leading
    order k + m + 1 - p."""
    m, p, k = stratum_order, condition_order, contractions
    if not (m + 1 <= p <= m + k):
        raise OutOfRange(
            f"derivative-case formula needs m+1 <= p <= m+k, got m={m}, p={p}, k={k}")
    return k + m + 1 - p


def residual_over_diagonal(cls: ClassPoly, var: str, fiber_dim: int,
                           partner: str = "X") -> ClassPoly:
    """Class of the restriction of a fibration to the diagonal var=partner,
    when the restricted projection has generic fiber P^fiber_dim:

        [partner = var] / (n-r)! * d^{n-r} cls / d var^{n-r}
    """
    n = cls.spec.n
    r = fiber_dim
    if not (0 <= r < n):
        raise DegenError("fiber dimension must satisfy 0 <= r < n")
    deriv = rg.derivative(cls, var, n - r)
    scaled = deriv * Fraction(1, factorial(n - r))
    if not scaled.is_integral():
        raise NonIntegral(
            f"derivative of order {n - r} is not divisible by {n - r}!; wrong fiber_dim?")
    diag = diagonal_class(2, (partner, var), cls.spec)
    return diag * scaled


@dataclass(frozen=True)
class CycleOfJump:
    """A locus of non-transversality: (pi_I(x), {pi_I(y_j)}_{j in J}) are
    linearly dependent.  J empty means pi_I(x) = 0."""

    I: tuple
    J: tuple
    grading: int = 1

    def contains(self, other: "CycleOfJump") -> bool:
        # larger I = longer projections = smaller locus; larger J = more
        # points = larger locus
        return set(other.I) >= set(self.I) and set(other.J) <= set(self.J)


@dataclass
class ResidualSpec:
    cycle: object                 # CycleOfJump or a descriptive label
    multiplicity: int
    clazz: ClassPoly | str        # ClassPoly or "solve"

    def __post_init__(self):
        if self.multiplicity < 1:
            raise DegenError("multiplicity must be >= 1")


@dataclass
class DegenerationRecipe:
    source: str
    divisor: list                 # list of (ClassPoly, power) pairs
    rhs: list                     # list of (ClassPoly, int multiplicity)
    residuals: list               # list of ResidualSpec with known classes


def degenerate_step(current: ClassPoly, condition_component: ClassPoly,
                    residuals=()) -> ClassPoly:
    """One degeneration: intersect with a condition hypersurface and remove
    the residual pieces: current * component - sum(mult * residual class)."""
    out = current * condition_component
    for spec in residuals:
        if not isinstance(spec.clazz, ClassPoly):
            raise DegenError("degenerate_step needs known residual classes")
        out = out - spec.clazz * spec.multiplicity
    return out


def enumerate_cycles(aux_labels, conds, component_mode: bool | None = None):
    """Cycles of jump relevant to a condition list.

    Dependency cycles (pi_I = full projection) appear for every non-empty
    subset of the tracked points occurring in the conditions.  The
    coordinate cycle pi_I(x) = 0 appears only when conditions are applied
    component by component (basis-slot granularity); fully covariant tensor
    conditions with no tracked points are globally transversal.  Grading is
    the containment depth: a dependency cycle on fewer points lies inside
    one on more points.
    """
    used = set()
    has_free_slots = False
    for c in conds:
        for label, _ in c.contractions:
            if label != "x":
                used.add(label)
        if c.free_indices > 0:
            has_free_slots = True
    if component_mode is None:
        component_mode = has_free_slots and bool(used)
    cycles = []
    order = [lab for lab in aux_labels if lab in used]
    for k in range(1, len(order) + 1):
        for combo in itertools.combinations(order, k):
            cycles.append(CycleOfJump(I=("full",), J=combo, grading=k))
    if component_mode:
        cycles.append(CycleOfJump(I=("last-slots",), J=(), grading=1))
    return cycles


def corank_jump_data(n: int, r: int):
    """(codimension, fiber-dimension jump) of the extreme cycles of jump of
    the corank-r incidence variety: the small diagonal of the r points and
    the locus where they span an (r-2)-plane."""
    if r < 2:
        raise DegenError("need at least two points for dependency cycles")
    c_min = (n * (r - 1), Fraction((2 * n + 2 - r) * (r - 1), 2) - 1)
    c_max = (n + 2 - r, n + 1 - r)
    return [c_min, c_max]


# ---------------------------------------------------------------------------
# exact sparse linear solving over the rationals
# ---------------------------------------------------------------------------

class ExactLinearSolver:
    """Streaming reduced row echelon form with integer rows.

    Rows are sparse dicts col -> int; right-hand sides are exact Fractions.
    Insertion keeps the stored rows fully reduced so that solution and
    kernel extraction is direct.
    """

    def __init__(self):
        self.pivots: dict = {}     # pivot col -> (rowdict, rhs)
        self.inconsistent = False
        self.bad_tags: list = []

    @staticmethod
    def _normalize(row: dict, rhs):
        g = 0
        for v in row.values():
            g = gcd(g, abs(v))
        if g > 1:
            row = {c: v // g for c, v in row.items()}
            rhs = rhs / g
        return row, rhs

    def add_row(self, row: dict, rhs, tag=None):
        row = {c: v for c, v in row.items() if v}
        rhs = Fraction(rhs)
        # eliminate existing pivots from the incoming row
        while row:
            cols = [c for c in row if c in self.pivots]
            if not cols:
                break
            c = cols[0]
            prow, prhs = self.pivots[c]
            a, b = prow[c], row[c]
            new = {}
            for col, v in row.items():
                new[col] = a * v
            for col, v in prow.items():
                new[col] = new.get(col, 0) - b * v
            row = {col: v for col, v in new.items() if v}
            rhs = a * rhs - b * prhs
        if not row:
            if rhs != 0:
                self.inconsistent = True
                self.bad_tags.append(tag)
            return
        row, rhs = self._normalize(row, rhs)
        piv = min(row)
        if row[piv] < 0:
            row = {c: -v for c, v in row.items()}
            rhs = -rhs
        # eliminate the new pivot column from stored rows
        for c, (prow, prhs) in list(self.pivots.items()):
            if piv in prow:
                a, b = row[piv], prow[piv]
                new = {}
                for col, v in prow.items():
                    new[col] = a * v
                for col, v in row.items():
                    new[col] = new.get(col, 0) - b * v
                new = {col: v for col, v in new.items() if v}
                nrhs = a * prhs - b * rhs
                new, nrhs = self._normalize(new, nrhs)
                self.pivots[c] = (new, nrhs)
        self.pivots[piv] = (row, rhs)

    def solve(self, ncols: int):
        """(particular solution, kernel basis) over all columns 0..ncols-1."""
        if self.inconsistent:
            return None, None
        particular = [Fraction(0)] * ncols
        pivot_cols = set(self.pivots)
        for c, (row, rhs) in self.pivots.items():
            particular[c] = Fraction(rhs, row[c])
        kernel = []
        for f in range(ncols):
            if f in pivot_cols:
                continue
            vec = [Fraction(0)] * ncols
            vec[f] = Fraction(1)
            for c, (row, _) in self.pivots.items():
                if f in row:
                    vec[c] = Fraction(-row[f], row[c])
            kernel.append(vec)
        return particular, kernel


# ---------------------------------------------------------------------------
# the consistency solver
# ---------------------------------------------------------------------------

@dataclass
class UnknownBlock:
    """A symbolic homogeneous polynomial multiplying a known class.

    The block contributes multiplier * U to the equation side it sits on;
    U ranges over monomials in `variables` of total degree `degree`,
    within the ring caps tightened by `var_bounds`.
    """

    label: str
    multiplier: ClassPoly
    variables: tuple
    degree: int
    var_bounds: dict = field(default_factory=dict)

    def basis(self, spec: RingSpec):
        idxs = [spec.var_index(v) for v in self.variables]
        caps = [min(spec.caps[i], self.var_bounds.get(v, spec.caps[i]))
                for v, i in zip(self.variables, idxs)]
        out = []
        for combo in _bounded_exponents(self.degree, caps):
            exp = [0] * spec.nvars
            for i, e in zip(idxs, combo):
                exp[i] = e
            out.append(tuple(exp))
        return out


def _bounded_exponents(total, caps):
    if not caps:
        if total == 0:
            yield ()
        return
    for first in range(0, min(total, caps[0]) + 1):
        for rest in _bounded_exponents(total - first, caps[1:]):
            yield (first,) + rest


@dataclass
class SolveResult:
    total: ClassPoly              # the constrained class (residual mode)
    unknowns: dict                # label -> ClassPoly
    kernel_dim: int


def _perm_orbit_pairs(spec: RingSpec, symmetry, monomials):
    pairs = []
    for perm in symmetry:
        for e in monomials:
            img = _apply_perm_exp(e, perm, spec)
            if img != e:
                pairs.append((e, img))
    return pairs


def _apply_perm_exp(exp, perm, spec: RingSpec):
    npts = spec.num_y + 1
    new = [0] * spec.nvars
    new[-1] = exp[-1]
    for i in range(npts):
        new[perm[i]] = exp[i]
    return tuple(new)


def _check_no_symbolic_d(*classes):
    for c in classes:
        for coef in c.terms.values():
            if coef.degree > 0:
                return False
    return True


def consistency_solve(known: ClassPoly, unknowns, *, bounds=None, symmetry=(),
                      equation_mode=False, unique_labels=None, d_samples=None):
    """Solve  total = known + sum(multiplier_j * U_j)  for the unknown
    homogeneous polynomials U_j.

    In residual mode (default) the constraints are on `total`: every
    monomial exceeding a per-variable bound vanishes, and total is invariant
    under the given point permutations; uniqueness means the total class is
    pinned.  In equation mode the whole equation is imposed coefficient-wise,
    sum(multiplier_j * U_j) = known (used to invert a degeneration for an
    unknown stratum class); uniqueness then means the blocks named in
    unique_labels are pinned.

    Multipliers must have d-free coefficients (work over the Q-basis); a
    d-dependent known side is instantiated at integer d values and the
    solution coefficients are interpolated back (degree <= n).

    Raises NoSolution or NonUnique accordingly.
    """
    spec = known.spec
    bounds = bounds or {}
    if not _check_no_symbolic_d(*[u.multiplier for u in unknowns]):
        raise DegenError("multipliers must be d-free; solve over the Q-basis")

    basis = []
    col_of = {}
    products = []   # per column: multiplier * monomial as ClassPoly
    for u in unknowns:
        for mono in u.basis(spec):
            col_of[(u.label, mono)] = len(basis)
            basis.append((u.label, mono))
            products.append(u.multiplier * ClassPoly(spec, {mono: rg.ONE},
                                                     _validated=True))
    ncols = len(basis)

    # the coefficient matrix is d-free; only the right-hand side can carry d
    d_degree = max((c.degree for c in known.terms.values()), default=0)
    if d_degree == 0:
        sample_points = [None]
    else:
        if d_samples is None:
            base = spec.n + 3
            d_samples = list(range(base, base + spec.n + 3))
        sample_points = list(d_samples)

    # collect the monomial space that can occur
    support = set(known.terms)
    for p in products:
        support.update(p.terms)

    bound_idx = {spec.var_index(v): b for v, b in bounds.items()}

    def row_for(mono):
        row = {}
        for col, p in enumerate(products):
            c = p.terms.get(mono)
            if c is not None:
                val = c.constant_value()
                if val.denominator != 1:
                    # scale handled by the solver's integer rows
                    raise DegenError("non-integer multiplier coefficient")
                if val:
                    row[col] = int(val)
        return row

    if equation_mode:
        constrained = sorted(support)
        sym_pairs = []
    else:
        constrained = sorted(e for e in support
                             if any(e[i] > b for i, b in bound_idx.items()))
        sym_pairs = _perm_orbit_pairs(spec, symmetry, sorted(support))

    solver = ExactLinearSolver()
    row_cache = {}
    rhs_rows = []   # (row, list of per-sample rhs) kept for interpolation

    def known_coef(mono, d0):
        c = known.terms.get(mono)
        if c is None:
            return Fraction(0)
        return c.eval(d0) if d0 is not None else c.constant_value()

    per_sample_solutions = []
    for d0 in sample_points:
        s = ExactLinearSolver()
        for mono in constrained:
            row = row_cache.get(mono)
            if row is None:
                row = row_for(mono)
                row_cache[mono] = row
            # equation mode: sum(products) = known; residual mode: the
            # total's coefficient known + sum must vanish on banned monomials
            rhs = known_coef(mono, d0) if equation_mode else -known_coef(mono, d0)
            s.add_row(row, rhs, tag=mono)
        for e1, e2 in sym_pairs:
            r1 = row_cache.get(e1)
            if r1 is None:
                r1 = row_for(e1)
                row_cache[e1] = r1
            r2 = row_cache.get(e2)
            if r2 is None:
                r2 = row_for(e2)
                row_cache[e2] = r2
            row = dict(r1)
            for c, v in r2.items():
                row[c] = row.get(c, 0) - v
                if row[c] == 0:
                    del row[c]
            rhs = known_coef(e2, d0) - known_coef(e1, d0)
            s.add_row(row, rhs, tag=(e1, e2))
        particular, kernel = s.solve(ncols)
        if particular is None:
            raise NoSolution("consistency constraints are inconsistent; "
                             f"first conflicts at {s.bad_tags[:4]}")
        per_sample_solutions.append(particular)
        kernel_basis = kernel  # same matrix for all samples

    # uniqueness: in residual mode a kernel vector must not change the total
    # class; in equation mode it must not touch the target blocks
    bad_kernel = 0
    for vec in kernel_basis:
        if equation_mode:
            targets = unique_labels if unique_labels is not None else \
                [u.label for u in unknowns]
            moved = any(v and basis[col][0] in targets
                        for col, v in enumerate(vec))
            if moved:
                bad_kernel += 1
        else:
            delta = ClassPoly.zero(spec)
            for col, v in enumerate(vec):
                if v:
                    delta = delta + products[col] * v
            if not delta.is_zero():
                bad_kernel += 1
    if bad_kernel:
        raise NonUnique(
            f"constraints leave the class underdetermined ({bad_kernel} directions)",
            kernel_dim=bad_kernel)

    # reassemble unknowns (interpolate in d if several samples were used)
    if len(per_sample_solutions) == 1:
        u_coeffs = [DPoly((v,)) for v in per_sample_solutions[0]]
    else:
        u_coeffs = []
        for col in range(ncols):
            samples = [(d0, sol[col]) for d0, sol in zip(sample_points,
                                                         per_sample_solutions)]
            u_coeffs.append(interp.interpolate_exact(samples, spec.n))

    solved = {}
    for u in unknowns:
        terms = {}
        for col, (label, mono) in enumerate(basis):
            if label == u.label and not u_coeffs[col].is_zero():
                terms[mono] = u_coeffs[col]
        solved[u.label] = ClassPoly(spec, terms, _validated=True)

    total = known
    contribution = ClassPoly.zero(spec)
    for u in unknowns:
        contribution = contribution + u.multiplier * solved[u.label]
    total = known + contribution

    if not equation_mode:
        # the constrained class must actually satisfy the bounds
        for e in total.terms:
            if any(e[i] > b for i, b in bound_idx.items()):
                raise NoSolution("solved class still violates its bounds")
    return SolveResult(total=total, unknowns=solved, kernel_dim=0)


# ---------------------------------------------------------------------------
# chains for linear types (multiplicity-2 families and ordinary points)
# ---------------------------------------------------------------------------

def _sym_group_gens(slots):
    """Adjacent transpositions of the given point slots (0=X, i=Y_i) as full
    permutation tuples over npts slots."""
    def perm_swapping(npts, a, b):
        p = list(range(npts))
        p[a], p[b] = p[b], p[a]
        return tuple(p)
    return lambda npts: [perm_swapping(npts, slots[i], slots[i + 1])
                         for i in range(len(slots) - 1)]


def corank_block(current: ClassPoly, s: int, n: int) -> ClassPoly:
    """Main term of the block adjoining the s-th kernel point to a
    multiplicity-2 stratum: the alternating coordinate-plane recursion minus
    the top dependency locus,

      current * ( sum_{i=0}^{n+1-s} (-1)^i (Q+Y_s)^{n+1-s-i} h_i(X, Y_<s)
                  - h_{n+1-s}(X, Y_1..Y_s) ).
    """
    spec = current.spec
    q = ClassPoly.gen(spec, "Q")
    ys = ClassPoly.gen(spec, f"Y{s}")
    older = ["X"] + [f"Y{j}" for j in range(1, s)]
    c_s = n + 1 - s
    block = ClassPoly.zero(spec)
    for i in range(c_s + 1):
        block = block + ((-1) ** i) * (q + ys) ** (c_s - i) * rg.hsym(spec, i, older)
    block = block - rg.hsym(spec, c_s, older + [f"Y{s}"])
    return current * block


def _flag_cycle_unknowns(spec: RingSpec, upto_point: int, total_degree: int,
                         y_names, all_subsets: bool = False):
    """Unknown residual blocks over dependency cycles of the tracked points.

    The default is the flag chain {x=y1} in {x,y1,y2 dep} in ...; with
    all_subsets every dependency locus of a subset of (x, y_1..y_m) gets its
    own unknown (needed when several points play symmetric roles).  A
    two-point cycle's unknown drops one of the two generators: multiplying
    the diagonal class, they are interchangeable by the telescoping
    identity.
    """
    unknowns = []
    n = spec.n
    all_pts = ["X"] + [f"Y{i}" for i in range(1, upto_point + 1)]
    if all_subsets:
        subsets = []
        for k in range(2, upto_point + 2):
            subsets.extend(itertools.combinations(all_pts, k))
    else:
        subsets = [tuple(all_pts[:j]) for j in range(2, upto_point + 2)]
    for pts in subsets:
        cyc = rg.hsym(spec, n + 2 - len(pts), pts)
        deg = total_degree - (n + 2 - len(pts))
        if deg < 0:
            continue
        drop = pts[1] if len(pts) == 2 else None
        variables = tuple(["Q", "X"] + [v for v in y_names if v != drop])
        if drop == "X":  # pragma: no cover - X is always listed first
            variables = tuple(["Q"] + list(y_names))
        unknowns.append(UnknownBlock(label="dep_" + "_".join(pts),
                                     multiplier=-cyc,
                                     variables=variables, degree=deg))
    return unknowns


_CHAIN_CACHE: dict = {}


def corank_lifted(n: int, r: int, num_y: int | None = None,
                  f_cap: int | None = None) -> ClassPoly:
    """Class of the lifted stratum of multiplicity-2 points of corank r,
    with the singular point and r kernel points tracked; over the Q-basis,
    Q = (d-2)X + F."""
    if not (0 <= r <= n):
        raise DegenError("need 0 <= r <= n")
    num_y = num_y if num_y is not None else r
    key = ("corank", n, r, num_y, f_cap)
    if key in _CHAIN_CACHE:
        return _CHAIN_CACHE[key]
    codim = sum(n + 1 - s for s in range(r + 1))
    spec = RingSpec(n=n, num_y=num_y, f_cap=f_cap if f_cap else codim + 2)
    q = ClassPoly.gen(spec, "Q")
    x = ClassPoly.gen(spec, "X")
    current = (q + x) ** (n + 1)
    for s in range(1, r + 1):
        main = corank_block(current, s, n)
        if s == 1:
            current = main
        else:
            total_degree = sum(n + 1 - j for j in range(s + 1))
            y_names = [f"Y{i}" for i in range(1, s + 1)]
            unknowns = _flag_cycle_unknowns(spec, s - 1, total_degree, y_names)
            gens = _sym_group_gens(list(range(s + 1)))(spec.num_y + 1)
            bounds = {v: n - s for v in ["X"] + y_names}
            res = consistency_solve(main, unknowns, bounds=bounds, symmetry=gens)
            current = res.total
        # the stratum with s kernel points tracked satisfies both
        # consistency conditions; guard every run
        assert all(current.max_exponent(v) <= n - s
                   for v in ["X"] + [f"Y{i}" for i in range(1, s + 1)])
    _CHAIN_CACHE[key] = current
    return current


def scalar_steps(current: ClassPoly, step_classes, *, n: int, num_points: int,
                 bounds, symmetry=()) -> SolveResult:
    """Apply condition components transversal away from the dependency flag
    and solve for the residual classes by consistency."""
    spec = current.spec
    prod = current
    for c in step_classes:
        prod = prod * c
    total_degree = max(sum(e) for e in prod.terms) if not prod.is_zero() else 0
    y_names = [f"Y{i}" for i in range(1, num_points + 1)]
    unknowns = _flag_cycle_unknowns(spec, num_points, total_degree, y_names,
                                    all_subsets=True)
    return consistency_solve(prod, unknowns, bounds=bounds, symmetry=symmetry)


def chain_linear(diagram: dg.NewtonDiagram, f_cap: int | None = None) -> ClassPoly:
    """Lifted class of a linear type, over the Q-basis.

    Supported: ordinary multiple points (single tensor condition) and the
    multiplicity-2 families (kernel-point blocks plus higher scalar
    conditions: the A-D-E range, corank forms, X9 and friends).  Higher
    multiplicity vector blocks have no closed recursion here and raise
    UnsupportedType; those strata enter through recipes.
    """
    lifted = cnd.covariant_conditions(diagram, f_cap=f_cap)
    n = diagram.n
    p_mult, _ = dg.multiplicity_and_determinacy(diagram)
    conds = lifted.conditions
    if len(conds) == 1:
        return cnd.ordinary_point_class(n, p_mult - 1, lifted.ring)
    if p_mult != 2:
        raise UnsupportedType(
            "chains are implemented for multiplicity-2 families and ordinary "
            "points; use a degeneration recipe for this type")

    labels = [lab for lab, _ in lifted.aux_layout[1]]
    m = len(labels)
    spec = lifted.ring
    current = corank_lifted(n, m, num_y=spec.num_y, f_cap=spec.f_cap)

    # higher-level conditions are fully contracted scalars
    scalars = []
    for c in conds:
        if c.order < 2 or (c.order == 2 and c.free_indices > 0):
            continue
        if c.order == 2:
            continue
        if c.free_indices > 0:
            raise UnsupportedType("free-slot conditions above the quadratic level")
        for _ in range(c.component_count):
            scalars.append(cnd.condition_class(c, spec, d_offset=2))
    if not scalars:
        return current

    # end-type consistency data from the flag
    space_of = dict(lifted.aux_layout[1])
    bounds = {}
    for i, lab in enumerate(labels, start=1):
        fiber = len(space_of[lab])  # dim of the lifted space minus 1
        bounds[f"Y{i}"] = n - fiber
    sym = _end_symmetry(lifted)
    res = scalar_steps(current, scalars, n=n, num_points=m, bounds=bounds,
                       symmetry=sym)
    return res.total


def _end_symmetry(lifted: cnd.LiftedStratumSpec):
    """Permutations preserving the flag: points attached to the same space
    are interchangeable, and for a pure corank form X joins the group."""
    layout = lifted.aux_layout[1]
    groups: dict = {}
    for i, (lab, space) in enumerate(layout, start=1):
        groups.setdefault(space, []).append(i)
    npts = len(layout) + 1
    gens = []
    pure_quadratic = all(c.order <= 2 for c in lifted.conditions)
    for space, idxs in groups.items():
        slots = list(idxs)
        if pure_quadratic:
            slots = [0] + slots
        for a, b in zip(slots, slots[1:]):
            p = list(range(npts))
            p[a], p[b] = p[b], p[a]
            gens.append(tuple(p))
    return gens


# named-type front end -------------------------------------------------------

NAMED_DIAGRAMS = {
    "A1": lambda n: [(2,) + (0,) * (n - 1)] + _squares(n, 1),
    "A2": lambda n: [(3,) + (0,) * (n - 1)] + _squares(n, 1),
    "A3": lambda n: [(4,) + (0,) * (n - 1)] + _squares(n, 1),
    "A4": lambda n: [(5,) + (0,) * (n - 1)] + _squares(n, 1),
    "D4": lambda n: [(3,) + (0,) * (n - 1), (0, 3) + (0,) * (n - 2)] + _squares(n, 2),
    "D5": lambda n: [(4,) + (0,) * (n - 1), (1, 2) + (0,) * (n - 2)] + _squares(n, 2),
    "D6": lambda n: [(5,) + (0,) * (n - 1), (1, 2) + (0,) * (n - 2)] + _squares(n, 2),
    "E6": lambda n: [(4,) + (0,) * (n - 1), (0, 3) + (0,) * (n - 2)] + _squares(n, 2),
    "X9": lambda n: [(4,) + (0,) * (n - 1), (0, 4) + (0,) * (n - 2)] + _squares(n, 2),
    "P8": lambda n: [(3,) + (0,) * (n - 1), (0, 3) + (0,) * (n - 2),
                     (0, 0, 3) + (0,) * (n - 3)] + _squares(n, 3),
}


def _squares(n, skip):
    out = []
    for i in range(skip, n):
        e = [0] * n
        e[i] = 2
        out.append(tuple(e))
    return out


def named_diagram(name: str, n: int, p: int | None = None) -> dg.NewtonDiagram:
    if name == "ordinary":
        if p is None:
            raise DegenError("ordinary needs p")
        return dg.build_diagram(n, [tuple((p + 1) * (i == j) for j in range(n))
                                    for i in range(n)], name=name)
    if name.startswith("corank"):
        r = int(name[6:]) if len(name) > 6 else p
        pts = []
        for i in range(n):
            e = [0] * n
            e[i] = 3 if i < r else 2
            pts.append(tuple(e))
        return dg.build_diagram(n, pts, name=name)
    if name not in NAMED_DIAGRAMS:
        raise DegenError(f"no named diagram for {name!r}")
    if name == "P8" and n < 3:
        raise DegenError("P8 needs n >= 3")
    return dg.build_diagram(n, NAMED_DIAGRAMS[name](n), name=name)


def minimal_lifting(cls: ClassPoly, fiber_dims) -> ClassPoly:
    """Project a lifted class down to the (x)-only lifting: take the
    coefficient of the top occurring power Y_i^(n - r_i) for every point."""
    n = cls.spec.n
    target = {f"Y{i}": n - r for i, r in enumerate(fiber_dims, start=1)}
    return rg.gysin_extract(cls, target)


def lifted_class(name: str, n: int, **params) -> ClassPoly:
    """Engine-computed lifted class of a named type (Q-basis)."""
    key = (name, n, tuple(sorted(params.items())))
    if key in _CHAIN_CACHE:
        return _CHAIN_CACHE[key]
    if name == "A4":
        out = a4_lifted(n)
    elif name == "D6":
        raise UnsupportedType("no verified engine recipe for D6; see the catalog")
    elif name == "ordinary":
        out = cnd.ordinary_point_class(n, params["p"])
    elif name == "corank":
        out = corank_lifted(n, params["r"])
    else:
        out = chain_linear(named_diagram(name, n, params.get("p")))
    _CHAIN_CACHE[key] = out
    return out


FIBER_DIMS = {
    "A2": (1,), "A3": (1,), "A4": (1,),
    "D4": (2, 2), "D5": (1, 2), "E6": (1, 2), "X9": (2, 2),
    "P8": (3, 3, 3),
}


def engine_minimal_class(name: str, n: int, **params) -> ClassPoly:
    """Minimal-lifting class [Sigma~(x)] computed by the engine (Q-basis)."""
    cls = lifted_class(name, n, **params)
    if name == "ordinary":
        return cls
    if name == "corank":
        r = params["r"]
        dims = (r,) * r
    else:
        dims = FIBER_DIMS[name]
        dims = dims[:cls.spec.num_y]
    return minimal_lifting(cls, dims)


def engine_degree(name: str, n: int, **params) -> DPoly:
    """Stratum degree computed by the engine, as a polynomial in d."""
    from singstrata.closedforms import class_offset, degree_from_class
    cls = engine_minimal_class(name, n, **params)
    k = class_offset(name, **params)
    return degree_from_class(_to_x_ring(cls), n, k)


def _to_x_ring(cls: ClassPoly) -> ClassPoly:
    """Re-express a class with no Y content in the (x)-only ring."""
    spec = cls.spec
    out_spec = RingSpec(n=spec.n, num_y=0, f_cap=spec.f_cap,
                        d_symbolic=spec.d_symbolic)
    terms = {}
    for exp, c in cls.terms.items():
        if any(exp[i] for i in range(1, spec.num_y + 1)):
            raise DegenError("class still depends on auxiliary points")
        terms[(exp[0], exp[-1])] = c
    return ClassPoly(out_spec, terms)


def embed_ring(cls: ClassPoly, target: RingSpec, y_map=None) -> ClassPoly:
    """Embed a class in a ring with a different set of auxiliary points.
    y_map sends source Y indices to target Y indices (identity default)."""
    src = cls.spec
    y_map = y_map or {i: i for i in range(1, src.num_y + 1)}
    terms = {}
    for exp, c in cls.terms.items():
        new = [0] * target.nvars
        new[0] = exp[0]
        new[-1] = exp[-1]
        for i in range(1, src.num_y + 1):
            if exp[i]:
                j = y_map.get(i)
                if j is None:
                    raise DegenError(f"no target slot for Y{i}")
                new[j] = exp[i]
        terms[tuple(new)] = c
    return ClassPoly(target, terms)


# ---------------------------------------------------------------------------
# recipes for non-linear types
# ---------------------------------------------------------------------------

def invert_division(recipe: DegenerationRecipe) -> ClassPoly:
    """Recover the class of the source stratum from one degeneration:
    divide the assembled right-hand side by the degenerating divisor(s)."""
    total = None
    for cls, mult in recipe.rhs:
        piece = cls * mult
        total = piece if total is None else total + piece
    if total is None:
        raise DegenError("recipe needs at least one right-hand side stratum")
    for spec in recipe.residuals:
        if not isinstance(spec.clazz, ClassPoly):
            raise DegenError("invert_division needs solved residual classes")
        total = total + spec.clazz * spec.multiplicity
    out = total
    for divisor, power in recipe.divisor:
        for _ in range(power):
            out = rg.divide_exact(out, divisor)
    return out


def marked_p8_class(n: int, f_cap: int) -> ClassPoly:
    """Class of the corank-3 partial lifting with points (x, y1, y2) and the
    kernel cubic singled out along y1:  start from the full corank-3 class,
    read off the leading Y3 coefficient (the partial lifting), cut by
    f^(3)(y1,y1,y1) = 0 and solve the residuals by consistency.

    The y1 fiber is a cubic surface in P^3 (degree-3, dimension-2 fibers),
    so Y1 powers are bounded by n-2; y2 keeps the P^3 fiber bound n-3.
    """
    if n < 3:
        raise DegenError("the corank-3 branch needs n >= 3")
    full = corank_lifted(n, 3)
    partial_small = rg.gysin_extract(full, {"Y3": n - 3})
    spec = RingSpec(n=n, num_y=2, f_cap=f_cap)
    partial = embed_ring(partial_small, spec)
    q = ClassPoly.gen(spec, "Q")
    x = ClassPoly.gen(spec, "X")
    y1 = ClassPoly.gen(spec, "Y1")
    cut = partial * (q + 3 * y1 - x)
    total_degree = max(sum(e) for e in cut.terms)
    unknowns = _flag_cycle_unknowns(spec, 2, total_degree, ["Y1", "Y2"])
    res = consistency_solve(cut, unknowns,
                            bounds={"Y1": n - 2, "Y2": n - 3})
    return res.total


def a4_lifted(n: int) -> ClassPoly:
    """Class of the lifted stratum with a five-fold tangency direction
    (x, y1 tracked), recovered by inverting its corank-raising degeneration.

    Forcing a second kernel direction y2 onto the stratum splits it into
    the four-fold-with-kernel-line branch and (for n >= 3) the corank-3
    branch carrying the degenerate kernel cubic, each with multiplicity 2;
    the remaining residual pieces over the dependency flag and the unknown
    source class are pinned jointly by the consistency bounds.
    """
    codim_d5 = 3 * n + 2
    spec = RingSpec(n=n, num_y=2, f_cap=codim_d5 + 4)
    d5 = chain_linear(named_diagram("D5", n), f_cap=spec.f_cap)
    if d5.spec != spec:
        d5 = embed_ring(d5, spec)
    q = ClassPoly.gen(spec, "Q")
    y2 = ClassPoly.gen(spec, "Y2")
    rhs = d5 * 2
    if n >= 3:
        rhs = rhs + marked_p8_class(n, spec.f_cap) * 2

    # equation:  U * (Q+Y2)^(n-1) + residual pieces = rhs, with U bounded by
    # the tangent-line fibration (no Y1 powers above n-1)
    divisor_power = n - 1
    u_degree = 2 * n + 3
    unknowns = [UnknownBlock(label="A4", multiplier=(q + y2) ** divisor_power,
                             variables=("Q", "X", "Y1"), degree=u_degree,
                             var_bounds={"Y1": n - 1})]
    total_degree = u_degree + divisor_power
    unknowns.extend(_flag_cycle_unknowns(spec, 2, total_degree, ["Y1", "Y2"],
                                         all_subsets=True))
    res = consistency_solve(rhs, unknowns, equation_mode=True,
                            unique_labels=["A4"])
    return res.unknowns["A4"]
