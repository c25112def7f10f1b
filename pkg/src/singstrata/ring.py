"""Exact arithmetic in truncated multi-graded cohomology rings.

The ambient space of an enumeration run is a product of projective spaces:
the space P^n_x of singular points, auxiliary point factors P^n_{y_1}, ...,
P^n_{y_r}, and the parameter space of hypersurfaces of degree d.  Its
cohomology ring is

    Z[d][X, Y_1, ..., Y_r, F] / (X^{n+1}, Y_i^{n+1}, F^{f_cap+1})

where coefficients are polynomials in the symbolic degree d.  The cap on F
is an effective truncation only: every class produced by the engine has
F-degree bounded by the number of defining conditions, so the cap is chosen
per run and never reached by a valid computation.

Classes are stored sparsely as a mapping from exponent tuples
(e_X, e_{Y1}, ..., e_{Yr}, e_F) to coefficients.  All arithmetic is exact;
rational intermediate coefficients are permitted (division by factorials,
linear solving) but the classes of actual strata are integral.

The same container serves two bases.  In the canonical basis the last slot
is the hyperplane class F of the parameter space.  Presentation and
symmetry checks use the relative generator Q = (d-k)X + F instead; the
functions :func:`expand_q` and :func:`to_q_basis` convert between the two.
Which basis a given value is in is a caller convention, tracked where it
matters (serialization, caching) by an explicit tag.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction


class RingError(Exception):
    """Base for errors raised by ring operations."""


class ExponentOutOfRange(RingError):
    """A stored exponent would exceed its truncation cap."""


class SpecMismatch(RingError):
    """Operands live in rings with different specs."""


class UnknownVariable(RingError):
    """A named generator does not exist in this ring."""


class NotDivisible(RingError):
    """divide_exact: the dividend is not a multiple of the divisor."""


class BadDivisor(RingError):
    """divide_exact: the divisor's F-linear part is not a scalar unit."""


# ---------------------------------------------------------------------------
# Coefficients: exact polynomials in the degree parameter d
# ---------------------------------------------------------------------------

def _as_frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


class DPoly:
    """A polynomial in d with exact rational coefficients.

    Immutable.  Stored densely, ascending powers, no trailing zeros.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [_as_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("DPoly is immutable")

    @classmethod
    def const(cls, c) -> "DPoly":
        return cls((c,))

    @classmethod
    def d_minus(cls, k) -> "DPoly":
        """The polynomial d - k."""
        return cls((-k, 1))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def __add__(self, other):
        other = _coerce_dpoly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return DPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return DPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = _coerce_dpoly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce_dpoly(other) - self

    def __mul__(self, other):
        other = _coerce_dpoly(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return DPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return DPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_frac(other)
        return DPoly(tuple(c / other for c in self.coeffs))

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out = DPoly((1,))
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        other = _coerce_dpoly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    def eval(self, d_value) -> Fraction:
        x = _as_frac(d_value)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            num = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if k == 0:
                body = num
            else:
                dk = "d" if k == 1 else f"d^{k}"
                body = dk if mag == 1 else f"{num}*{dk}"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"DPoly({self})"


_TERM_RE = re.compile(
    r"^\s*(?P<coef>-?\d+(?:/\d+)?)?\s*(?P<star>\*)?\s*(?P<d>d(?:\^(?P<pow>\d+))?)?\s*$"
)


def parse_dpoly(text: str) -> DPoly:
    """Parse the canonical string form produced by ``str(DPoly)``."""
    s = text.strip()
    if s == "0":
        return DPoly()
    s = s.replace("- ", "+-").replace("+ ", "+")
    if s.startswith("-"):
        s = "-" + s[1:].lstrip()
    pieces = [p for p in s.split("+") if p.strip()]
    coeffs: dict[int, Fraction] = {}
    for piece in pieces:
        m = _TERM_RE.match(piece)
        if not m or (m.group("coef") is None and m.group("d") is None):
            raise ValueError(f"cannot parse coefficient string {text!r}")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("coef") == "-":  # pragma: no cover
            coef = Fraction(-1)
        k = 0
        if m.group("d"):
            k = int(m.group("pow")) if m.group("pow") else 1
        coeffs[k] = coeffs.get(k, Fraction(0)) + coef
    out = [Fraction(0)] * (max(coeffs) + 1)
    for k, c in coeffs.items():
        out[k] = c
    return DPoly(out)


def _coerce_dpoly(x):
    if isinstance(x, DPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return DPoly((x,))
    return NotImplemented


D = DPoly((0, 1))
ONE = DPoly((1,))


# ---------------------------------------------------------------------------
# Ring spec and classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingSpec:
    """Shape of a truncated multi-graded cohomology ring.

    n        ambient dimension; X^{n+1} = 0 and Y_i^{n+1} = 0.
    num_y    number of auxiliary point factors.
    f_cap    effective truncation exponent for F.
    d_symbolic   whether coefficients are polynomials in d or plain numbers.
    """

    n: int
    num_y: int
    f_cap: int
    d_symbolic: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.num_y < 0:
            raise ValueError("num_y must be >= 0")
        if self.f_cap < 1:
            raise ValueError("f_cap must be >= 1")

    @property
    def nvars(self) -> int:
        return self.num_y + 2

    @property
    def caps(self) -> tuple:
        return (self.n,) + (self.n,) * self.num_y + (self.f_cap,)

    @property
    def var_names(self) -> tuple:
        return ("X",) + tuple(f"Y{i}" for i in range(1, self.num_y + 1)) + ("F",)

    def var_index(self, name: str) -> int:
        if name == "X":
            return 0
        if name in ("F", "Q"):
            return self.num_y + 1
        if name.startswith("Y"):
            try:
                i = int(name[1:])
            except ValueError:
                raise UnknownVariable(name) from None
            if 1 <= i <= self.num_y:
                return i
        raise UnknownVariable(f"{name} not among {self.var_names}")


class ClassPoly:
    """An element of a truncated multi-graded cohomology ring.

    Terms map exponent tuples (e_X, e_{Y1}, ..., e_F) to DPoly coefficients.
    Values are immutable by convention: no method mutates ``terms`` after
    construction, so instances are safe to share between threads.
    """

    __slots__ = ("spec", "terms")

    def __init__(self, spec: RingSpec, terms: dict | None = None, *, _validated=False):
        self.spec = spec
        if terms is None:
            terms = {}
        if not _validated:
            clean = {}
            for exp, coef in terms.items():
                exp = tuple(exp)
                if len(exp) != spec.nvars:
                    raise ExponentOutOfRange(
                        f"exponent tuple {exp} has length {len(exp)}, expected {spec.nvars}")
                for e, cap in zip(exp, spec.caps):
                    if e < 0 or e > cap:
                        raise ExponentOutOfRange(f"exponent {exp} exceeds caps {spec.caps}")
                coef = coef if isinstance(coef, DPoly) else DPoly((coef,))
                if not coef.is_zero():
                    clean[exp] = clean.get(exp, DPoly()) + coef
            terms = {e: c for e, c in clean.items() if not c.is_zero()}
        self.terms = terms

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, spec: RingSpec) -> "ClassPoly":
        return cls(spec, {}, _validated=True)

    @classmethod
    def one(cls, spec: RingSpec) -> "ClassPoly":
        return cls(spec, {(0,) * spec.nvars: ONE}, _validated=True)

    @classmethod
    def gen(cls, spec: RingSpec, name: str) -> "ClassPoly":
        i = spec.var_index(name)
        exp = [0] * spec.nvars
        exp[i] = 1
        return cls(spec, {tuple(exp): ONE}, _validated=True)

    @classmethod
    def scalar(cls, spec: RingSpec, c) -> "ClassPoly":
        c = c if isinstance(c, DPoly) else DPoly((c,))
        if c.is_zero():
            return cls.zero(spec)
        return cls(spec, {(0,) * spec.nvars: c}, _validated=True)

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_integral(self) -> bool:
        return all(c.is_integral() for c in self.terms.values())

    def coefficient(self, exp) -> DPoly:
        return self.terms.get(tuple(exp), DPoly())

    def total_degrees(self):
        return sorted({sum(e) for e in self.terms})

    def max_exponent(self, name: str) -> int:
        i = self.spec.var_index(name)
        return max((e[i] for e in self.terms), default=0)

    def support(self):
        return sorted(self.terms)

    def __eq__(self, other):
        if not isinstance(other, ClassPoly):
            return NotImplemented
        return self.spec == other.spec and self.terms == other.terms

    def __repr__(self):
        return f"ClassPoly({to_string(self)})"

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "ClassPoly"):
        if self.spec != other.spec:
            raise SpecMismatch(f"{self.spec} vs {other.spec}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, DPoly)):
            other = ClassPoly.scalar(self.spec, other)
        if not isinstance(other, ClassPoly):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, DPoly()) + c
            if s.is_zero():
                out.pop(exp, None)
            else:
                out[exp] = s
        return ClassPoly(self.spec, out, _validated=True)

    __radd__ = __add__

    def __neg__(self):
        return ClassPoly(self.spec, {e: -c for e, c in self.terms.items()}, _validated=True)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, DPoly)):
            other = ClassPoly.scalar(self.spec, other)
        if not isinstance(other, ClassPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, DPoly)):
            c = other if isinstance(other, DPoly) else DPoly((other,))
            if c.is_zero():
                return ClassPoly.zero(self.spec)
            return ClassPoly(self.spec, {e: k * c for e, k in self.terms.items()},
                             _validated=True)
        if not isinstance(other, ClassPoly):
            return NotImplemented
        self._check(other)
        caps = self.spec.caps
        nv = self.spec.nvars
        out: dict = {}
        # truncation drops overflowing terms silently: nilpotency of the
        # generators, the one place exponent overflow is not an error
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(e1[i] + e2[i] for i in range(nv))
                ok = True
                for v, cap in zip(e, caps):
                    if v > cap:
                        ok = False
                        break
                if not ok:
                    continue
                prod = c1 * c2
                s = out.get(e)
                out[e] = prod if s is None else s + prod
        return ClassPoly(self.spec,
                         {e: c for e, c in out.items() if not c.is_zero()},
                         _validated=True)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out = ClassPoly.one(self.spec)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out


# ---------------------------------------------------------------------------
# Named operations
# ---------------------------------------------------------------------------

def make_poly(spec: RingSpec, terms) -> ClassPoly:
    """Build a class from (exponent tuple, coefficient) pairs.

    Exponents beyond the truncation caps are an error here, never silently
    dropped; only multiplication truncates.
    """
    if isinstance(terms, dict):
        terms = terms.items()
    acc: dict = {}
    for exp, coef in terms:
        exp = tuple(exp)
        coef = coef if isinstance(coef, DPoly) else DPoly((coef,))
        acc[exp] = acc.get(exp, DPoly()) + coef
    return ClassPoly(spec, acc)


def mul(a: ClassPoly, b: ClassPoly) -> ClassPoly:
    return a * b


def add(a: ClassPoly, b: ClassPoly) -> ClassPoly:
    return a + b


def gysin_extract(a: ClassPoly, which: dict) -> ClassPoly:
    """Coefficient of a specified monomial in the named variables.

    ``which`` maps variable names to target exponents.  The result is a
    class in the remaining variables (extracted slots are zero).  Extracting
    X^n and the top occurring Y powers implements the projection to the
    parameter space; the pure-F coefficient of that is the stratum degree.
    """
    spec = a.spec
    idx = {}
    for name, e in which.items():
        i = spec.var_index(name)
        if e < 0 or e > spec.caps[i]:
            raise ExponentOutOfRange(f"target exponent {name}^{e} exceeds cap")
        idx[i] = e
    out = {}
    for exp, c in a.terms.items():
        if all(exp[i] == e for i, e in idx.items()):
            new = tuple(0 if i in idx else v for i, v in enumerate(exp))
            s = out.get(new)
            out[new] = c if s is None else s + c
    return ClassPoly(spec, {e: c for e, c in out.items() if not c.is_zero()},
                     _validated=True)


def derivative(a: ClassPoly, var: str, order: int = 1) -> ClassPoly:
    """Formal partial derivative in the named generator."""
    if order < 0:
        raise ValueError("order must be >= 0")
    i = a.spec.var_index(var)
    terms = a.terms
    for _ in range(order):
        out = {}
        for exp, c in terms.items():
            e = exp[i]
            if e == 0:
                continue
            new = exp[:i] + (e - 1,) + exp[i + 1:]
            add_c = c * e
            s = out.get(new)
            out[new] = add_c if s is None else s + add_c
        terms = {e: c for e, c in out.items() if not c.is_zero()}
    return ClassPoly(a.spec, terms, _validated=True)


def expand_q(a: ClassPoly, k: int) -> ClassPoly:
    """Expand Q |-> (d-k)X + F: convert a Q-basis class to the F-basis.

    The input's last slot is read as the Q-exponent.
    """
    spec = a.spec
    if not spec.d_symbolic:
        raise SpecMismatch("expand_q needs symbolic-d coefficients")
    qpos = spec.nvars - 1
    lin = make_poly(spec, [((1,) + (0,) * (spec.nvars - 1), DPoly.d_minus(k)),
                           ((0,) * (spec.nvars - 1) + (1,), 1)])
    powers = {0: ClassPoly.one(spec)}
    top = max((e[qpos] for e in a.terms), default=0)
    for j in range(1, top + 1):
        powers[j] = powers[j - 1] * lin
    out = ClassPoly.zero(spec)
    for exp, c in a.terms.items():
        rest = ClassPoly(spec, {exp[:qpos] + (0,): c}, _validated=True)
        out = out + rest * powers[exp[qpos]]
    return out


def to_q_basis(a: ClassPoly, k: int) -> ClassPoly:
    """Substitute F |-> Q - (d-k)X: convert an F-basis class to the Q-basis."""
    spec = a.spec
    if not spec.d_symbolic:
        raise SpecMismatch("to_q_basis needs symbolic-d coefficients")
    qpos = spec.nvars - 1
    lin = make_poly(spec, [((1,) + (0,) * (spec.nvars - 1), -DPoly.d_minus(k)),
                           ((0,) * (spec.nvars - 1) + (1,), 1)])
    powers = {0: ClassPoly.one(spec)}
    top = max((e[qpos] for e in a.terms), default=0)
    for j in range(1, top + 1):
        powers[j] = powers[j - 1] * lin
    out = ClassPoly.zero(spec)
    for exp, c in a.terms.items():
        rest = ClassPoly(spec, {exp[:qpos] + (0,): c}, _validated=True)
        out = out + rest * powers[exp[qpos]]
    return out


def specialize(a: ClassPoly, d_value=None, expand_Q=None) -> ClassPoly:
    """Substitute a numeric d and/or expand Q |-> (d-k)X + F.

    ``expand_Q`` is the offset k of the relative generator being
    eliminated.  With ``d_value`` given the result carries plain-number
    coefficients and a d_symbolic=False spec.
    """
    out = a
    if expand_Q is not None:
        out = expand_q(out, expand_Q)
    if d_value is not None:
        spec = out.spec
        nspec = RingSpec(spec.n, spec.num_y, spec.f_cap, d_symbolic=False)
        terms = {}
        for exp, c in out.terms.items():
            v = c.eval(d_value)
            if v:
                terms[exp] = DPoly((v,))
        out = ClassPoly(nspec, terms, _validated=True)
    return out


def apply_permutation(a: ClassPoly, perm) -> ClassPoly:
    """Permute the point generators {X, Y_1..Y_r} of a class.

    ``perm`` is a tuple of length num_y+1: slot i carries generator i to
    generator perm[i] (0 is X, i>=1 is Y_i).  The last slot (F or Q) is
    fixed.
    """
    spec = a.spec
    npts = spec.num_y + 1
    if len(perm) != npts or sorted(perm) != list(range(npts)):
        raise ValueError(f"not a permutation of {npts} point slots: {perm}")
    out = {}
    for exp, c in a.terms.items():
        new = [0] * spec.nvars
        new[-1] = exp[-1]
        for i in range(npts):
            new[perm[i]] = exp[i]
        out[tuple(new)] = c
    return ClassPoly(spec, out, _validated=True)


def check_symmetry(a: ClassPoly, group) -> bool:
    """True iff the class is invariant under every listed permutation.

    Permutations act on the point slots {X, Y_1..Y_r}; apply in the basis
    in which the symmetry statement is made (normally over Q).
    """
    return all(apply_permutation(a, p) == a for p in group)


def divide_exact(r: ClassPoly, c: ClassPoly) -> ClassPoly:
    """The unique P with P*c = r, for divisors with unit F-linear part.

    Write c = u*F + N with N free of F and u a nonzero scalar.  Comparing
    F-degrees in P*c = r gives R_j = u*P_{j-1} + N*P_j, solved by descending
    induction from the top F-degree; the leftover identity R_0 = N*P_0 is
    the divisibility check.
    """
    if r.spec != c.spec:
        raise SpecMismatch(f"{r.spec} vs {c.spec}")
    spec = r.spec
    fpos = spec.nvars - 1
    u = None
    n_terms = {}
    for exp, coef in c.terms.items():
        ef = exp[fpos]
        if ef == 0:
            n_terms[exp] = coef
        elif ef == 1 and all(e == 0 for e in exp[:fpos]):
            u = coef
        else:
            raise BadDivisor("divisor must be u*F + (terms free of F)")
    if u is None or u.is_zero():
        raise BadDivisor("divisor has no F-linear part")
    if not u.is_constant():
        raise BadDivisor("F-coefficient must be a nonzero scalar")
    uval = u.constant_value()
    nfree = ClassPoly(spec, n_terms, _validated=True)

    # slice r by F-degree
    slices: dict[int, dict] = {}
    for exp, coef in r.terms.items():
        slices.setdefault(exp[fpos], {})[exp[:fpos] + (0,)] = coef
    top = max(slices, default=0)
    if top >= spec.f_cap:
        raise BadDivisor("dividend reaches the F cap; quotient would be ambiguous")

    p_slice = ClassPoly.zero(spec)       # P_j for j above the top: zero
    quotient = ClassPoly.zero(spec)
    for j in range(top + 1, 0, -1):
        r_j = ClassPoly(spec, slices.get(j, {}), _validated=True)
        p_prev = (r_j - nfree * p_slice) * (Fraction(1) / uval)
        if not p_prev.is_zero():
            shifted = {exp[:fpos] + (j - 1,): coef for exp, coef in p_prev.terms.items()}
            quotient = quotient + ClassPoly(spec, shifted, _validated=True)
        p_slice = p_prev
    r_0 = ClassPoly(spec, slices.get(0, {}), _validated=True)
    if nfree * p_slice != r_0:
        raise NotDivisible("final consistency check R_0 = N*P_0 failed")
    if quotient * c != r:
        raise NotDivisible("quotient does not reproduce the dividend")
    return quotient


def hsym(spec: RingSpec, degree: int, names) -> ClassPoly:
    """Complete homogeneous symmetric sum of the given degree in named
    generators: sum of all monomials of that total degree."""
    idxs = [spec.var_index(nm) for nm in names]
    out = {}
    for combo in itertools.combinations_with_replacement(idxs, degree):
        exp = [0] * spec.nvars
        for i in combo:
            exp[i] += 1
        if any(exp[i] > spec.caps[i] for i in idxs):
            continue
        out[tuple(exp)] = ONE
    if degree == 0:
        out = {(0,) * spec.nvars: ONE}
    return ClassPoly(spec, out, _validated=True)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def to_json_obj(a: ClassPoly) -> dict:
    """Canonical JSON object for a class: terms sorted by exponent tuple."""
    return {
        "spec": {"n": a.spec.n, "num_y": a.spec.num_y, "f_cap": a.spec.f_cap,
                 "d_symbolic": a.spec.d_symbolic},
        "terms": [{"exp": list(exp), "coef": str(a.terms[exp])}
                  for exp in sorted(a.terms)],
    }


def from_json_obj(obj: dict) -> ClassPoly:
    s = obj["spec"]
    spec = RingSpec(s["n"], s["num_y"], s["f_cap"], s.get("d_symbolic", True))
    terms = {tuple(t["exp"]): parse_dpoly(t["coef"]) for t in obj["terms"]}
    return ClassPoly(spec, terms)


def to_string(a: ClassPoly, last_name: str = "F") -> str:
    """Human-readable polynomial text, e.g. '(d-2)*X^2*F + 3*Y1'."""
    if a.is_zero():
        return "0"
    names = a.spec.var_names[:-1] + (last_name,)
    parts = []
    for exp in sorted(a.terms, reverse=True):
        c = a.terms[exp]
        mono = "*".join(
            (nm if e == 1 else f"{nm}^{e}")
            for nm, e in zip(names, exp) if e > 0)
        cs = str(c)
        if c.degree > 0 or any(x < 0 for x in c.coeffs):
            cs = f"({cs})"
        if mono:
            parts.append(mono if cs == "1" else f"{cs}*{mono}")
        else:
            parts.append(cs)
    return " + ".join(parts)
