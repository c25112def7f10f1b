"""Catalog of closed-form stratum classes and degrees.

Every entry is a minimal-lifting class [Sigma~(x)] over the Q-basis
(Q = (d-k)X + F with the entry's offset k), stored as a formula string in a
tiny exact expression language and evaluated on demand for a concrete n.
The catalog is the ground truth the engine is compared against; tests never
derive these expressions, and the module never imports the engine.

The expression grammar: integers, n, d, Q, X, r, p; + - * / ^ and
parentheses; C(a,b) for binomial coefficients (zero outside the usual
range); SUM(i, lo, hi, body).  Exponents may be expressions but must
evaluate to integers.
"""

from __future__ import annotations

import hashlib
import json
import re
from fractions import Fraction
from math import comb, factorial

from singstrata import interp
from singstrata import ring as rg


class ClosedFormError(Exception):
    pass


class OutOfValidity(ClosedFormError):
    """The formula is not valid for the requested parameters."""


class UnknownConstant(ClosedFormError):
    """No closed form is known for this (n, r) corank combination."""


# ---------------------------------------------------------------------------
# expression language
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\^|\+|\-|\*|\/|\(|\)|,))")


def _tokenize(text):
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ClosedFormError(f"bad token at {text[pos:pos+12]!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", int(num)))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", op))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if kind and tok[0] != kind or value is not None and tok[1] != value:
            raise ClosedFormError(f"expected {kind} {value}, got {tok}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        self.take("end")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take("op")[1]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take("op")[1]
            rhs = self.factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def factor(self):
        if self.peek() == ("op", "-"):
            self.take("op")
            return ("neg", self.factor())
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take("op")
            exp = self.factor()
            node = ("pow", node, exp)
        return node

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return ("num", val)
        if kind == "name":
            self.take()
            if val == "C":
                self.take("op", "(")
                a = self.expr()
                self.take("op", ",")
                b = self.expr()
                self.take("op", ")")
                return ("binom", a, b)
            if val == "SUM":
                self.take("op", "(")
                var = self.take("name")[1]
                self.take("op", ",")
                lo = self.expr()
                self.take("op", ",")
                hi = self.expr()
                self.take("op", ",")
                body = self.expr()
                self.take("op", ")")
                return ("sum", var, lo, hi, body)
            return ("var", val)
        if (kind, val) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ClosedFormError(f"unexpected token {self.peek()}")


def parse_expr(text):
    return _Parser(_tokenize(text)).parse()


def _binom_arg(x):
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise ClosedFormError("binomial argument is not an integer")
        return int(x)
    return int(x)


def _safe_comb(a, b):
    a, b = _binom_arg(a), _binom_arg(b)
    if b < 0 or a < 0 or b > a:
        return 0
    return comb(a, b)


def eval_scalar(node, env) -> Fraction:
    """Evaluate an expression to an exact number; ^ allows negative powers."""
    op = node[0]
    if op == "num":
        return Fraction(node[1])
    if op == "var":
        if node[1] not in env:
            raise ClosedFormError(f"unbound variable {node[1]}")
        return Fraction(env[node[1]])
    if op == "neg":
        return -eval_scalar(node[1], env)
    if op in ("add", "sub", "mul", "div"):
        a, b = eval_scalar(node[1], env), eval_scalar(node[2], env)
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        if b == 0:
            raise ClosedFormError("division by zero")
        return a / b
    if op == "pow":
        base = eval_scalar(node[1], env)
        e = eval_scalar(node[2], env)
        if e.denominator != 1:
            raise ClosedFormError("non-integer exponent")
        return base ** int(e)
    if op == "binom":
        return Fraction(_safe_comb(eval_scalar(node[1], env), eval_scalar(node[2], env)))
    if op == "sum":
        _, var, lo, hi, body = node
        lo_v, hi_v = int(eval_scalar(lo, env)), int(eval_scalar(hi, env))
        total = Fraction(0)
        for i in range(lo_v, hi_v + 1):
            total += eval_scalar(body, {**env, var: i})
        return total
    raise ClosedFormError(f"bad node {op}")


def eval_class(node, env, spec: rg.RingSpec) -> rg.ClassPoly:
    """Evaluate an expression to a class in the given ring; Q and X are the
    ring generators, everything else resolves through env to numbers."""
    op = node[0]
    if op == "num":
        return rg.ClassPoly.scalar(spec, Fraction(node[1]))
    if op == "var":
        if node[1] in ("Q", "X"):
            return rg.ClassPoly.gen(spec, node[1])
        return rg.ClassPoly.scalar(spec, Fraction(env[node[1]]))
    if op == "neg":
        return -eval_class(node[1], env, spec)
    if op in ("add", "sub", "mul"):
        a, b = eval_class(node[1], env, spec), eval_class(node[2], env, spec)
        return a + b if op == "add" else a - b if op == "sub" else a * b
    if op == "div":
        a = eval_class(node[1], env, spec)
        b = eval_scalar(node[2], env)
        return a * (Fraction(1) / b)
    if op == "pow":
        base = eval_class(node[1], env, spec)
        e = eval_scalar(node[2], env)
        if e.denominator != 1 or e < 0:
            raise ClosedFormError("class exponent must be a non-negative integer")
        return base ** int(e)
    if op == "binom":
        return rg.ClassPoly.scalar(
            spec, _safe_comb(eval_scalar(node[1], env), eval_scalar(node[2], env)))
    if op == "sum":
        _, var, lo, hi, body = node
        lo_v, hi_v = int(eval_scalar(lo, env)), int(eval_scalar(hi, env))
        total = rg.ClassPoly.zero(spec)
        for i in range(lo_v, hi_v + 1):
            total = total + eval_class(body, {**env, var: i}, spec)
        return total
    raise ClosedFormError(f"bad node {op}")


# ---------------------------------------------------------------------------
# the catalog (transcribed once, reviewed character by character)
# ---------------------------------------------------------------------------

# minimal-lifting classes over Q = (d-k)X + F
CLASS_FORMULAS = {
    "ordinary": {
        "k": "p",
        "min_n": 1,
        "params": ("p",),
        "expr": "Q^(C(n+p,p))",
    },
    "corank": {
        "k": 2,
        "min_n": 1,
        "params": ("r",),
        # the leading constant is looked up separately (corank_constant)
        "expr": "(Q+X)^(n+1) * Q^(C(r,2)) * "
                "SUM(i,0,r, C(n-i,r-i)*C(r,i)/C(2*r,r+i) * Q^(r-i) * (-X)^i)",
    },
    "A3": {
        "k": 2, "min_n": 2, "params": (),
        "expr": "(Q+X)^(n+1) * (n*Q - 2*X) * ((3*n-1)/2*Q - 4*X)",
    },
    "A4": {
        "k": 2, "min_n": 2, "params": (),
        "expr": "(Q+X)^(n+1) * ( n*(5*n^2-5*n+2)/2*Q^3 - 4*(5*n^2-3*n+1)*Q^2*X"
                " + 4*(13*n-5)*Q*X^2 - 48*X^3 )",
    },
    "D5": {
        "k": 2, "min_n": 2, "params": (),
        "expr": "(Q+X)^(n+1) * Q*(n+1)/6 * ((3*n-2)*Q - 10*X)"
                " * ((n^2-n)*Q^2 - 6*(n-1)*Q*X + 12*X^2)",
    },
    "D6": {
        "k": 2, "min_n": 2, "params": (),
        "expr": "(Q+X)^(n+1) * (1+n)*Q * ( 4*(n-1)*n*(3*n^2-5*n+3)/15*Q^4"
                " - 2*(n-1)*(16*n^2-19*n+9)/3*Q^3*X + 2*(83*n^2-140*n+69)/3*Q^2*X^2"
                " - 136*(n-1)*Q*X^3 + 136*X^4 )",
    },
    "E6": {
        "k": 2, "min_n": 2, "params": (),
        "expr": "(Q+X)^(n+1) * Q*(n+1) * ( n*(n-1)*(12*n^2-15*n+2)/40*Q^4"
                " - (n-1)*n*(15*n-14)/4*Q^3*X + (37*n^2-52*n+12)/2*Q^2*X^2"
                " - 6*(7*n-5)*Q*X^3 + 36*X^4 )",
    },
    "X9": {
        "k": 2, "min_n": 2, "params": (),
        "expr": "(Q+X)^(n+1) * Q*(n+1) * ("
                " n*(n-1)*(3*n+1)*(33*n^3-102*n^2+102*n-20)/1680*Q^6"
                " - (n-1)*n*(138*n^3-309*n^2+153*n+86)/120*Q^5*X"
                " + (379*n^4-1004*n^3+719*n^2+166*n-160)/40*Q^4*X^2"
                " - (126*n^3-247*n^2+58*n+72)/2*Q^3*X^3"
                " + (625*n^2-670*n-216)/6*Q^2*X^4"
                " - 16*(8*n-1)*Q*X^5 + 48*X^6 )",
    },
    "Q10": {
        "k": 2, "min_n": 3, "params": (),
        "expr": "(Q+X)^(n+1) * C(n+2,3) * Q^3 * ((n-1)*Q - 4*X)^2 * ("
                " 3/5*C(n,3)*Q^3 - 12/5*C(n-1,2)*Q^2*X + 6*(n-2)*Q*X^2 - 12*X^3 )",
    },
    "S11": {
        "k": 2, "min_n": 3, "params": (),
        "expr": "(Q+X)^(n+1) * 6*C(n+2,3) * Q^3 * ((n-1)*Q - 4*X) * ("
                " (n-2)*(n-1)*n*(51*n^2-98*n+31)/3360*Q^5"
                " - (n-2)*(n-1)*(253*n^2-392*n+75)/840*Q^4*X"
                " + (n-2)*(103*n^2-190*n+67)/40*Q^3*X^2"
                " - (47*n^2-130*n+75)/4*Q^2*X^3"
                " + (56*n-79)/2*Q*X^4 - 27*X^5 )",
    },
    "U12": {
        "k": 2, "min_n": 3, "params": (),
        "expr": "(Q+X)^(n+1) * C(n+2,3) * Q^3 * ("
                " C(n,3)*(n-1)*(117*n^3-328*n^2+207*n+12)/1120*Q^7"
                " - C(n-1,2)*(323*n^4-1057*n^3+1021*n^2-231*n-72)/336*Q^6*X"
                " + C(n-1,2)*(991*n^3-2545*n^2+1525*n-27)/84*Q^5*X^2"
                " - (3491*n^4-16290*n^3+25396*n^2-14838*n+2577)/84*Q^4*X^3"
                " + (n-1)*(2161*n^2-5606*n+2553)/12*Q^3*X^4"
                " - (475*n^2-1150*n+631)*Q^2*X^5"
                " + 28*(25*n-31)*Q*X^6 - 448*X^7 )",
    },
}

# degrees of the strata, polynomials in d (printed lines; some contain
# (d-1)-powers that cancel only after expansion, so they are evaluated
# pointwise and refitted through the exact interpolator)
DEGREE_FORMULAS = {
    "A1": "(n+1)*(d-1)^n",
    "ordinary": "C(C(n+p,p),n)*(d-p)^n",
    "A2": "3*C(n+2,3)*(d-1)^(n-1)*(d-2)",
    "D4": "(n+1)/8*C(n+1,3)*(d-1)^(n-3)*(d-2)^2"
          "*( (d-2)*(n^3+n^2+10*n+8) + 4*(n^2+6) )",
    "P8": "C(n+2,3)*C(n+4,7)*(d-1)^(n-6)*(d-2)^3*( C(n+7,3)*(d-2)^3/10"
          " + C(n+6,2)*(d-2)^2 + (n+5)*9*(d-2)/2 + 12 )",
    "A3": "C(n+2,3)*(d-1)^(n-2)*( (3*n-1)*(n+3)/2*(d-2)^2 + 2*(n-1)*(d-2) - 4 )",
    "A4": "1/8*C(n+2,3)*(d-1)^(n-3)*("
          " d^3*(24-46*n+27*n^2+30*n^3+5*n^4)"
          " - d^2*(96-184*n+138*n^2+160*n^3+30*n^4)"
          " + d*(144-316*n+192*n^2+280*n^3+60*n^4)"
          " - 136+224*n-48*n^2-160*n^3-40*n^4 )",
}

# offsets k in Q = (d-k)X + F for the degree formulas' class counterparts
TYPE_OFFSETS = {"A1": 1, "A2": 2, "A3": 2, "A4": 2, "D4": 2, "D5": 2, "D6": 2,
                "E6": 2, "P8": 2, "X9": 2, "Q10": 2, "S11": 2, "U12": 2,
                "corank": 2, "ordinary": None, "reducible": None}


def catalog_checksum() -> str:
    payload = json.dumps({"classes": CLASS_FORMULAS, "degrees": DEGREE_FORMULAS},
                         sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()


def corank_constant(n: int, r: int) -> Fraction:
    """Leading constant of the corank-r form class.

    Known for r <= 4 and for r in {n, n-1, n-2}.  The catalog rows for
    rank <= 2 overlaps (r = n and r = n-2) count the two orderings of the
    branches of the degenerate quadric; the values returned here are
    normalized by that branch symmetry, which is what the degree lines for
    the ordinary triple point, A2, D4 and P8 pin down.
    """
    if r < 1 or r > n:
        raise OutOfValidity(f"corank {r} needs 1 <= r <= n")
    if r == 1:
        return Fraction(2)
    if r == 2:
        return Fraction(2 * comb(n + 1, 1))
    if r == 3:
        return Fraction(2 * comb(n + 2, 3))
    if r == 4:
        return Fraction(2 * comb(n + 3, 5) * (n + 1), 3)
    if r == n:
        return Fraction(comb(2 * n, n))
    if r == n - 1:
        return Fraction(2 ** r * comb(2 * r, r), n)
    if r == n - 2:
        return Fraction(comb(2 * (r + 1), r + 1) * comb(2 * r, r), 2 * comb(r + 2, 2))
    raise UnknownConstant(
        f"no closed-form constant for corank r={r} at n={n}; "
        "only r <= 4 and r in {n, n-1, n-2} are tabulated")


_AST_CACHE: dict = {}


def _ast(expr: str):
    node = _AST_CACHE.get(expr)
    if node is None:
        node = parse_expr(expr)
        _AST_CACHE[expr] = node
    return node


def _x_ring(n: int, degree: int) -> rg.RingSpec:
    return rg.RingSpec(n=n, num_y=0, f_cap=degree + 2)


def closed_form_class(name: str, n: int, ring: rg.RingSpec | None = None,
                      **params) -> rg.ClassPoly:
    """Minimal-lifting class over the Q-basis with the entry's offset k.

    For parameterized families pass p= (ordinary) or r= (corank) or
    k_parts=..., r_parts=..., p_parts=..., aut= (reducible).
    """
    if name == "A1":
        return closed_form_class("ordinary", n, ring, p=1)
    if name == "A2":
        return closed_form_class("corank", n, ring, r=1)
    if name == "D4":
        return closed_form_class("corank", n, ring, r=2)
    if name == "P8":
        if n < 3:
            raise OutOfValidity("P8 needs n >= 3")
        return closed_form_class("corank", n, ring, r=3)
    if name == "reducible":
        return reducible_class(n, params["r_parts"], params["p_parts"],
                               params.get("aut", 1), ring)
    entry = CLASS_FORMULAS.get(name)
    if entry is None:
        raise ClosedFormError(f"unknown type {name!r}")
    if n < entry["min_n"]:
        raise OutOfValidity(f"{name} needs n >= {entry['min_n']}")
    env = {"n": n}
    for pname in entry["params"]:
        if pname not in params:
            raise ClosedFormError(f"{name} needs parameter {pname}")
        env[pname] = params[pname]
    if name == "corank":
        r = params["r"]
        if r > n:
            raise OutOfValidity(f"corank r={r} needs r <= n")
        const = corank_constant(n, r)
        degree = (n + 1) + comb(r, 2) + r
    elif name == "ordinary":
        if params["p"] < 1:
            raise OutOfValidity("ordinary point needs p >= 1")
        const = Fraction(1)
        degree = comb(n + params["p"], params["p"])
    else:
        const = Fraction(1)
        degree = (n + 1) + {"A3": 2, "A4": 3, "D5": 4, "D6": 6, "E6": 5,
                            "X9": 7, "Q10": 9, "S11": 9, "U12": 10}[name]
    if ring is None:
        ring = _x_ring(n, degree)
    cls = eval_class(_ast(entry["expr"]), env, ring) * const
    if not cls.is_integral():
        raise ClosedFormError(f"{name} class at n={n} is not integral")
    return cls


def class_offset(name: str, **params) -> int:
    """Offset k of the Q-basis convention of a catalog entry."""
    if name in ("ordinary", "A1"):
        return params.get("p", 1)
    if name == "reducible":
        return sum(r * p for r, p in zip(params["r_parts"], params["p_parts"]))
    k = TYPE_OFFSETS.get(name, 2)
    return 2 if k is None else k


def reducible_class(n: int, r_parts, p_parts, aut: int = 1,
                    ring: rg.RingSpec | None = None) -> rg.ClassPoly:
    """Minimal-lifting class for a germ whose lowest jet is a product of
    mutually generic cone forms Omega_j^(p_j) with multiplicities r_j.

    Coefficient extraction over each Omega-parameter space gives

        (1/|Aut|) * sum_i Q^(M-1-i) X^(k + i - sum_j C(p_j-1+n, p_j))
            * sum_{i_1+...+i_k=i} multinomial * prod r_j^{i_j}
              * C(A_j, N_j - i_j)

    with M = C(p+n, n), A_j = C(p_j-1+n, n), N_j = C(p_j+n, n) - 1 and
    p = sum r_j p_j; Q = (d-p)X + F.
    """
    r_parts, p_parts = tuple(r_parts), tuple(p_parts)
    if len(r_parts) != len(p_parts) or not r_parts:
        raise ClosedFormError("need matching non-empty r_parts and p_parts")
    if any(r < 1 for r in r_parts) or any(p < 1 for p in p_parts):
        raise OutOfValidity("multiplicities and orders must be >= 1")
    p = sum(r * q for r, q in zip(r_parts, p_parts))
    big_m = comb(p + n, n)
    a_j = [comb(q - 1 + n, n) for q in p_parts]
    n_j = [comb(q + n, n) - 1 for q in p_parts]
    if ring is None:
        ring = _x_ring(n, big_m + sum(a_j))
    nv = ring.nvars
    out: dict = {}
    for i in range(big_m):
        for combo in _bounded_compositions(i, [min(nj, i) for nj in n_j]):
            coef = Fraction(factorial(i))
            x_exp = 0
            ok = True
            for ij, (rj, aj, nj) in zip(combo, zip(r_parts, a_j, n_j)):
                c = _safe_comb(aj, nj - ij)
                if c == 0:
                    ok = False
                    break
                coef = coef / factorial(ij) * (rj ** ij) * c
                x_exp += aj - (nj - ij)
            if not ok:
                continue
            if x_exp < 0 or x_exp > n:
                continue
            exp = [0] * nv
            exp[0] = x_exp
            exp[-1] = big_m - 1 - i
            key = tuple(exp)
            out[key] = out.get(key, Fraction(0)) + coef
    cls = rg.make_poly(ring, [(e, c) for e, c in out.items()]) * Fraction(1, aut)
    return cls


def _bounded_compositions(total, bounds):
    if len(bounds) == 1:
        if 0 <= total <= bounds[0]:
            yield (total,)
        return
    for first in range(0, min(total, bounds[0]) + 1):
        for rest in _bounded_compositions(total - first, bounds[1:]):
            yield (first,) + rest


def closed_form_degree(name: str, n: int, **params) -> rg.DPoly:
    """Stratum degree as an exact polynomial in d.

    Lines containing powers of (d-1) that only cancel after expansion are
    evaluated pointwise at large d and refitted with the exact interpolator
    (degree bound n); a non-polynomial line would fail the surplus checks.
    """
    if name == "ordinary" and params.get("p") == 1:
        name = "A1"
    expr = DEGREE_FORMULAS.get(name)
    if expr is None:
        # fall back to Gysin extraction from the class
        cls = closed_form_class(name, n, **params)
        return degree_from_class(cls, n, class_offset(name, **params))
    env = {"n": n, **params}
    node = _ast(expr)
    k = class_offset(name, **params) or 2
    base = max(k + 2, n + 3)
    samples = [(d0, eval_scalar(node, {**env, "d": d0})) for d0 in range(base, base + n + 3)]
    poly = interp.interpolate_exact(samples, n)
    if not poly.is_integral():
        raise ClosedFormError(f"degree of {name} at n={n} is not integral")
    return poly


def degree_from_class(cls: rg.ClassPoly, n: int, k: int) -> rg.DPoly:
    """Gysin extraction of a minimal-lifting class: expand Q, take the X^n
    coefficient, and read off the pure-F coefficient."""
    fb = rg.expand_q(cls, k)
    top = rg.gysin_extract(fb, {"X": n})
    if top.is_zero():
        return rg.DPoly()
    items = list(top.terms.items())
    if len(items) != 1:
        raise ClosedFormError("class has mixed monomials above X^n")
    return items[0][1]


def list_types():
    fixed = sorted(CLASS_FORMULAS)
    return fixed + ["A1", "A2", "D4", "P8", "reducible"]
