"""Scratch verification of core identities before freezing tests. Not shipped."""
from fractions import Fraction
from singstrata.ring import (RingSpec, ClassPoly, DPoly, hsym, expand_q, to_q_basis,
                             gysin_extract, derivative, check_symmetry, divide_exact)


def cusp_bracket(spec, n):
    X = ClassPoly.gen(spec, "X")
    Y = ClassPoly.gen(spec, "Y1")
    Q = ClassPoly.gen(spec, "Q")
    s = ClassPoly.zero(spec)
    for i in range(n + 1):
        s = s + ((-1) ** i) * (Q + Y) ** (n - i) * X ** i
    return s - hsym(spec, n, ["X", "Y1"])


def appendix_A3(spec, n):
    X = ClassPoly.gen(spec, "X")
    Q = ClassPoly.gen(spec, "Q")
    half = Fraction(3 * n - 1, 2)
    return (Q + X) ** (n + 1) * (n * Q - 2 * X) * (half * Q - 4 * X)


for n in range(2, 6):
    codim = 2 * n + 1
    spec = RingSpec(n, 1, codim + 3)
    X = ClassPoly.gen(spec, "X")
    Y = ClassPoly.gen(spec, "Y1")
    Q = ClassPoly.gen(spec, "Q")
    C = (Q + X) ** (n + 1) * cusp_bracket(spec, n)
    # symmetry in X <-> Y in the Q-basis
    sym = check_symmetry(C, [(1, 0)])
    maxX, maxY = C.max_exponent("X"), C.max_exponent("Y1")
    # minimal lifting: coefficient of Y^{n-1}
    minimal = gysin_extract(C, {"Y1": n - 1})
    expect_min = (Q + X) ** (n + 1) * (n * Q - 2 * X)
    # degree: expand Q with k=2, extract X^n Y^{n-1}, pure F coefficient
    F = expand_q(C, 2)
    deg_cls = gysin_extract(F, {"X": n, "Y1": n - 1})
    [(exp, coef)] = deg_cls.terms.items()
    expect_deg = DPoly.d_minus(1) ** (n - 1) * DPoly.d_minus(2) * Fraction(n * (n + 1) * (n + 2), 2)
    print(f"n={n}: sym={sym} maxX={maxX} maxY={maxY} minimal_ok={minimal == expect_min} "
          f"deg_ok={coef == expect_deg} f_exp={exp}")

    # tacnode
    T = C * (Q + 3 * Y - X) - 3 * hsym(spec, n, ["X", "Y1"]) * expect_min
    symT = check_symmetry(T, [(1, 0)])
    minT = gysin_extract(T, {"Y1": n - 1})
    print(f"   A3: sym={symT} maxY={T.max_exponent('Y1')} "
          f"appendix_ok={minT == appendix_A3(spec, n)}")
    # degree line for A3
    FT = expand_q(T, 2)
    degT = gysin_extract(FT, {"X": n, "Y1": n - 1})
    [(expT, coefT)] = degT.terms.items()
    from math import comb
    line = (DPoly.d_minus(1) ** (n - 2)) * (
        DPoly.d_minus(2) ** 2 * Fraction((3 * n - 1) * (n + 3), 2)
        + DPoly.d_minus(2) * (2 * (n - 1)) + (-4)) * comb(n + 2, 3)
    print(f"   A3 degree ok={coefT == line}")

    # residual over diagonal reproduces the minimal lifting (fiber dim 1)
    dn = derivative(C, "Y1", n - 1)
    fact = 1
    for i in range(2, n):
        fact *= i
    resid = dn * Fraction(1, fact)
    print(f"   diag-residual ok={resid == expect_min}")

    # divide_exact round trip on the tacnode step (Q-basis divisor has unit Q-part)
    q = divide_exact(T + 3 * hsym(spec, n, ['X', 'Y1']) * expect_min, Q + 3 * Y - X)
    print(f"   divide ok={q == C}")
