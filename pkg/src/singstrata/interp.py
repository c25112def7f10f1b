"""Exact reconstruction of degree polynomials from integer samples.

Engine runs produce stratum degrees at specific integer values of d (and
for specific n); the universal answers are polynomials in d of degree at
most n.  Fitting is done with exact rational arithmetic in the Newton form;
surplus samples act as consistency checks rather than being discarded.
"""

from __future__ import annotations

from fractions import Fraction

from singstrata.ring import DPoly


class InterpError(Exception):
    pass


class InsufficientSamples(InterpError):
    pass


class InconsistentSamples(InterpError):
    """A surplus sample does not lie on the fitted polynomial."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


def interpolate_exact(samples, degree_bound: int) -> DPoly:
    """Unique polynomial of degree <= degree_bound through the samples.

    samples: iterable of (integer point, exact value) pairs, distinct
    points.  The first degree_bound+1 samples determine the polynomial;
    every further sample must lie on it exactly.
    """
    pts = [(Fraction(x), Fraction(y)) for x, y in samples]
    if len({x for x, _ in pts}) != len(pts):
        raise InterpError("sample points must be distinct")
    if len(pts) < degree_bound + 1:
        raise InsufficientSamples(
            f"need {degree_bound + 1} samples for degree {degree_bound}, got {len(pts)}")

    base, surplus = pts[:degree_bound + 1], pts[degree_bound + 1:]
    # Newton's divided differences on the base points
    xs = [x for x, _ in base]
    coeffs = [y for _, y in base]
    for level in range(1, len(base)):
        for i in range(len(base) - 1, level - 1, -1):
            coeffs[i] = (coeffs[i] - coeffs[i - 1]) / (xs[i] - xs[i - level])
    # expand the Newton form to the monomial basis
    poly = DPoly()
    acc = DPoly((1,))
    for k, c in enumerate(coeffs):
        poly = poly + acc * c
        acc = acc * DPoly((-xs[k], 1))
    for x, y in surplus:
        if poly.eval(x) != y:
            raise InconsistentSamples(
                f"sample at {x} gives {y}, fit predicts {poly.eval(x)}", point=(x, y))
    return poly


def sweep(evaluator, n_range, d_range, degree_bound_for=None):
    """Fit a polynomial in d for each n and report surplus checks.

    evaluator(n, d) must return an exact number.  degree_bound_for(n)
    defaults to n, the universal bound for stratum degrees.
    """
    n_range = list(n_range)
    d_range = list(d_range)
    if not n_range or not d_range:
        raise InterpError("ranges must be non-empty")
    if degree_bound_for is None:
        degree_bound_for = lambda n: n
    report = []
    for n in n_range:
        bound = degree_bound_for(n)
        samples = [(d, evaluator(n, d)) for d in d_range]
        try:
            poly = interpolate_exact(samples, bound)
        except InconsistentSamples as exc:
            raise InconsistentSamples(f"n={n}: {exc}", point=exc.point) from exc
        checks = [{"d": d, "ok": poly.eval(d) == Fraction(v)} for d, v in samples]
        report.append({"n": n, "poly_in_d": str(poly), "poly": poly, "checks": checks})
    return report
