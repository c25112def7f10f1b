"""Exact enumeration of projective hypersurfaces with one singular point.

The package computes cohomology classes of equisingular strata in the
parameter space of degree-d hypersurfaces in P^n, by lifting the strata to
auxiliary products of projective spaces, intersecting explicit defining
hypersurfaces, and removing residual contributions over cycles of jump.
Everything is exact integer/rational arithmetic; answers are polynomials
in the symbolic degree d.
"""

from singstrata.ring import ClassPoly, DPoly, RingSpec

__all__ = ["ClassPoly", "DPoly", "RingSpec"]

__version__ = "0.1.0"
