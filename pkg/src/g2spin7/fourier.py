"""Fiberwise Fourier transform on flat calibrated torus fibrations.

Two fibration geometries are supported: the coassociative four-torus
fibration (fiber coordinates y0..y3, dual coordinates Y0..Y3) and the
associative three-torus fibration (fiber x1..x3, dual X1..X3).  The
transform of a constant-coefficient form is the fiber integral of its
pullback wedged with the exponential of the universal curvature two-form
``sum dy^j ^ dY_j``; the global sign of that curvature is pinned by the
exact identity transform(exp(theta)) = exp(theta_dual), which the test
suite checks monomial by monomial.

Semi-flat cycles and sections transform by the explicit data swaps of the
flat model: graphed fiber coordinates and fiber connection components trade
places, base connection components ride along.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exalg import (ONE, ZERO, CoordFrame, Form, Polyform, exp_trunc,
                    fiber_integrate)
from .g2core import G2_LABELS, g2_frame, standard_forms
from .cycles import (FiberCycle, GridFn, PolyFn, SemiFlatAssocCycle,
                     SemiFlatCoassocCycle)

__all__ = [
    "CoassocT4Fibration",
    "AssocT3Fibration",
    "dual_frame",
    "poincare_curvature",
    "transform_form",
    "transform_semiflat_cycle",
    "transform_section",
    "section_jet_curvature",
    "make_fibration",
    "TorusPoint",
    "FlatTorusConnection",
    "transform_flat_torus",
    "ConnectionOnW",
]


def _reciprocal(scales):
    return tuple(ONE / Fraction(s) for s in scales)


class _Fibration:
    """Shared plumbing: frames, index maps, Poincare curvature."""

    def __init__(self, frame=None):
        self.frame_m = frame or g2_frame()
        scales = self.frame_m.covolumes
        fiber = self.fiber_labels
        base = tuple(l for l in self.frame_m.labels if l not in fiber)
        self.base_labels = base
        dual = tuple(self.dual_label(l) for l in fiber)
        self.dual_labels = dual

        covol_w = tuple(scales[self.frame_m.index(l)] if l in base
                        else ONE / scales[self.frame_m.index(self.primal_label(l))]
                        for l in self.w_labels(base, dual))
        self.frame_w = CoordFrame(labels=self.w_labels(base, dual),
                                  covolumes=covol_w, name=self.w_name)

        plabels = self.frame_m.labels + dual
        pcov = scales + tuple(ONE / scales[self.frame_m.index(l)] for l in fiber)
        self.frame_p = CoordFrame(labels=plabels, covolumes=pcov,
                                  name=self.w_name + "-product")

        self.fiber_idx_p = tuple(self.frame_p.index(l) for l in fiber)
        self.m_to_p = {self.frame_m.index(l): self.frame_p.index(l)
                       for l in self.frame_m.labels}
        self.p_to_w = {self.frame_p.index(l): self.frame_w.index(l)
                       for l in self.frame_w.labels}
        self.w_to_p = {v: k for k, v in self.p_to_w.items()}

    def poincare_curvature(self):
        """Universal curvature sum dy^j ^ dY_j on the fibered product."""
        out = Form.zero(self.frame_p, 2)
        for l in self.fiber_labels:
            i = self.frame_p.index(l)
            j = self.frame_p.index(self.dual_label(l))
            out = out + Form.monomial(self.frame_p, (i, j))
        return out

    def transform_form(self, a):
        """Fiber integral of pullback(a) ^ exp(curvature); exact and linear."""
        if isinstance(a, Form):
            a = Polyform.from_forms(a.frame, [a]) if not a.is_zero else Polyform(a.frame, {})
        if a.frame != self.frame_m:
            raise ValueError("form does not live on the fibration total space")
        pulled = a.map_indices(self.m_to_p, self.frame_p)
        kernel = exp_trunc(self.poincare_curvature(), self.frame_p.dim)
        prod = pulled.wedge(kernel)
        return fiber_integrate(prod, self.fiber_idx_p,
                               orientation=self.fiber_orientation_p(),
                               result_frame=self.frame_w, index_map=self.p_to_w)

    def fiber_orientation_p(self):
        return tuple(self.frame_p.index(l) for l in self.fiber_orientation_labels)

    def dual_standard_forms(self):
        """Calibration pair of the dual model, by the standard expansions."""
        return standard_forms(self.frame_w)


class CoassocT4Fibration(_Fibration):
    """Projection of the flat model to its three base coordinates; fibers are
    the four-torus in y0..y3, dualized to Y0..Y3."""

    fiber_labels = ("y0", "y1", "y2", "y3")
    fiber_orientation_labels = ("y0", "y1", "y2", "y3")
    w_name = "w-coassoc-t4"
    kind = "coassociative-t4"

    @staticmethod
    def dual_label(l):
        return "Y" + l[1:]

    @staticmethod
    def primal_label(l):
        return "y" + l[1:]

    @staticmethod
    def w_labels(base, dual):
        return base + dual


class AssocT3Fibration(_Fibration):
    """Projection of the flat model to the four y coordinates; fibers are the
    three-torus in x1..x3, dualized to X1..X3."""

    fiber_labels = ("x1", "x2", "x3")
    fiber_orientation_labels = ("x1", "x2", "x3")
    w_name = "w-assoc-t3"
    kind = "associative-t3"

    @staticmethod
    def dual_label(l):
        return "X" + l[1:]

    @staticmethod
    def primal_label(l):
        return "x" + l[1:]

    @staticmethod
    def w_labels(base, dual):
        return dual + base     # dual frame ordered X1,X2,X3,y0..y3


def dual_frame(kind, scales=None):
    """The dual total-space frame for a fibration kind."""
    fib = make_fibration(kind, scales)
    return fib.frame_w


def make_fibration(kind, scales=None):
    frame = g2_frame(scales)
    if kind in ("coassociative-t4", "coassoc-t4"):
        return CoassocT4Fibration(frame)
    if kind in ("associative-t3", "assoc-t3"):
        return AssocT3Fibration(frame)
    raise ValueError("unknown fibration kind %r" % kind)


def poincare_curvature(fibration):
    return fibration.poincare_curvature()


def transform_form(a, fibration):
    return fibration.transform_form(a)


# -- cycles -------------------------------------------------------------------

def transform_semiflat_cycle(cycle, fibration=None):
    """Data swap of a semi-flat cycle under the fiberwise transform.

    Graphed fiber functions and fiber connection components trade places per
    the flat-model formulas; base connection components are unchanged.  The
    output lives on the dual fibration's total space.
    """
    fibration = fibration or CoassocT4Fibration()
    if not isinstance(fibration, CoassocT4Fibration):
        raise ValueError("semi-flat cycle transforms are defined on the coassociative fibration")
    wf = fibration.frame_w

    if isinstance(cycle, FiberCycle):
        return TorusPoint(coords=cycle.coefficients,
                          lattice=tuple(wf.covolumes[wf.index(fibration.dual_label(l))]
                                        for l in fibration.fiber_labels))

    if isinstance(cycle, SemiFlatCoassocCycle):
        if cycle.frame != fibration.frame_m and cycle.frame != fibration.frame_w:
            raise ValueError("cycle frame does not match the fibration")
        back = cycle.frame == fibration.frame_w
        relabel = (fibration.primal_label if back else fibration.dual_label)
        frame_out = fibration.frame_m if back else fibration.frame_w
        graph = tuple((relabel(l), fn) for l, fn in cycle.conn_fiber)
        conn_fiber = tuple((relabel(l), fn) for l, fn in cycle.graph)
        return SemiFlatCoassocCycle(graph=graph, conn_base=cycle.conn_base,
                                    conn_fiber=conn_fiber, frame=frame_out)

    if isinstance(cycle, SemiFlatAssocCycle):
        back = cycle.frame == fibration.frame_w
        relabel = (fibration.primal_label if back else fibration.dual_label)
        frame_out = fibration.frame_m if back else fibration.frame_w
        graph = tuple((relabel(l), fn) for l, fn in cycle.conn_fiber)
        conn_fiber = tuple((relabel(l), fn) for l, fn in cycle.graph)
        return SemiFlatAssocCycle(graph=graph, conn_base=cycle.conn_base,
                                  conn_fiber=conn_fiber, frame=frame_out)

    raise ValueError("not a semi-flat cycle: %r" % (cycle,))


# -- sections -----------------------------------------------------------------

@dataclass(frozen=True)
class ConnectionOnW:
    """Abelian connection on the dual total space.

    coefficients : dict label -> GridFn/PolyFn/number
        One coefficient function per dual-space coordinate (absent = 0).
    curvature : dict (label, label) -> field
        Cached curvature components d(coefficients), finite-difference
        consistent on grids.
    frame : CoordFrame
    base_vars : tuple of labels the coefficients depend on
    """

    coefficients: dict
    curvature: dict
    frame: CoordFrame
    base_vars: tuple

    def curvature_sup(self):
        total = 0.0
        for f in self.curvature.values():
            total = max(total, f.sup_norm() if hasattr(f, "sup_norm") else abs(float(f)))
        return total


def _fn_partial(fn, axis):
    return fn.partial(axis)


def transform_section(section, fibration):
    """Transform a section-with-flat-connection into a connection on W.

    Associative kind (section f of the coassociative fibration): the dual
    connection is ``a_i dx^i + f^k dY_k``.  Coassociative kind (section g of
    the associative fibration): ``a_j dy^j + g^b dX_b``.  The cached
    curvature holds every exterior-derivative component of the coefficients.
    """
    kind = section["kind"]
    comps = section["components"]
    conn = section.get("connection", {})
    if kind == "associative":
        fib = fibration if isinstance(fibration, CoassocT4Fibration) else CoassocT4Fibration()
        base_vars = ("x1", "x2", "x3")
        coeff = {}
        for i, lbl in enumerate(base_vars):
            if lbl in conn:
                coeff[lbl] = conn[lbl]
        for j, lbl in enumerate(fib.fiber_labels):
            coeff[fib.dual_label(lbl)] = comps[j]
    elif kind == "coassociative":
        fib = fibration if isinstance(fibration, AssocT3Fibration) else AssocT3Fibration()
        base_vars = ("y0", "y1", "y2", "y3")
        coeff = {}
        for lbl in base_vars:
            if lbl in conn:
                coeff[lbl] = conn[lbl]
        for b, lbl in enumerate(fib.fiber_labels):
            coeff[fib.dual_label(lbl)] = comps[b]
    else:
        raise ValueError("unknown section kind %r" % kind)

    frame_w = fib.frame_w
    curvature = {}
    for lbl, fn in coeff.items():
        if not hasattr(fn, "partial"):
            continue
        for ax, var in enumerate(base_vars):
            d = fn.partial(ax)
            if getattr(d, "is_zero", False):
                continue
            curvature[(var, lbl)] = d
    return ConnectionOnW(coefficients=coeff, curvature=curvature,
                         frame=frame_w, base_vars=base_vars)


def section_jet_curvature(jets, fibration, conn_jet=None):
    """Constant-coefficient curvature two-form of a transformed section jet.

    ``jets`` is the tuple of three (associative kind) or three-gradients
    (coassociative kind) quaternions; ``conn_jet`` optionally carries the
    exterior derivative of the base connection as a Form on the base block.
    """
    frame_w = fibration.frame_w
    terms = {}
    if isinstance(fibration, CoassocT4Fibration):
        base = ("x1", "x2", "x3")
        for i, q in enumerate(jets):
            bi = frame_w.index(base[i])
            for k, c in enumerate(q.to_tuple()):
                if c == 0:
                    continue
                dk = frame_w.index("Y%d" % k)
                idx = (bi, dk) if bi < dk else (dk, bi)
                sgn = 1 if bi < dk else -1
                terms[idx] = terms.get(idx, ZERO) + sgn * c
    else:
        base = ("y0", "y1", "y2", "y3")
        for b, q in enumerate(jets):
            db = frame_w.index("X%d" % (b + 1))
            for a, c in enumerate(q.to_tuple()):
                if c == 0:
                    continue
                ya = frame_w.index(base[a])
                idx = (ya, db) if ya < db else (db, ya)
                sgn = 1 if ya < db else -1
                terms[idx] = terms.get(idx, ZERO) + sgn * c
    out = Form(frame_w, 2, terms)
    if conn_jet is not None:
        out = out + conn_jet
    return out


# -- flat torus duality ---------------------------------------------------------

@dataclass(frozen=True)
class TorusPoint:
    """Point of a flat torus, coordinates mod the diagonal lattice."""

    coords: tuple
    lattice: tuple = None

    def __post_init__(self):
        lattice = self.lattice or (ONE,) * len(self.coords)
        lattice = tuple(Fraction(p) for p in lattice)
        coords = tuple(Fraction(c) % p for c, p in zip(self.coords, lattice))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "lattice", lattice)


@dataclass(frozen=True)
class FlatTorusConnection:
    """Flat abelian connection d + sum c_i dtheta^i on a flat torus.

    The coefficient c_i is gauge-defined mod 1/period_i, so it is stored as a
    point of the dual torus.
    """

    coefficients: tuple
    lattice: tuple = None

    def __post_init__(self):
        lattice = self.lattice or (ONE,) * len(self.coefficients)
        lattice = tuple(Fraction(p) for p in lattice)
        coeffs = tuple(Fraction(c) % (ONE / p) for c, p in zip(self.coefficients, lattice))
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "lattice", lattice)

    def holonomies(self):
        """exp(2 pi i c_i p_i) per circle, as exact phases in [0,1)."""
        return tuple(c * p % 1 for c, p in zip(self.coefficients, self.lattice))


def transform_flat_torus(obj):
    """Dualize a torus point to a flat connection and back; involutive."""
    if isinstance(obj, TorusPoint):
        return FlatTorusConnection(coefficients=obj.coords,
                                   lattice=_reciprocal(obj.lattice))
    if isinstance(obj, FlatTorusConnection):
        return TorusPoint(coords=obj.coefficients,
                          lattice=_reciprocal(obj.lattice))
    raise ValueError("expected a torus point or flat connection")
