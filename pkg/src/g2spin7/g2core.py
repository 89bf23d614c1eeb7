"""G2 structure constants on the standard flat frame.

Builds the calibration three-form and its dual four-form from their monomial
expansions, and derives everything else (cross product, the tangent-valued
three-form chi, irreducible projectors, stabilizer algebra, calibration
verdicts for tangent planes, Donaldson-Thomas residuals) from those two forms
plus the frame orientation.  No constant below is free: each is pinned by the
displayed expansions and machine-checked in the test suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import linalg
from .exalg import (ONE, ZERO, CoordFrame, Form, VectorValuedForm, perm_sign)

__all__ = [
    "G2_LABELS",
    "g2_frame",
    "standard_forms",
    "cross",
    "chi",
    "so_basis",
    "lie_act",
    "stabilizer_algebra",
    "decompose",
    "Plane",
    "CalibrationVerdict",
    "calibrate_plane",
    "dt_residual",
    "deformed_dt_residual",
    "symbol_complex",
    "LAMBDA2_EIGENVALUES",
]

G2_LABELS = ("x1", "x2", "x3", "y0", "y1", "y2", "y3")

# Eigenvalues of beta -> star(omega ^ beta) on two-forms, in the chirality
# fixed by the frame orientation dx123 dy0123: -2 on the 7-part, +1 on the
# 14-part (the stabilizer subalgebra).
LAMBDA2_EIGENVALUES = {7: Fraction(-2), 14: Fraction(1)}


def g2_frame(scales=None):
    """Standard flat frame x1,x2,x3,y0..y3 with orientation dx123 dy0123."""
    return CoordFrame(labels=G2_LABELS, covolumes=scales, name="g2")


@lru_cache(maxsize=None)
def standard_forms(frame):
    """The calibration three-form and four-form, by monomial expansion.

    Positional: coordinates 0..2 play the x-roles and 3..6 the y0..y3 roles,
    so any frame with the standard ordering (the flat model, its duals, the
    moduli identification frames) carries the same structure constants.
    """
    if frame.dim != 7:
        raise ValueError("calibration forms need a seven-dimensional frame")
    x1, x2, x3, y0, y1, y2, y3 = range(7)
    m = lambda *idx: Form.monomial(frame, idx)
    omega = (m(x1, x2, x3)
             - m(x1, y2, y3) - m(x1, y1, y0)
             - m(x2, y3, y1) - m(x2, y2, y0)
             - m(x3, y1, y2) - m(x3, y3, y0))
    theta = (m(y0, y1, y2, y3)
             + m(x2, x3).wedge(m(y2, y3) + m(y1, y0))
             + m(x3, x1).wedge(m(y3, y1) + m(y2, y0))
             + m(x1, x2).wedge(m(y1, y2) + m(y3, y0)))
    return omega, theta


def cross(u, v, frame=None):
    """Vector cross product defined by <u x v, w> = omega(u, v, w)."""
    frame = frame or g2_frame()
    omega, _ = standard_forms(frame)
    uv = omega.interior(u).interior(v)
    # interior contracts the first slot, so omega(u, v, .) = i_v i_u omega
    return tuple(uv.coeff((a,)) for a in range(frame.dim))


@lru_cache(maxsize=None)
def chi(frame):
    """Tangent-valued three-form with pairing <chi, v> = i_v theta."""
    _, theta = standard_forms(frame)
    comps = [theta.interior(frame.basis_vector(a)) for a in range(frame.dim)]
    return VectorValuedForm(frame, comps)


# -- stabilizer algebras ---------------------------------------------------

def so_basis(n):
    """Basis E_pq - E_qp (p < q) of antisymmetric n x n matrices."""
    basis = []
    for p in range(n):
        for q in range(p + 1, n):
            mat = [[ZERO] * n for _ in range(n)]
            mat[p][q] = ONE
            mat[q][p] = -ONE
            basis.append(tuple(tuple(row) for row in mat))
    return basis


def lie_act(matrix, form):
    """Derivation action of gl(n) on forms: A.e^k = -sum_m A[k][m] e^m."""
    frame = form.frame
    out = Form.zero(frame, form.degree)
    for idx, c in form.terms.items():
        for pos, i in enumerate(idx):
            row = matrix[i]
            for m, a in enumerate(row):
                if a == 0:
                    continue
                word = idx[:pos] + (m,) + idx[pos + 1:]
                if len(set(word)) != len(word):
                    continue
                sign = perm_sign(word)
                mono = Form(frame, form.degree, {tuple(sorted(word)): sign * (-a) * c})
                out = out + mono
    return out


def _basis_indices(dim, degree):
    return list(itertools.combinations(range(dim), degree))


def _form_to_vec(form, basis):
    return [form.terms.get(idx, ZERO) for idx in basis]


def _vec_to_form(vec, frame, basis, degree):
    return Form(frame, degree, {idx: c for idx, c in zip(basis, vec)})


def stabilizer_algebra(form):
    """Basis of the annihilator subalgebra {A in so(n) : A . form = 0}."""
    frame = form.frame
    n = frame.dim
    gens = so_basis(n)
    basis = _basis_indices(n, form.degree)
    cols = [_form_to_vec(lie_act(g, form), basis) for g in gens]
    mat = linalg.transpose(cols)
    kernel = linalg.nullspace(mat)
    out = []
    for coeffs in kernel:
        mat_sum = [[ZERO] * n for _ in range(n)]
        for c, g in zip(coeffs, gens):
            if c == 0:
                continue
            for i in range(n):
                for j in range(n):
                    mat_sum[i][j] += c * g[i][j]
        out.append(tuple(tuple(row) for row in mat_sum))
    return out


def stabilizer_is_closed(generators, form):
    """Check commutator closure by re-annihilation of the stabilized form."""
    for a in generators:
        for b in generators:
            comm = linalg.commutator([list(r) for r in a], [list(r) for r in b])
            if not lie_act(comm, form).is_zero:
                return False
    return True


# -- irreducible decompositions --------------------------------------------

@lru_cache(maxsize=None)
def _lambda2_projectors(frame):
    omega, _ = standard_forms(frame)
    basis = _basis_indices(frame.dim, 2)
    cols = []
    for idx in basis:
        beta = Form.monomial(frame, idx)
        cols.append(_form_to_vec(omega.wedge(beta).hodge(), basis))
    t = linalg.transpose(cols)
    n = len(basis)
    ident = linalg.identity(n)
    l7, l14 = LAMBDA2_EIGENVALUES[7], LAMBDA2_EIGENVALUES[14]
    p7 = linalg.mat_scale(linalg.mat_add(t, linalg.mat_scale(ident, -l14)), ONE / (l7 - l14))
    p14 = linalg.mat_scale(linalg.mat_add(t, linalg.mat_scale(ident, -l7)), ONE / (l14 - l7))
    return basis, p7, p14


@lru_cache(maxsize=None)
def _lambda3_projectors(frame):
    omega, theta = standard_forms(frame)
    basis3 = _basis_indices(frame.dim, 3)
    basis6 = _basis_indices(frame.dim, 6)
    basis7 = _basis_indices(frame.dim, 7)
    rows = []
    for idx6 in basis6:
        rows.append([omega.wedge(Form.monomial(frame, idx)).terms.get(idx6, ZERO) for idx in basis3])
    for idx7 in basis7:
        rows.append([theta.wedge(Form.monomial(frame, idx)).terms.get(idx7, ZERO) for idx in basis3])
    kernel = linalg.nullspace(rows)          # the 27-dimensional piece
    p27 = linalg.projector_onto_columns(kernel)
    w = _form_to_vec(omega, basis3)
    norm = sum(c * c for c in w)
    p1 = [[wi * wj / norm for wj in w] for wi in w]
    n = len(basis3)
    p7 = linalg.mat_add(linalg.identity(n), linalg.mat_scale(linalg.mat_add(p1, p27), -ONE))
    return basis3, p1, p7, p27


def decompose(form, degree=None):
    """Split a 1-, 2- or 3-form into irreducible components.

    Returns a dict keyed by component dimension: {7}, {7, 14} or {1, 7, 27}.
    Components are exact, mutually orthogonal and sum to the input.
    """
    frame = form.frame
    degree = form.degree if degree is None else degree
    if degree != form.degree:
        raise ValueError("degree argument disagrees with the form")
    if degree == 1:
        return {7: form}
    if degree == 2:
        basis, p7, p14 = _lambda2_projectors(frame)
        vec = _form_to_vec(form, basis)
        return {7: _vec_to_form(linalg.matvec(p7, vec), frame, basis, 2),
                14: _vec_to_form(linalg.matvec(p14, vec), frame, basis, 2)}
    if degree == 3:
        basis, p1, p7, p27 = _lambda3_projectors(frame)
        vec = _form_to_vec(form, basis)
        return {1: _vec_to_form(linalg.matvec(p1, vec), frame, basis, 3),
                7: _vec_to_form(linalg.matvec(p7, vec), frame, basis, 3),
                27: _vec_to_form(linalg.matvec(p27, vec), frame, basis, 3)}
    raise ValueError("unsupported degree %d" % degree)


# -- plane calibration -------------------------------------------------------

@dataclass(frozen=True)
class Plane:
    """A k-plane given by k spanning tangent vectors (k = 3 or 4)."""

    span: tuple

    def __post_init__(self):
        span = tuple(tuple(v) for v in self.span)
        object.__setattr__(self, "span", span)
        if len(span) not in (3, 4):
            raise ValueError("planes must have dimension 3 or 4")

    @property
    def k(self):
        return len(self.span)

    def to_dict(self):
        return {"span": [[_num_out(x) for x in v] for v in self.span]}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(tuple(_num_in(x) for x in v) for v in data["span"]))


def _num_out(x):
    return str(x) if isinstance(x, Fraction) else x


def _num_in(x):
    return Fraction(x) if isinstance(x, str) else x


def _gram_det(span):
    g = [[sum(a * b for a, b in zip(u, v)) for v in span] for u in span]
    n = len(g)
    from .exalg import _det
    return _det(g)


@dataclass(frozen=True)
class CalibrationVerdict:
    """Outcome of restricting a calibration form to a tangent plane."""

    kind: str                  # "associative" / "coassociative" / "neither"
    value: float               # restricted calibration value
    volume: float              # plane volume
    ratio: float               # comass ratio, in [-1, 1]
    orientation_sign: int      # sign of the restricted value (0 when not calibrated)
    defect_norm: float         # |chi restriction| (k=3) or |omega restriction| (k=4)
    exact: bool                # whether the verdict was decided exactly

    @property
    def calibrated(self):
        return self.kind != "neither"

    def to_dict(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "volume": self.volume,
            "ratio": self.ratio,
            "orientation_sign": self.orientation_sign,
            "defect_norm": self.defect_norm,
            "exact": self.exact,
        }


FLOAT_RATIO_TOL = 1e-9


def calibrate_plane(plane, frame=None):
    """Calibration verdict for a 3- or 4-plane.

    A 3-plane is associative exactly when the chi restriction vanishes,
    equivalently when |comass ratio| = 1.  A 4-plane is coassociative exactly
    when the omega restriction vanishes, equivalently when the theta ratio is
    +-1.  Both criteria are computed independently.
    """
    frame = frame or g2_frame()
    omega, theta = standard_forms(frame)
    span = plane.span
    exact = all(isinstance(x, Fraction) or isinstance(x, int) for v in span for x in v)
    det = _gram_det(span)
    if det == 0:
        raise ValueError("spanning set is linearly dependent")
    vol = math.sqrt(float(det))

    if plane.k == 3:
        value = omega.evaluate(*span)
        defect = chi(frame).evaluate(*span)
        defect_sq = sum(d * d for d in defect)
        if exact:
            flat = (value * value == det)
        else:
            flat = abs(abs(float(value) / vol) - 1.0) <= FLOAT_RATIO_TOL
        kind = "associative" if flat else "neither"
    else:
        value = theta.evaluate(*span)
        triples = list(itertools.combinations(range(4), 3))
        omega_vals = [omega.evaluate(*(span[i] for i in t)) for t in triples]
        defect_sq = sum(v * v for v in omega_vals)
        if exact:
            flat = defect_sq == 0
        else:
            flat = math.sqrt(float(defect_sq)) <= FLOAT_RATIO_TOL * vol
        kind = "coassociative" if flat else "neither"

    fvalue = float(value)
    ratio = fvalue / vol
    sign = 0 if not flat else (1 if fvalue > 0 else -1)
    return CalibrationVerdict(kind=kind, value=fvalue, volume=vol, ratio=ratio,
                              orientation_sign=sign,
                              defect_norm=math.sqrt(float(defect_sq)), exact=exact)


# -- Donaldson-Thomas residuals ----------------------------------------------

def dt_residual(curvature):
    """Six-form residual F ^ theta; zero exactly on the 14-part."""
    if curvature.degree != 2:
        raise ValueError("curvature must be a two-form")
    _, theta = standard_forms(curvature.frame)
    return curvature.wedge(theta)


def deformed_dt_residual(curvature):
    """Six-form residual F ^ theta + F^3 / 6 of the deformed equation."""
    if curvature.degree != 2:
        raise ValueError("curvature must be a two-form")
    _, theta = standard_forms(curvature.frame)
    cubed = curvature.wedge(curvature).wedge(curvature)
    scale = Fraction(1, 6) if not any(isinstance(c, float) for c in cubed.terms.values()) else (1.0 / 6.0)
    return curvature.wedge(theta) + cubed * scale


# -- deformation-complex symbol ----------------------------------------------

def symbol_complex(xi, frame=None):
    """Symbol sequence 0 -> L0 -> L1 -> L6 -> L7 -> 0 at a covector xi.

    Maps are xi^., xi^theta^., xi^. ; returns exact ranks and exactness flags.
    """
    frame = frame or g2_frame()
    _, theta = standard_forms(frame)
    cov = Form.covector(frame, xi)
    if cov.is_zero:
        raise ValueError("covector must be nonzero")

    b1 = _basis_indices(frame.dim, 1)
    b6 = _basis_indices(frame.dim, 6)
    b7 = _basis_indices(frame.dim, 7)

    m1 = linalg.transpose([_form_to_vec(cov, b1)])                 # L0 -> L1
    cols2 = []
    for idx in b1:
        a = Form.monomial(frame, idx)
        cols2.append(_form_to_vec(cov.wedge(theta).wedge(a), b6))
    m2 = linalg.transpose(cols2)                                   # L1 -> L6
    cols3 = []
    for idx in b6:
        a = Form.monomial(frame, idx)
        cols3.append(_form_to_vec(cov.wedge(a), b7))
    m3 = linalg.transpose(cols3)                                   # L6 -> L7

    r1, r2, r3 = linalg.rank(m1), linalg.rank(m2), linalg.rank(m3)
    comp21 = linalg.matmul(m2, m1)
    comp32 = linalg.matmul(m3, m2)
    zero21 = all(x == 0 for row in comp21 for x in row)
    zero32 = all(x == 0 for row in comp32 for x in row)
    return {
        "ranks": (r1, r2, r3),
        "dims": (1, 7, 7, 1),
        "euler": 1 - 7 + 7 - 1,
        "exact_at_1": zero21 and (r1 + r2 == 7),
        "exact_at_6": zero32 and (r2 + r3 == 7),
        "onto_7": r3 == 1,
        "injective_0": r1 == 1,
    }
