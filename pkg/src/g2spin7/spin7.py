"""Spin(7) analogs on the flat eight-space: the self-dual Cayley four-form,
irreducible decompositions, the quartic coupling, Cayley calibration, the
deformed instanton residual, reduction identities and the Cayley moduli
four-form.

The Cayley four-form is built from its displayed fourteen-monomial expansion
on the frame x0..x3, y0..y3 with orientation dx0123 dy0123.  Projectors come
from exactly computable equivariant data: the Hodge star, the span of the
stabilizer orbit directions and exact Gram projections; the quadratic
Casimir eigenspace construction is used as a floating-point cross-check in
the test suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import linalg
from .cycles import Q_UNITS, Quaternion
from .exalg import (ONE, ZERO, CoordFrame, Form, VectorValuedForm,
                    contract_vector_slots, perm_sign)
from .g2core import (CalibrationVerdict, FLOAT_RATIO_TOL, Plane, _basis_indices,
                     _form_to_vec, _gram_det, _vec_to_form, g2_frame, lie_act,
                     so_basis, stabilizer_algebra, standard_forms)
from .moduli import integrate

__all__ = [
    "SPIN7_LABELS",
    "spin7_frame",
    "theta_z",
    "chi_z",
    "decompose_s7",
    "quartic_tensor",
    "calibrate_cayley",
    "deformed_dt8_residual",
    "reduction_check",
    "CayleyTangent",
    "cayley_moduli_four_form",
    "symbol_complex_s7",
    "fiber_characteristic_check",
    "FIBER_CHARACTERISTIC_NUMBERS",
]

SPIN7_LABELS = ("x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3")


def spin7_frame(scales=None):
    return CoordFrame(labels=SPIN7_LABELS, covolumes=scales, name="spin7")


@lru_cache(maxsize=None)
def theta_z(frame):
    """The Cayley calibration four-form, by its monomial expansion."""
    if frame.dim != 8:
        raise ValueError("the Cayley form needs an eight-dimensional frame")
    x0, x1, x2, x3, y0, y1, y2, y3 = range(8)
    m = lambda *idx: Form.monomial(frame, idx)
    return (-m(y0, y1, y2, y3) - m(x0, x1, x2, x3)
            - (m(x1, x0) + m(x2, x3)).wedge(m(y1, y0) + m(y2, y3))
            - (m(x2, x0) + m(x3, x1)).wedge(m(y2, y0) + m(y3, y1))
            - (m(x3, x0) + m(x1, x2)).wedge(m(y3, y0) + m(y1, y2)))


@lru_cache(maxsize=None)
def chi_z(frame):
    """Tangent-valued three-form with pairing <chi_z, v> = i_v theta_z."""
    tz = theta_z(frame)
    return VectorValuedForm(frame, [tz.interior(frame.basis_vector(a))
                                    for a in range(frame.dim)])


# -- decompositions -----------------------------------------------------------

@lru_cache(maxsize=None)
def _stabilizer(frame):
    return tuple(stabilizer_algebra(theta_z(frame)))


@lru_cache(maxsize=None)
def _lambda2_projectors_s7(frame):
    basis = _basis_indices(8, 2)
    stab = _stabilizer(frame)
    cols = []
    for mat in stab:
        beta = {}
        for a in range(8):
            for b in range(a + 1, 8):
                c = mat[b][a]
                if c != 0:
                    beta[(a, b)] = c
        cols.append(_form_to_vec(Form(frame, 2, beta), basis))
    p21 = linalg.projector_onto_columns(cols)
    n = len(basis)
    p7 = linalg.mat_add(linalg.identity(n), linalg.mat_scale(p21, -ONE))
    return basis, p7, p21


@lru_cache(maxsize=None)
def _lambda4_projectors_s7(frame):
    basis = _basis_indices(8, 4)
    n = len(basis)
    tz = theta_z(frame)

    star = []
    for idx in basis:
        star.append(_form_to_vec(Form.monomial(frame, idx).hodge(), basis))
    star = linalg.transpose(star)

    half = Fraction(1, 2)
    p_sd = [[half * (ONE if i == j else ZERO) + half * star[i][j] for j in range(n)]
            for i in range(n)]
    p_asd = [[(ONE if i == j else ZERO) - p_sd[i][j] for j in range(n)] for i in range(n)]

    t_vec = _form_to_vec(tz, basis)
    norm = sum(c * c for c in t_vec)
    p1 = [[a * b / norm for b in t_vec] for a in t_vec]

    orbit = [_form_to_vec(lie_act(mat, tz), basis) for mat in so_basis(8)]
    orbit_basis = linalg.column_space_basis(linalg.transpose(orbit))
    p7 = linalg.projector_onto_columns(orbit_basis)

    p27 = [[p_sd[i][j] - p1[i][j] - p7[i][j] for j in range(n)] for i in range(n)]
    return basis, p1, p7, p27, p_asd


def decompose_s7(form, degree=None):
    """Split a 2- or 4-form on the flat Spin(7) frame into irreducibles.

    Degree 2 splits as {7, 21} with the 21-part the stabilizer subalgebra;
    degree 4 as {1, 7, 27, 35} with the 35-part the anti-self-dual forms.
    """
    frame = form.frame
    degree = form.degree if degree is None else degree
    if degree != form.degree:
        raise ValueError("degree argument disagrees with the form")
    if degree == 2:
        basis, p7, p21 = _lambda2_projectors_s7(frame)
        vec = _form_to_vec(form, basis)
        return {7: _vec_to_form(linalg.matvec(p7, vec), frame, basis, 2),
                21: _vec_to_form(linalg.matvec(p21, vec), frame, basis, 2)}
    if degree == 4:
        basis, p1, p7, p27, p_asd = _lambda4_projectors_s7(frame)
        vec = _form_to_vec(form, basis)
        return {1: _vec_to_form(linalg.matvec(p1, vec), frame, basis, 4),
                7: _vec_to_form(linalg.matvec(p7, vec), frame, basis, 4),
                27: _vec_to_form(linalg.matvec(p27, vec), frame, basis, 4),
                35: _vec_to_form(linalg.matvec(p_asd, vec), frame, basis, 4)}
    raise ValueError("unsupported degree %d" % degree)


# -- couplings -----------------------------------------------------------------

def hat_four_form(phi, frame=None):
    """Hatted class star(phi ^ chi_z) of a four-form; vanishes on the 27-part."""
    frame = frame or phi.frame
    return chi_z(frame).wedge(phi).hodge()


def quartic_tensor(phi1, phi2, phi3, phi4):
    """Symmetric quartic coupling on degree-four classes of the flat model."""
    frame = phi1.frame
    for p in (phi1, phi2, phi3, phi4):
        if p.degree != 4:
            raise ValueError("quartic coupling takes degree-four classes")
    tz = theta_z(frame)
    hats = [hat_four_form(p, frame) for p in (phi1, phi2, phi3, phi4)]
    core = contract_vector_slots(tz, hats)
    return integrate(core.wedge(tz))


# -- calibration ----------------------------------------------------------------

def calibrate_cayley(plane, frame=None):
    """Calibration verdict of a 4-plane against the Cayley four-form.

    Cayley exactly when |comass ratio| = 1; the orientation sign is reported
    since both orientations occur.
    """
    frame = frame or spin7_frame()
    if plane.k != 4:
        raise ValueError("Cayley calibration takes 4-planes")
    span = plane.span
    exact = all(isinstance(x, (Fraction, int)) for v in span for x in v)
    det = _gram_det(span)
    if det == 0:
        raise ValueError("spanning set is linearly dependent")
    vol = math.sqrt(float(det))
    value = theta_z(frame).evaluate(*span)
    if exact:
        flat = value * value == det
        defect = det - value * value
    else:
        flat = abs(abs(float(value)) / vol - 1.0) <= FLOAT_RATIO_TOL
        defect = float(det) - float(value) ** 2
    fvalue = float(value)
    return CalibrationVerdict(kind="cayley" if flat else "neither",
                              value=fvalue, volume=vol, ratio=fvalue / vol,
                              orientation_sign=(0 if not flat else (1 if fvalue > 0 else -1)),
                              defect_norm=math.sqrt(abs(float(defect))),
                              exact=exact)


# -- deformed instanton residual -------------------------------------------------

def deformed_dt8_residual(curvature):
    """Six-form residual star(F) + theta_z ^ F + F^3/6."""
    if curvature.degree != 2:
        raise ValueError("curvature must be a two-form")
    tz = theta_z(curvature.frame)
    cubed = curvature.wedge(curvature).wedge(curvature)
    scale = Fraction(1, 6) if not any(isinstance(c, float) for c in cubed.terms.values()) else 1.0 / 6.0
    return curvature.hodge() + tz.wedge(curvature) + cubed * scale


def symbol_complex_s7(xi, frame=None):
    """Symbol sequence 0 -> L0 -> L1 -> L2_7 -> 0 at a covector xi."""
    frame = frame or spin7_frame()
    cov = Form.covector(frame, xi)
    if cov.is_zero:
        raise ValueError("covector must be nonzero")
    basis1 = _basis_indices(8, 1)
    basis2 = _basis_indices(8, 2)
    _, p7, _ = _lambda2_projectors_s7(frame)
    m1 = linalg.transpose([_form_to_vec(cov, basis1)])
    cols = []
    for idx in basis1:
        w = cov.wedge(Form.monomial(frame, idx))
        cols.append(linalg.matvec(p7, _form_to_vec(w, basis2)))
    m2 = linalg.transpose(cols)
    r1, r2 = linalg.rank(m1), linalg.rank(m2)
    comp = linalg.matmul(m2, m1)
    return {
        "ranks": (r1, r2),
        "dims": (1, 8, 7),
        "euler": 1 - 8 + 7,
        "exact_at_1": all(x == 0 for row in comp for x in row) and (r1 + r2 == 8),
        "onto_7": r2 == 7,
        "injective_0": r1 == 1,
    }


# -- reductions -------------------------------------------------------------------

def _embed_g2(frame8):
    """Index map of the flat seven-space into the Spin(7) frame with the
    circle factor on x0."""
    g2f = g2_frame()
    mapping = {0: 1, 1: 2, 2: 3, 3: 4, 4: 5, 5: 6, 6: 7}
    return g2f, mapping


def reduction_check(kind, frame=None):
    """Structural reduction identities of the Cayley four-form.

    "g2-circle": the Cayley form equals (three-form ^ dt) - four-form of the
    embedded flat seven-space, with the circle on x0.  "cy4": the candidate
    -omega^2/2 + Re(holomorphic volume) built from the complex pairing
    z^a = x^a + i y^a is a Cayley-type form: self-dual, stabilizer dimension
    21, and squaring to 14 times the volume; the anti-self-dual block splits
    into complex types with real dimensions 20 + 15.
    """
    frame = frame or spin7_frame()
    tz = theta_z(frame)
    if kind == "g2-circle":
        g2f, mapping = _embed_g2(frame)
        om, th = standard_forms(g2f)
        om8 = om.map_indices(mapping, frame)
        th8 = th.map_indices(mapping, frame)
        dt = Form.monomial(frame, (0,))
        candidate = om8.wedge(dt) - th8
        mismatch = candidate - tz
        return {"kind": kind, "mismatch_terms": len(mismatch.terms),
                "exact": mismatch.is_zero,
                "conventions": {"circle": "x0", "g2_block": "x1..x3, y0..y3"}}
    if kind == "cy4":
        m = lambda *idx: Form.monomial(frame, idx)
        omega = sum((m(a, 4 + a) for a in range(1, 4)), start=m(0, 4))
        re_part, im_part = _complex_volume(frame)
        candidate = omega.wedge(omega) * Fraction(-1, 2) + re_part
        stab_dim = len(stabilizer_algebra(candidate))
        selfdual = candidate.hodge() == candidate
        square = candidate.wedge(candidate)
        vol = Form.volume(frame)
        squares_to_14 = square == 14 * vol
        dims = _cy4_type_dimensions(frame, omega)
        return {"kind": kind, "stabilizer_dim": stab_dim, "selfdual": selfdual,
                "squares_to_14_vol": squares_to_14, "asd_type_dims": dims,
                "exact": stab_dim == 21 and selfdual and squares_to_14,
                "conventions": {"pairing": "z^a = x^a + i y^a",
                                "kahler_form": "sum dx^a ^ dy^a"}}
    raise ValueError("unknown reduction kind %r" % kind)


def _complex_volume(frame):
    """Real and imaginary parts of (dx0+i dy0)^..^(dx3+i dy3)."""
    re = Form.scalar(frame, ONE)
    im = Form.zero(frame, 0)
    for a in range(4):
        dx = Form.monomial(frame, (a,))
        dy = Form.monomial(frame, (4 + a,))
        new_re = re.wedge(dx) - im.wedge(dy)
        new_im = re.wedge(dy) + im.wedge(dx)
        re, im = new_re, new_im
    return re, im


def _cy4_type_dimensions(frame, omega):
    """Real dimensions of the complex-type pieces inside the anti-self-dual
    four-forms: the (3,1)+(1,3) primitive part and omega ^ primitive (1,1)."""
    basis4 = _basis_indices(8, 4)
    n = len(basis4)

    # pullback action of the complex structure J (x_a -> y_a -> -x_a)
    jmat = [[ZERO] * 8 for _ in range(8)]
    for a in range(4):
        jmat[a][4 + a] = -ONE      # J* dx^a = -dy^a ... sign fixed by J e_x = e_y
        jmat[4 + a][a] = ONE
    jcols = []
    for idx in basis4:
        word = []
        coeff = ONE
        ok = True
        for i in idx:
            row = jmat[i]
            j = next((k for k, v in enumerate(row) if v != 0), None)
            if j is None:
                ok = False
                break
            coeff *= row[j]
            word.append(j)
        if not ok or len(set(word)) != len(word):
            jcols.append([ZERO] * n)
            continue
        sgn = perm_sign(word)
        target = tuple(sorted(word))
        col = [ZERO] * n
        col[basis4.index(target)] = sgn * coeff
        jcols.append(col)
    jstar = linalg.transpose(jcols)

    star = linalg.transpose([_form_to_vec(Form.monomial(frame, idx).hodge(), basis4)
                             for idx in basis4])

    # ASD intersect (J* = -1): primitive (3,1)+(1,3) block
    rows = []
    for i in range(n):
        rows.append([star[i][j] + (ONE if i == j else ZERO) for j in range(n)])
    for i in range(n):
        rows.append([jstar[i][j] + (ONE if i == j else ZERO) for j in range(n)])
    dim_31 = len(linalg.nullspace(rows))

    # ASD forms of the shape omega ^ (2-form)
    basis2 = _basis_indices(8, 2)
    cols = []
    for idx in basis2:
        w = omega.wedge(Form.monomial(frame, idx))
        cols.append(_form_to_vec(w, basis4))
    image = linalg.column_space_basis(linalg.transpose(cols))
    asd_rows = [[star[i][j] + (ONE if i == j else ZERO) for j in range(n)] for i in range(n)]
    # restrict the ASD condition to the image subspace
    sub = []
    for i in range(n):
        sub.append([sum(asd_rows[i][k] * v[k] for k in range(n)) for v in image])
    dim_omega_prim = len(linalg.nullspace(sub))
    return {"prim_31_plus_13": dim_31, "omega_wedge_prim_11": dim_omega_prim,
            "total": dim_31 + dim_omega_prim}


# -- Cayley moduli four-form -------------------------------------------------------

@dataclass(frozen=True)
class CayleyTangent:
    """Tangent vector to the Cayley cycle moduli at a flat fiber pair:
    a connection deformation (one-form on the fiber torus) plus a normal
    deformation (harmonic spinor, modeled as a quaternion)."""

    one_form: tuple = (ZERO, ZERO, ZERO, ZERO)
    spinor: Quaternion = Quaternion()

    def sd_lift(self, other):
        """Self-dual lift alpha ^ beta + star(alpha ^ beta) of two one-form
        parts, as an imaginary quaternion through the sigma basis."""
        frame4 = _fiber_frame()
        a = Form.covector(frame4, self.one_form)
        b = Form.covector(frame4, other.one_form)
        w = a.wedge(b)
        lift = w + w.hodge()
        comps = []
        for (i1, j1), (i2, j2) in (((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))):
            comps.append(lift.coeff((i1, j1)))
        return Quaternion(ZERO, *comps)


@lru_cache(maxsize=None)
def _fiber_frame():
    return CoordFrame(labels=("f0", "f1", "f2", "f3"), name="cayley-fiber")


def cayley_moduli_four_form(t1, t2, t3, t4, fiber_volume=ONE):
    """Four-form on the Cayley cycle moduli of the flat fiber model.

    Fully antisymmetric; evaluates the three displayed cases (four one-forms,
    two one-forms with two spinors through the self-dual lift acting by
    imaginary quaternions, four spinors through the determinant) and sets the
    unlisted mixed patterns to zero.  The fiber's calibration value is -1 in
    these conventions, which flips the sign of the two integr and-weighted
    cases relative to their displayed form.
    """
    tangents = (t1, t2, t3, t4)
    frame4 = _fiber_frame()
    total = ZERO
    slots = range(4)
    for r in (0, 2, 4):
        for subset in itertools.combinations(slots, r):
            rest = tuple(i for i in slots if i not in subset)
            word = subset + rest
            sign = perm_sign(word)
            if r == 4:
                a = [Form.covector(frame4, tangents[i].one_form) for i in subset]
                val = integrate(a[0].wedge(a[1]).wedge(a[2]).wedge(a[3])) * fiber_volume
            elif r == 2:
                lift = tangents[subset[0]].sd_lift(tangents[subset[1]])
                p, q = tangents[rest[0]].spinor, tangents[rest[1]].spinor
                val = p.inner(lift * q) * fiber_volume
            else:
                sp = [tangents[i].spinor.to_tuple() for i in slots]
                from .exalg import _det
                val = _det(sp) * fiber_volume
            total += sign * val
    return total


# -- coassociative fiber topology ----------------------------------------------------

FIBER_CHARACTERISTIC_NUMBERS = {
    "T4": {"signature": 0, "euler": 0},
    "K3": {"signature": -16, "euler": 24},
}


def fiber_characteristic_check(name):
    """Lookup check of 3 tau + 2 chi = 0 for admissible coassociative fibers."""
    data = FIBER_CHARACTERISTIC_NUMBERS[name]
    combo = 3 * data["signature"] + 2 * data["euler"]
    return {"fiber": name, "signature": data["signature"], "euler": data["euler"],
            "three_tau_plus_two_chi": combo, "admissible": combo == 0}
