"""Cubic couplings on flat-torus cohomology and the moduli-space calibration
forms of the flat cycle models.

Constant-coefficient forms on the flat seven-torus stand in for cohomology
classes.  The coupling tensors contract hatted classes into the calibration
three-form and integrate; the flat moduli models evaluate the defining
integrals of the moduli-space three- and four-forms on explicit tangent
bases and compare them, through a documented identification, with the
calibration forms of the dual flat model.

Convention set for the flat models (pinned by the equality checks, recorded
in every report):

* associative model: one-form directions map identically onto the dual
  three-torus, spinor directions onto the fiber torus; the mixed four-form
  case enters with a minus sign.
* coassociative model: the self-dual basis element sigma_b maps to twice the
  b-th dual base direction, the connection directions map through the
  reflection of the 0-th fiber circle, the bracket normalization gives
  structure constants +-2, and the four-one-form case carries weight 2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .cycles import Q_UNITS, Quaternion
from .exalg import (ONE, ZERO, CoordFrame, Form, VectorValuedForm,
                    contract_vector_slots, perm_sign)
from .g2core import chi, decompose, g2_frame, standard_forms

__all__ = [
    "integrate",
    "hat_three_form",
    "hat_two_form",
    "cubic_tensor",
    "yukawa_suite",
    "bfield_couplings",
    "enlarged_yukawa",
    "ModuliModelReport",
    "flat_moduli_forms",
    "cycle_moduli_cubic",
    "MODULI_MODELS",
]

MODULI_MODELS = ("bdl-t7", "ass-t3xt4", "coa-t3xt4")


def integrate(form):
    """Integral of a top-degree form over the frame's torus."""
    frame = form.frame
    if form.degree != frame.dim:
        raise ValueError("can only integrate top-degree forms")
    coeff = form.terms.get(tuple(range(frame.dim)), ZERO)
    return coeff * frame.orientation_sign * frame.covolume()


def hat_three_form(phi, frame=None):
    """Hatted class of a three-form: star(phi ^ chi), a tangent-valued 1-form."""
    frame = frame or phi.frame
    return chi(frame).wedge(phi).hodge()


def hat_two_form(beta, frame=None):
    """Hatted class of a two-form: contraction of beta into the form slots of
    chi, a tangent-valued one-form."""
    frame = frame or beta.frame
    cv = chi(frame)
    comps = []
    for comp in cv.components:
        out = Form.zero(frame, 1)
        for idx, c in beta.terms.items():
            v1 = frame.basis_vector(idx[0])
            v2 = frame.basis_vector(idx[1])
            out = out + comp.interior(v1).interior(v2) * c
        comps.append(out)
    return VectorValuedForm(frame, comps)


def cubic_tensor(phi1, phi2, phi3):
    """Symmetric cubic coupling on degree-three classes of the flat model."""
    frame = phi1.frame
    for p in (phi1, phi2, phi3):
        if p.degree != 3:
            raise ValueError("cubic coupling takes degree-three classes")
    omega, theta = standard_forms(frame)
    hats = [hat_three_form(p, frame) for p in (phi1, phi2, phi3)]
    core = contract_vector_slots(omega, hats)
    return integrate(core.wedge(theta))


def yukawa_suite(phi, tolerance=0):
    """Yukawa coupling, metric pairing and prepotential for a 27-part class.

    Returns Y = C(phi,phi,phi), G = C(phi,phi,omega), F = C(omega,omega,omega)
    together with the measured ratios G / <phi,phi> and Y / <omega,omega>;
    the first ratio is one constant on the 27-part, the second is reported
    rather than assumed constant.
    """
    frame = phi.frame
    parts = decompose(phi, 3)
    defect = (parts[1] + parts[7]).norm_sq()
    if defect > tolerance:
        raise ValueError("class is not in the 27-part (defect %s)" % defect)
    omega, theta = standard_forms(frame)
    y = cubic_tensor(phi, phi, phi)
    g = cubic_tensor(phi, phi, omega)
    f = cubic_tensor(omega, omega, omega)
    pairing = integrate(phi.wedge(phi.hodge()))
    omega_pairing = integrate(omega.wedge(theta))
    return {
        "Y": y,
        "G": g,
        "F": f,
        "pairing": pairing,
        "G_ratio": None if pairing == 0 else g / pairing,
        "Y_ratio": None if y == 0 else y / omega_pairing,
    }


def bfield_couplings(beta1, beta2, beta3=None):
    """Couplings for degree-two classes: the bilinear pairing with the
    calibration three-form and the hatted cubic."""
    frame = beta1.frame
    omega, theta = standard_forms(frame)
    for b in (beta1, beta2) + (() if beta3 is None else (beta3,)):
        if b.degree != 2:
            raise ValueError("b-field couplings take degree-two classes")
    q = integrate(beta1.wedge(beta2).wedge(omega))
    out = {"Q": q}
    if beta3 is not None:
        hats = [hat_two_form(b, frame) for b in (beta1, beta2, beta3)]
        core = contract_vector_slots(omega, hats)
        out["Cprime"] = integrate(core.wedge(theta))
    return out


def enlarged_yukawa(args, weights=None):
    """Degree-signature dispatch of the combined coupling.

    Scalars (degree-zero classes or plain numbers) multiply through; the
    remaining signature dispatches to the cubic coupling (3,3,3), the
    two-class pairing against a three-class (2,2,3), the hatted cubic
    (2,2,2), the metric pairing (3,3) or the bilinear coupling (2,2).
    Unsupported signatures raise.
    """
    weights = weights or {}
    if len(args) != 3:
        raise ValueError("the enlarged coupling takes three arguments")
    scalar = ONE
    forms = []
    for a in args:
        if isinstance(a, Form) and a.degree == 0:
            scalar *= a.terms.get((), ZERO)
        elif isinstance(a, Form):
            forms.append(a)
        else:
            scalar *= a
    sig = tuple(sorted(f.degree for f in forms))
    if scalar == 0:
        return ZERO
    if not forms:
        frame = g2_frame()
        return scalar * weights.get("()", ONE) * frame.covolume()
    frame = forms[0].frame
    omega, theta = standard_forms(frame)
    if sig == (3, 3, 3):
        val = cubic_tensor(*forms)
    elif sig == (2, 2, 3):
        two = [f for f in forms if f.degree == 2]
        three = next(f for f in forms if f.degree == 3)
        val = integrate(two[0].wedge(two[1]).wedge(three))
    elif sig == (2, 2, 2):
        val = bfield_couplings(*forms)["Cprime"]
    elif sig == (3, 3):
        val = integrate(forms[0].wedge(forms[1].hodge()))
    elif sig == (2, 2):
        val = bfield_couplings(forms[0], forms[1])["Q"]
    else:
        raise ValueError("unsupported degree signature %r" % (sig,))
    return scalar * weights.get(str(sig), ONE) * val


# -- flat moduli models -------------------------------------------------------

def _quaternion_basis_matrix():
    return [[ONE if i == j else ZERO for j in range(4)] for i in range(4)]


def _left_mult_inner(a, p, q):
    """<a * conj(e_p), conj(e_q)> for a in Im(H) basis units."""
    return (a * Q_UNITS[p].conj()).inner(Q_UNITS[q].conj())


_SIGMA_PLUS = (((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2)))


def _sigma_plus_form(frame4, b):
    (a1, b1), (a2, b2) = _SIGMA_PLUS[b]
    return Form.monomial(frame4, (a1, b1)) + Form.monomial(frame4, (a2, b2))


def _two_form_to_matrix(beta):
    """so(4) matrix of a two-form, in the convention that makes the bracket
    of the self-dual basis close with structure constants +2."""
    n = beta.frame.dim
    m = [[ZERO] * n for _ in range(n)]
    for (a, b), c in beta.terms.items():
        m[a][b] -= c
        m[b][a] += c
    return m


def _matrix_to_two_form(m, frame4):
    terms = {}
    n = frame4.dim
    for a in range(n):
        for b in range(a + 1, n):
            c = -m[a][b]
            if c != 0:
                terms[(a, b)] = c
    return Form(frame4, 2, terms)


def _bracket_two_forms(b1, b2):
    m = linalg.commutator(_two_form_to_matrix(b1), _two_form_to_matrix(b2))
    return _matrix_to_two_form(m, b1.frame)


@dataclass(frozen=True)
class ModuliModelReport:
    model: str
    three_form: Form          # identified onto the dual-model frame
    four_form: Form
    reference_three: Form
    reference_four: Form
    scale: Fraction
    exact: bool
    conventions: dict

    def to_dict(self):
        from .exalg import form_to_dict
        return {
            "model": self.model,
            "scale": str(self.scale),
            "exact": self.exact,
            "conventions": self.conventions,
            "three_form": form_to_dict(self.three_form),
            "four_form": form_to_dict(self.four_form),
        }


def _dual_model_frame(name):
    return CoordFrame(labels=("x1", "x2", "x3", "y0", "y1", "y2", "y3"),
                      name=name)


def _identified(components, frame, degree, factors):
    terms = {}
    for idx, val in components.items():
        for i in idx:
            val = val / factors[i]
        if val != 0:
            terms[idx] = val
    return Form(frame, degree, terms)


def _common_scale(candidate, reference):
    """Single ratio candidate/reference across all monomials, or None."""
    if set(candidate.terms) != set(reference.terms):
        return None
    scale = None
    for idx, c in reference.terms.items():
        r = candidate.terms[idx] / c
        if scale is None:
            scale = r
        elif r != scale:
            return None
    return scale


def flat_moduli_forms(model, scales=None):
    """Moduli-space three- and four-forms of a flat cycle model, identified
    with the calibration forms of the dual flat model.

    Supported models: "bdl-t7" (flat abelian bundles on the seven-torus),
    "ass-t3xt4" (fiberwise flat pairs of the associative fibration) and
    "coa-t3xt4" (fiberwise flat pairs of the coassociative fibration).
    Returns a report with the identified forms, the single positive scale
    relating them to the reference calibration pair, and the convention set.
    """
    if model == "bdl-t7":
        return _bdl_model(scales)
    if model == "ass-t3xt4":
        return _ass_model(scales)
    if model == "coa-t3xt4":
        return _coa_model(scales)
    raise ValueError("unknown flat model %r" % model)


def _bdl_model(scales):
    frame = g2_frame(scales)
    omega, theta = standard_forms(frame)
    dual = _dual_model_frame("bdl-t7-dual")
    vol = frame.covolume()
    comp3 = {}
    for idx in itertools.combinations(range(7), 3):
        val = integrate(Form.monomial(frame, idx).wedge(theta))
        if val:
            comp3[idx] = val
    comp4 = {}
    for idx in itertools.combinations(range(7), 4):
        val = integrate(Form.monomial(frame, idx).wedge(omega))
        if val:
            comp4[idx] = val
    three = Form(dual, 3, comp3)
    four = Form(dual, 4, comp4)
    ref3, ref4 = standard_forms(dual)
    s3 = _common_scale(three, ref3)
    s4 = _common_scale(four, ref4)
    exact = s3 == s4 and s3 is not None and s3 > 0
    return ModuliModelReport(
        model="bdl-t7", three_form=three, four_form=four,
        reference_three=ref3, reference_four=ref4,
        scale=s3 if exact else None, exact=exact,
        conventions={"identification": "one-form basis to dual-torus basis, identity",
                     "volume": str(vol)})


def _ass_model(scales):
    frame = g2_frame(scales)
    fiber_vol = frame.covolumes[0] * frame.covolumes[1] * frame.covolumes[2]
    dual = _dual_model_frame("ass-t3xt4-dual")
    frame3 = CoordFrame(labels=("x1", "x2", "x3"))
    units = (None, Q_UNITS[1], Q_UNITS[2], Q_UNITS[3])

    comp3 = {}
    for idx in itertools.combinations(range(7), 3):
        xs = [i for i in idx if i < 3]
        ss = [i - 3 for i in idx if i >= 3]
        if len(xs) == 3:
            comp3[idx] = fiber_vol
        elif len(xs) == 1 and len(ss) == 2:
            a = units[xs[0] + 1]
            val = -_left_mult_inner(a, ss[0], ss[1]) * fiber_vol
            if val:
                comp3[idx] = val
    comp4 = {}
    for idx in itertools.combinations(range(7), 4):
        xs = [i for i in idx if i < 3]
        ss = [i - 3 for i in idx if i >= 3]
        if len(xs) == 2 and len(ss) == 2:
            two = Form.monomial(frame3, tuple(xs)).hodge()
            ((k,), c), = two.terms.items()
            a = c * units[k + 1]
            val = -(Q_UNITS[ss[0]].conj()).inner(a * Q_UNITS[ss[1]].conj()) * fiber_vol
            if val:
                comp4[idx] = val
        elif len(ss) == 4:
            comp4[idx] = fiber_vol
    three = Form(dual, 3, comp3)
    four = Form(dual, 4, comp4)
    ref3, ref4 = standard_forms(dual)
    s3 = _common_scale(three, ref3)
    s4 = _common_scale(four, ref4)
    exact = s3 is not None and s3 == s4 and s3 > 0
    return ModuliModelReport(
        model="ass-t3xt4", three_form=three, four_form=four,
        reference_three=ref3, reference_four=ref4,
        scale=s3 if exact else None, exact=exact,
        conventions={
            "identification": "one-forms to dual base identically, parallel spinors to fiber torus",
            "clifford": "left multiplication by Im(H), conjugated slots",
            "mixed_four_form_sign": "-1",
            "fiber_volume": str(fiber_vol)})


def _coa_model(scales):
    frame = g2_frame(scales)
    fiber_vol = frame.covolume((3, 4, 5, 6))
    dual = _dual_model_frame("coa-t3xt4-dual")
    frame4 = CoordFrame(labels=("y0", "y1", "y2", "y3"))
    sigmas = [_sigma_plus_form(frame4, b) for b in range(3)]
    vol4 = Form.volume(frame4)

    def wedge_vol(a, b):
        w = a.wedge(b)
        return w.terms.get((0, 1, 2, 3), ZERO)

    comp3 = {}
    for idx in itertools.combinations(range(7), 3):
        ms = [i for i in idx if i < 3]
        ns = [i - 3 for i in idx if i >= 3]
        if len(ms) == 3:
            br = _bracket_two_forms(sigmas[0], sigmas[1])
            comp3[idx] = wedge_vol(br, sigmas[2]) * fiber_vol
        elif len(ms) == 1 and len(ns) == 2:
            val = -wedge_vol(sigmas[ms[0]], Form.monomial(frame4, tuple(ns))) * fiber_vol
            if val:
                comp3[idx] = val
    comp4 = {}
    for idx in itertools.combinations(range(7), 4):
        ms = [i for i in idx if i < 3]
        ns = [i - 3 for i in idx if i >= 3]
        if len(ns) == 4:
            comp4[idx] = -fiber_vol / 2
        elif len(ms) == 2 and len(ns) == 2:
            br = _bracket_two_forms(sigmas[ms[0]], sigmas[ms[1]])
            val = wedge_vol(br, Form.monomial(frame4, tuple(ns))) * fiber_vol
            if val:
                comp4[idx] = val
    factors = [Fraction(2)] * 3 + [Fraction(-1), ONE, ONE, ONE]
    three = _identified(comp3, dual, 3, factors)
    four = _identified(comp4, dual, 4, factors)
    ref3, ref4 = standard_forms(dual)
    s3 = _common_scale(three, ref3)
    s4 = _common_scale(four, ref4)
    exact = s3 is not None and s3 == s4 and s3 > 0
    return ModuliModelReport(
        model="coa-t3xt4", three_form=three, four_form=four,
        reference_three=ref3, reference_four=ref4,
        scale=s3 if exact else None, exact=exact,
        conventions={
            "identification": "sigma_b to 2 d/dx_b, connection directions through"
                              " reflection of the 0-th dual circle",
            "bracket": "so(4) commutator, structure constants +-2",
            "four_one_form_weight": "1/2",
            "fiber_volume": str(fiber_vol)})


def cycle_moduli_cubic(kind, args, abelian=True):
    """Cubic tensor on a cycle moduli space; identically zero for abelian
    gauge data since every term carries a Lie bracket."""
    if kind not in ("ass", "coa", "bdl"):
        raise ValueError("unknown cycle moduli kind %r" % kind)
    if not abelian:
        raise ValueError("non-abelian gauge groups are not supported")
    if len(args) != 3:
        raise ValueError("the cubic tensor takes three tangent vectors")
    return ZERO
