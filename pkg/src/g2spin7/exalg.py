"""Exact sparse exterior calculus on framed flat coordinate spaces.

A :class:`Form` is a sparse sum of coefficient * basis monomial terms over a
:class:`CoordFrame`.  Coefficients are exact rationals for all structural
identities; binary64 coefficients are accepted for grid-sampled data and flow
through the same code paths.  All values are immutable after construction and
every operation is pure.

Conventions
-----------
* The metric is the identity in frame coordinates; lattice scalings enter
  only through per-coordinate covolumes used by integration.
* The Hodge star satisfies ``a ^ star(b) == inner(a, b) * vol`` where ``vol``
  is the wedge of coordinate differentials in frame orientation order.
* ``fiber_integrate`` extracts the coefficient of the top fiber monomial,
  signed by the fiber orientation and scaled by the fiber covolume.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

__all__ = [
    "CoordFrame",
    "Form",
    "Polyform",
    "VectorValuedForm",
    "perm_sign",
    "wedge",
    "exp_trunc",
    "fiber_integrate",
    "contract_vector_slots",
    "form_to_dict",
    "form_from_dict",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def perm_sign(word):
    """Sign of the permutation sorting ``word`` (entries must be distinct)."""
    sign = 1
    n = len(word)
    for i in range(n):
        for j in range(i + 1, n):
            if word[i] > word[j]:
                sign = -sign
    return sign


def _merge_indices(a, b):
    """Merge increasing index tuples a, b.

    Returns ``(sign, merged)`` with the sign of the interleaving permutation,
    or ``None`` when the tuples share an index.
    """
    out = []
    sign = 1
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        if a[i] == b[j]:
            return None
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining entries of a
            if (la - i) % 2:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


def _sort_indices(word):
    """Sort an index word, returning (sign, tuple) or None on repeats."""
    if len(set(word)) != len(word):
        return None
    return perm_sign(word), tuple(sorted(word))


@dataclass(frozen=True)
class CoordFrame:
    """Orthonormal coordinate frame on a flat plane/torus block.

    Parameters
    ----------
    labels : tuple of str
        Distinct coordinate names, one per dimension.
    orientation : tuple of int, optional
        Coordinate indices in positive orientation order.  Defaults to
        ``0..dim-1``.
    covolumes : tuple of Fraction, optional
        Positive period of each coordinate circle (1 for unit tori and for
        non-compact directions).
    name : str
        Identifier used by the JSON serialization.
    """

    labels: tuple
    orientation: tuple = None
    covolumes: tuple = None
    name: str = ""

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError("frame labels must be distinct")
        object.__setattr__(self, "labels", labels)
        n = len(labels)
        orientation = self.orientation
        if orientation is None:
            orientation = tuple(range(n))
        orientation = tuple(orientation)
        if sorted(orientation) != list(range(n)):
            raise ValueError("orientation must be a permutation of 0..dim-1")
        object.__setattr__(self, "orientation", orientation)
        covolumes = self.covolumes
        if covolumes is None:
            covolumes = (ONE,) * n
        covolumes = tuple(Fraction(c) for c in covolumes)
        if any(c <= 0 for c in covolumes):
            raise ValueError("covolumes must be strictly positive")
        object.__setattr__(self, "covolumes", covolumes)

    @property
    def dim(self):
        return len(self.labels)

    @cached_property
    def orientation_sign(self):
        return perm_sign(self.orientation)

    def index(self, label):
        return self.labels.index(label)

    def basis_vector(self, i):
        v = [ZERO] * self.dim
        v[i] = ONE
        return tuple(v)

    def covolume(self, indices=None):
        idx = range(self.dim) if indices is None else indices
        total = ONE
        for i in idx:
            total *= self.covolumes[i]
        return total


def _check_frame(a, b):
    if a.frame != b.frame:
        raise ValueError("forms live on different frames")


class Form:
    """Sparse exterior form of a single degree."""

    __slots__ = ("frame", "degree", "terms")

    def __init__(self, frame, degree, terms=None):
        if degree < 0:
            raise ValueError("degree must be >= 0")
        clean = {}
        for idx, coeff in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError("multi-index length does not match degree")
            if list(idx) != sorted(set(idx)):
                raise ValueError("multi-indices must be strictly increasing")
            if any(i < 0 or i >= frame.dim for i in idx):
                raise ValueError("index out of range for frame")
            if coeff == 0:
                continue
            clean[idx] = coeff if isinstance(coeff, float) else Fraction(coeff)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *args):
        raise AttributeError("Form is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, frame, degree=0):
        return cls(frame, degree, {})

    @classmethod
    def monomial(cls, frame, indices, coeff=ONE):
        srt = _sort_indices(tuple(indices))
        if srt is None:
            return cls.zero(frame, len(indices))
        sign, idx = srt
        return cls(frame, len(idx), {idx: sign * coeff})

    @classmethod
    def scalar(cls, frame, value):
        return cls(frame, 0, {(): value})

    @classmethod
    def covector(cls, frame, components):
        return cls(frame, 1, {(i,): c for i, c in enumerate(components)})

    @classmethod
    def volume(cls, frame):
        return cls.monomial(frame, frame.orientation)

    # -- basic algebra -----------------------------------------------------

    def _build(self, degree, terms):
        return Form(self.frame, degree, terms)

    def __add__(self, other):
        if isinstance(other, Polyform):
            return other + self
        _check_frame(self, other)
        if self.degree != other.degree:
            return Polyform.from_forms(self.frame, [self, other])
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = terms.get(idx, ZERO) + c
        return self._build(self.degree, terms)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self._build(self.degree, {i: -c for i, c in self.terms.items()})

    def __mul__(self, scalar):
        if isinstance(scalar, (Form, Polyform)):
            raise TypeError("use wedge() for form products")
        return self._build(self.degree, {i: c * scalar for i, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (ONE / Fraction(scalar)) if not isinstance(scalar, float) else self * (1.0 / scalar)

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self.frame == other.frame and self.degree == other.degree
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.frame, self.degree, tuple(sorted(self.terms.items()))))

    @property
    def is_zero(self):
        return not self.terms

    def coeff(self, indices):
        srt = _sort_indices(tuple(indices))
        if srt is None:
            return ZERO
        sign, idx = srt
        return sign * self.terms.get(idx, ZERO)

    # -- exterior operations ------------------------------------------------

    def wedge(self, other):
        if isinstance(other, Polyform):
            return Polyform.from_forms(self.frame, [self]).wedge(other)
        _check_frame(self, other)
        degree = self.degree + other.degree
        terms = {}
        for ia, ca in self.terms.items():
            for ib, cb in other.terms.items():
                merged = _merge_indices(ia, ib)
                if merged is None:
                    continue
                sign, idx = merged
                c = terms.get(idx, ZERO) + sign * ca * cb
                if c == 0:
                    terms.pop(idx, None)
                else:
                    terms[idx] = c
        return self._build(degree, terms)

    __xor__ = wedge

    def hodge(self):
        n = self.frame.dim
        osign = self.frame.orientation_sign
        allidx = set(range(n))
        terms = {}
        for idx, c in self.terms.items():
            comp = tuple(sorted(allidx - set(idx)))
            sign = perm_sign(idx + comp) * osign
            terms[comp] = terms.get(comp, ZERO) + sign * c
        return self._build(n - self.degree, terms)

    def interior(self, vector):
        """Contraction with a tangent vector (antiderivation of degree -1)."""
        if len(vector) != self.frame.dim:
            raise ValueError("vector dimension mismatch")
        if self.degree == 0:
            return Form.zero(self.frame, 0)
        terms = {}
        for idx, c in self.terms.items():
            for pos, i in enumerate(idx):
                v = vector[i]
                if v == 0:
                    continue
                rest = idx[:pos] + idx[pos + 1:]
                sign = -1 if pos % 2 else 1
                val = terms.get(rest, ZERO) + sign * v * c
                if val == 0:
                    terms.pop(rest, None)
                else:
                    terms[rest] = val
        return self._build(self.degree - 1, terms)

    def evaluate(self, *vectors):
        """Antisymmetric multilinear evaluation on ``degree`` tangent vectors."""
        if len(vectors) != self.degree:
            raise ValueError("expected %d vectors, got %d" % (self.degree, len(vectors)))
        if self.degree == 0:
            return self.terms.get((), ZERO)
        total = ZERO
        for idx, c in self.terms.items():
            rows = [[v[i] for i in idx] for v in vectors]
            total += c * _det(rows)
        return total

    __call__ = evaluate

    def inner(self, other):
        """Pointwise inner product (monomials are orthonormal)."""
        _check_frame(self, other)
        if self.degree != other.degree:
            return ZERO
        small, big = (self.terms, other.terms) if len(self.terms) <= len(other.terms) else (other.terms, self.terms)
        return sum((c * big[i] for i, c in small.items() if i in big), start=ZERO)

    def norm_sq(self):
        return sum((c * c for c in self.terms.values()), start=ZERO)

    def map_indices(self, index_map, frame):
        """Reindex into ``frame`` through ``index_map``, resorting with signs."""
        terms = {}
        for idx, c in self.terms.items():
            srt = _sort_indices(tuple(index_map[i] for i in idx))
            if srt is None:
                raise ValueError("index map is not injective on this form")
            sign, new = srt
            terms[new] = terms.get(new, ZERO) + sign * c
        return Form(frame, self.degree, terms)

    def __repr__(self):
        if self.is_zero:
            return "Form<0 (deg %d)>" % self.degree
        labels = self.frame.labels
        bits = []
        for idx in sorted(self.terms):
            mono = "^".join(labels[i] for i in idx) if idx else "1"
            bits.append("%s*%s" % (self.terms[idx], mono))
        return "Form<" + " + ".join(bits) + ">"


def _det(rows):
    n = len(rows)
    if n == 0:
        return ONE
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = ZERO
    for j, head in enumerate(rows[0]):
        if head == 0:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = head * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


class Polyform:
    """Sum of forms of distinct degrees on one frame."""

    __slots__ = ("frame", "components")

    def __init__(self, frame, components=None):
        comps = {}
        for deg, form in (components or {}).items():
            if form.frame != frame:
                raise ValueError("component frame mismatch")
            if form.degree != deg:
                raise ValueError("component filed under wrong degree")
            if not form.is_zero:
                comps[deg] = form
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "components", comps)

    def __setattr__(self, *args):
        raise AttributeError("Polyform is immutable")

    @classmethod
    def from_forms(cls, frame, forms):
        comps = {}
        for f in forms:
            if f.degree in comps:
                comps[f.degree] = comps[f.degree] + f
            else:
                comps[f.degree] = f
        return cls(frame, comps)

    @classmethod
    def one(cls, frame):
        return cls(frame, {0: Form.scalar(frame, ONE)})

    @property
    def degrees(self):
        return tuple(sorted(self.components))

    @property
    def is_zero(self):
        return not self.components

    def degree_part(self, k):
        return self.components.get(k, Form.zero(self.frame, k))

    def __add__(self, other):
        if isinstance(other, Form):
            other = Polyform.from_forms(other.frame, [other])
        forms = list(self.components.values()) + list(other.components.values())
        return Polyform.from_forms(self.frame, forms)

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, scalar):
        return Polyform(self.frame, {d: f * scalar for d, f in self.components.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Form):
            other = Polyform.from_forms(other.frame, [other])
        if not isinstance(other, Polyform):
            return NotImplemented
        return self.frame == other.frame and self.components == other.components

    def wedge(self, other):
        if isinstance(other, Form):
            other = Polyform.from_forms(other.frame, [other])
        out = {}
        for da, fa in self.components.items():
            for db, fb in other.components.items():
                piece = fa.wedge(fb)
                if piece.is_zero:
                    continue
                deg = piece.degree
                out[deg] = out[deg] + piece if deg in out else piece
        return Polyform(self.frame, {d: f for d, f in out.items() if not f.is_zero})

    def hodge(self):
        return Polyform.from_forms(self.frame, [f.hodge() for f in self.components.values()])

    def map_indices(self, index_map, frame):
        return Polyform.from_forms(frame, [f.map_indices(index_map, frame) for f in self.components.values()])

    def __repr__(self):
        return "Polyform<%s>" % ", ".join("deg %d: %d terms" % (d, len(f.terms)) for d, f in sorted(self.components.items()))


class VectorValuedForm:
    """Tangent-vector-valued form: one component form per coordinate direction."""

    __slots__ = ("frame", "components")

    def __init__(self, frame, components):
        components = tuple(components)
        if len(components) != frame.dim:
            raise ValueError("need one component per coordinate direction")
        degs = {f.degree for f in components}
        if len(degs) > 1:
            raise ValueError("components must share a degree")
        for f in components:
            if f.frame != frame:
                raise ValueError("component frame mismatch")
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "components", components)

    def __setattr__(self, *args):
        raise AttributeError("VectorValuedForm is immutable")

    @property
    def degree(self):
        return self.components[0].degree

    def pair(self, vector):
        """Metric pairing of the vector slot: sum_a v[a] * component_a."""
        out = Form.zero(self.frame, self.degree)
        for v, comp in zip(vector, self.components):
            if v != 0:
                out = out + comp * v
        return out

    def evaluate(self, *vectors):
        """Evaluate every component on the given tangent vectors."""
        return tuple(c.evaluate(*vectors) for c in self.components)

    def wedge(self, form):
        return VectorValuedForm(self.frame, [c.wedge(form) for c in self.components])

    def hodge(self):
        return VectorValuedForm(self.frame, [c.hodge() for c in self.components])

    def __add__(self, other):
        return VectorValuedForm(self.frame, [a + b for a, b in zip(self.components, other.components)])

    def __mul__(self, scalar):
        return VectorValuedForm(self.frame, [c * scalar for c in self.components])

    __rmul__ = __mul__

    @property
    def is_zero(self):
        return all(c.is_zero for c in self.components)

    def __eq__(self, other):
        if not isinstance(other, VectorValuedForm):
            return NotImplemented
        return self.frame == other.frame and self.components == other.components


def wedge(a, b):
    """Wedge product accepting Form or Polyform operands."""
    return a.wedge(b)


def exp_trunc(a, max_degree):
    """Truncated exponential sum(a^n / n!) up to ``max_degree``.

    ``a`` must have components of even positive degree only, so the result is
    independent of ordering and exact.
    """
    if isinstance(a, Form):
        a = Polyform.from_forms(a.frame, [a]) if not a.is_zero else Polyform(a.frame, {})
    for deg in a.degrees:
        if deg % 2 or deg == 0:
            raise ValueError("exp_trunc requires even positive degrees")
    result = Polyform.one(a.frame)
    power = Polyform.one(a.frame)
    n = 0
    while True:
        n += 1
        power = power.wedge(a)
        power = Polyform(a.frame, {d: f for d, f in power.components.items() if d <= max_degree})
        if power.is_zero:
            break
        power = power * Fraction(1, n)
        result = result + power
    return Polyform(a.frame, {d: f for d, f in result.components.items() if d <= max_degree})


def fiber_integrate(a, fiber, orientation=None, result_frame=None, index_map=None):
    """Integrate a constant-coefficient form along torus fiber coordinates.

    Parameters
    ----------
    a : Form or Polyform
    fiber : iterable of int
        Frame indices of the fiber coordinates.
    orientation : tuple of int, optional
        Fiber coordinates in positive fiber orientation order (defaults to
        ascending index order).
    result_frame, index_map : optional
        When given, surviving indices are pushed through ``index_map`` into
        ``result_frame``; otherwise the result stays on the original frame.
    """
    if isinstance(a, Polyform):
        parts = [fiber_integrate(f, fiber, orientation, result_frame, index_map)
                 for f in a.components.values()]
        frame = result_frame if result_frame is not None else a.frame
        return Polyform.from_forms(frame, parts) if parts else Polyform(frame, {})

    fiber = tuple(sorted(fiber))
    fset = set(fiber)
    if orientation is None:
        orientation = fiber
    if tuple(sorted(orientation)) != fiber:
        raise ValueError("fiber orientation must list exactly the fiber coordinates")
    if a.degree < len(fiber):
        frame = result_frame if result_frame is not None else a.frame
        return Form.zero(frame, 0)
    covol = a.frame.covolume(fiber)
    terms = {}
    for idx, c in a.terms.items():
        if not fset.issubset(idx):
            continue
        rest = tuple(i for i in idx if i not in fset)
        pos = {v: k for k, v in enumerate(idx)}
        word = [pos[v] for v in rest + tuple(orientation)]
        sign = perm_sign(word)
        terms[rest] = terms.get(rest, ZERO) + sign * c * covol
    out = Form(a.frame, a.degree - len(fiber), terms)
    if result_frame is not None:
        out = out.map_indices(index_map, result_frame)
    return out


def contract_vector_slots(structure, vvforms):
    """Evaluate a k-form on the vector slots of k vector-valued forms.

    Returns ``sum structure(e_{a_1},..,e_{a_k}) * w_1^{a_1} ^ .. ^ w_k^{a_k}``
    where ``w_m^{a}`` is the a-th component form of the m-th argument.  This
    is the scalar-form-valued evaluation used by the coupling tensors.
    """
    k = structure.degree
    if len(vvforms) != k:
        raise ValueError("expected %d vector-valued forms" % k)
    frame = vvforms[0].frame
    out_degree = sum(v.degree for v in vvforms)
    out = Form.zero(frame, out_degree)
    for idx, c in structure.terms.items():
        for perm in itertools.permutations(range(k)):
            sign = perm_sign(perm)
            piece = None
            for m, p in enumerate(perm):
                comp = vvforms[m].components[idx[p]]
                if comp.is_zero:
                    piece = None
                    break
                piece = comp if piece is None else piece.wedge(comp)
                if piece.is_zero:
                    piece = None
                    break
            if piece is not None:
                out = out + piece * (sign * c)
    return out


def form_to_dict(form):
    """JSON-ready dict: rational coefficients as decimal-free strings."""
    terms = []
    for idx in sorted(form.terms):
        c = form.terms[idx]
        terms.append({"idx": list(idx), "coeff": str(Fraction(c) if not isinstance(c, Fraction) else c)})
    return {"frame": form.frame.name, "degree": form.degree, "terms": terms}


def form_from_dict(data, frame):
    if data.get("frame") not in ("", None, frame.name):
        raise ValueError("form was serialized on frame %r, expected %r" % (data.get("frame"), frame.name))
    degree = int(data["degree"])
    terms = {}
    for t in data.get("terms", []):
        idx = tuple(int(i) for i in t["idx"])
        terms[idx] = terms.get(idx, ZERO) + Fraction(t["coeff"])
    return Form(frame, degree, terms)
