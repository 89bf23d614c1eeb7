"""Exact linear algebra over the rationals.

Matrices are lists of lists of :class:`fractions.Fraction`.  Everything here
is small and dense (dimensions up to ~70), so plain Gaussian elimination is
both fast enough and exactly reproducible.
"""

from __future__ import annotations

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x):
    """Coerce ints/strings to Fraction, pass floats through unchanged."""
    if isinstance(x, (Fraction, float)):
        return x
    return Fraction(x)


def zeros(rows, cols):
    return [[ZERO] * cols for _ in range(rows)]


def identity(n):
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = ONE
    return m


def transpose(m):
    return [list(col) for col in zip(*m)]


def matmul(a, b):
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(m, v):
    return [sum(x * y for x, y in zip(row, v)) for row in m]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, c):
    return [[c * x for x in row] for row in a]


def commutator(a, b):
    return mat_add(matmul(a, b), mat_scale(matmul(b, a), Fraction(-1)))


def rref(m):
    """Reduced row echelon form.  Returns (rref_matrix, pivot_columns)."""
    m = [list(map(frac, row)) for row in m]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(m):
    if not m:
        return 0
    return len(rref(m)[1])


def nullspace(m):
    """Basis of the right kernel of ``m`` (list of column vectors)."""
    if not m:
        return []
    red, pivots = rref(m)
    cols = len(m[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * cols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(a, b):
    """Solve a*x = b exactly.  Returns None when the system is inconsistent."""
    rows = len(a)
    cols = len(a[0])
    aug = [list(map(frac, a[i])) + [frac(b[i])] for i in range(rows)]
    red, pivots = rref(aug)
    if cols in pivots:
        return None
    x = [ZERO] * cols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][-1]
    return x


def inverse(m):
    n = len(m)
    aug = [list(map(frac, m[i])) + identity(n)[i] for i in range(n)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in red]


def column_space_basis(m):
    """Linearly independent subset of the columns of ``m``."""
    _, pivots = rref(m)
    cols = transpose(m)
    return [cols[p] for p in pivots]


def projector_onto_columns(basis_cols):
    """Orthogonal projector onto span(columns), exact for rational input.

    The ambient inner product is the standard one, which matches the
    orthonormal monomial basis used by the exterior algebra.
    """
    if not basis_cols:
        return None
    b = transpose(basis_cols)          # stack columns into a matrix
    bt = basis_cols
    gram = matmul(bt, b)
    return matmul(matmul(b, inverse(gram)), bt)


def in_span(vectors, v):
    """Exact membership test of v in span(vectors)."""
    if not vectors:
        return all(x == 0 for x in v)
    m = transpose(vectors)
    return solve(m, v) is not None
