"""Exact dense linear algebra modulo an odd prime, on numpy int64 arrays.

All matrices are kept reduced mod p.  Row reduction uses inverse pivots
(Fermat), so everything here is exact; there is no floating point anywhere.
"""

import numpy as np

from .errors import SingularMatrixError


def mat(rows, p):
    """Build a reduced int64 matrix from nested lists (or an array)."""
    return np.asarray(rows, dtype=np.int64) % p


def eye(n):
    return np.eye(n, dtype=np.int64)


def zeros(shape):
    return np.zeros(shape, dtype=np.int64)


def mat_mul(a, b, p):
    return (a @ b) % p


def mat_vec(a, v, p):
    return (a @ v) % p


def mat_pow(a, e, p):
    n = a.shape[0]
    result = eye(n)
    base = a % p
    while e > 0:
        if e & 1:
            result = (result @ base) % p
        base = (base @ base) % p
        e >>= 1
    return result


def rref(a, p):
    """Reduced row echelon form.  Returns (R, pivot_columns)."""
    r = a.copy() % p
    rows, cols = r.shape
    pivots = []
    i = 0
    for j in range(cols):
        if i >= rows:
            break
        k = i
        while k < rows and r[k, j] == 0:
            k += 1
        if k == rows:
            continue
        if k != i:
            r[[i, k]] = r[[k, i]]
        inv = pow(int(r[i, j]), -1, p)
        r[i] = (r[i] * inv) % p
        for k in range(rows):
            if k != i and r[k, j] != 0:
                r[k] = (r[k] - r[k, j] * r[i]) % p
        pivots.append(j)
        i += 1
    return r, pivots


def rank(a, p):
    if a.size == 0:
        return 0
    _, pivots = rref(a, p)
    return len(pivots)


def det(a, p):
    """Determinant mod p by Gaussian elimination."""
    m = a.copy() % p
    n = m.shape[0]
    if n == 0:
        return 1
    result = 1
    for j in range(n):
        k = j
        while k < n and m[k, j] == 0:
            k += 1
        if k == n:
            return 0
        if k != j:
            m[[j, k]] = m[[k, j]]
            result = (-result) % p
        result = (result * int(m[j, j])) % p
        inv = pow(int(m[j, j]), -1, p)
        for k in range(j + 1, n):
            if m[k, j] != 0:
                m[k] = (m[k] - m[k, j] * inv * m[j]) % p
    return result


def inverse(a, p):
    n = a.shape[0]
    aug = np.hstack([a % p, eye(n)])
    r, pivots = rref(aug, p)
    if pivots[:n] != list(range(n)):
        raise SingularMatrixError("matrix is singular mod %d" % p)
    return r[:, n:]


def kernel(a, p):
    """Basis of the right null space, as columns of an (n x k) matrix."""
    rows, cols = a.shape
    r, pivots = rref(a, p)
    free = [j for j in range(cols) if j not in pivots]
    basis = zeros((cols, len(free)))
    for idx, j in enumerate(free):
        basis[j, idx] = 1
        for i, pj in enumerate(pivots):
            basis[pj, idx] = (-r[i, j]) % p
    return basis


def solve(a, b, p):
    """One solution x of a.x = b, or raise if inconsistent.

    b may be a vector or a matrix of stacked right-hand sides.
    """
    vec = b.ndim == 1
    rhs = b.reshape(-1, 1) if vec else b
    rows, cols = a.shape
    aug = np.hstack([a % p, rhs % p])
    r, pivots = rref(aug, p)
    if any(j >= cols for j in pivots):
        raise SingularMatrixError("inconsistent linear system")
    x = zeros((cols, rhs.shape[1]))
    for i, j in enumerate(pivots):
        x[j] = r[i, cols:]
    return x[:, 0] if vec else x


def column_span_contains(basis, v, p):
    """Whether v lies in the span of the columns of basis."""
    if basis.shape[1] == 0:
        return not v.any()
    return rank(np.hstack([basis, v.reshape(-1, 1)]), p) == rank(basis, p)


def column_space(a, p):
    """Independent subset of columns spanning the column space."""
    _, pivots = rref(a, p)
    return a[:, pivots]


def poly_at_matrix(coeffs, m, p):
    """Evaluate a polynomial (ascending coefficients) at a square matrix."""
    n = m.shape[0]
    result = zeros((n, n))
    for c in reversed(coeffs):
        result = (result @ m) % p
        result += int(c) * eye(n)
    return result % p
