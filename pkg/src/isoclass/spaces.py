"""Non-degenerate symmetric and skew bilinear spaces over F_p, and their
isometries: membership checking, form invariants, diagonalization, standard
hyperbolic spaces with the general-linear embedding, radicals of restricted
forms, and seeded random isometry generation (reflections / transvections).
"""

import random
from dataclasses import dataclass

import numpy as np

from . import modmat as mm
from .errors import (
    DegenerateFormError,
    DimensionMismatchError,
    NotSymmetricError,
    SingularMatrixError,
)
from .polyfield import check_odd_prime

SYMMETRIC = "symmetric"
SKEW = "skew"

SCHEMA = "isoclass/1"


def is_square(a, p):
    """Euler's criterion; 0 counts as a square."""
    a %= p
    if a == 0:
        return True
    return pow(a, (p - 1) // 2, p) == 1


def disc_class(a, p):
    return "square" if is_square(a, p) else "nonsquare"


def smallest_nonsquare(p):
    for a in range(2, p):
        if not is_square(a, p):
            return a
    raise ValueError("no non-square found; p must be an odd prime")


class BilinearSpace:
    """A non-degenerate bilinear space: (p, kind, Gram matrix).

    Degeneracy and the symmetry constraint are rejected at construction.
    Instances are immutable; share them freely.
    """

    def __init__(self, p, kind, gram):
        check_odd_prime(p)
        if kind not in (SYMMETRIC, SKEW):
            raise ValueError("kind must be 'symmetric' or 'skew'")
        gram = mm.mat(gram, p)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise DimensionMismatchError("gram matrix must be square")
        n = gram.shape[0]
        if kind == SYMMETRIC:
            if not np.array_equal(gram, gram.T % p):
                raise NotSymmetricError("gram matrix is not symmetric")
        else:
            if not np.array_equal(gram, (-gram.T) % p):
                raise NotSymmetricError("gram matrix is not skew-symmetric")
            if np.any(gram.diagonal() != 0):
                raise NotSymmetricError("skew gram matrix must have zero diagonal")
            if n % 2 != 0:
                raise DegenerateFormError("skew forms require even dimension")
        if n == 0 or mm.det(gram, p) == 0:
            raise DegenerateFormError("gram matrix is singular")
        self.p = p
        self.kind = kind
        self.gram = gram
        self.gram.setflags(write=False)
        self.n = n

    def bilin(self, u, v):
        return int(u @ self.gram @ v) % self.p

    def same_space(self, other):
        return (
            self.p == other.p
            and self.kind == other.kind
            and np.array_equal(self.gram, other.gram)
        )

    def to_json(self):
        return {
            "schema": SCHEMA,
            "p": self.p,
            "kind": self.kind,
            "gram": self.gram.tolist(),
        }

    @classmethod
    def from_json(cls, data):
        return cls(data["p"], data["kind"], data["gram"])

    def __repr__(self):
        return "BilinearSpace(p=%d, kind=%r, n=%d)" % (self.p, self.kind, self.n)


class Isometry:
    """A matrix satisfying M^T G M = G for the Gram matrix G of its space."""

    def __init__(self, space, matrix):
        matrix = mm.mat(matrix, space.p)
        if not check_isometry(matrix, space):
            raise DimensionMismatchError("matrix does not preserve the form")
        self.space = space
        self.matrix = matrix
        self.matrix.setflags(write=False)

    def inverse(self):
        return Isometry(self.space, mm.inverse(self.matrix, self.space.p))

    def __mul__(self, other):
        if not self.space.same_space(other.space):
            raise DimensionMismatchError("isometries of different spaces")
        return Isometry(self.space, mm.mat_mul(self.matrix, other.matrix, self.space.p))

    def to_json(self):
        data = self.space.to_json()
        data["matrix"] = self.matrix.tolist()
        return data

    @classmethod
    def from_json(cls, data):
        return cls(BilinearSpace.from_json(data), data["matrix"])

    def __repr__(self):
        return "Isometry(p=%d, n=%d)" % (self.space.p, self.space.n)


def check_isometry(m, space):
    """True iff M^T . gram . M = gram."""
    m = np.asarray(m, dtype=np.int64)
    if m.ndim != 2 or m.shape != (space.n, space.n):
        raise DimensionMismatchError("matrix shape does not match the space")
    m = m % space.p
    return np.array_equal((m.T @ space.gram @ m) % space.p, space.gram)


@dataclass(frozen=True)
class FormInvariant:
    rank: int
    kind: str
    disc: str | None  # 'square' | 'nonsquare' | None for skew


def form_invariant(space):
    """Rank plus (symmetric case) the square class of the discriminant."""
    d = mm.det(space.gram, space.p)
    if d == 0:
        raise DegenerateFormError("space is degenerate")
    if space.kind == SKEW:
        return FormInvariant(space.n, SKEW, None)
    return FormInvariant(space.n, SYMMETRIC, disc_class(d, space.p))


def diagonalize(space):
    """Invertible P with P^T . gram . P diagonal (symmetric spaces only)."""
    if space.kind != SYMMETRIC:
        raise NotSymmetricError("diagonalization requires a symmetric space")
    p = space.p
    g = space.gram.copy()
    n = space.n
    basis = mm.eye(n)

    def b(u, v):
        return int(u @ g @ v) % p

    cols = [basis[:, j].copy() for j in range(n)]
    out = []
    remaining = cols
    while remaining:
        pivot = None
        for v in remaining:
            if b(v, v) != 0:
                pivot = v
                break
        if pivot is None:
            # char != 2: some pair has b(u,v) != 0, and u+v is non-isotropic
            found = False
            for i in range(len(remaining)):
                for j in range(i + 1, len(remaining)):
                    if b(remaining[i], remaining[j]) != 0:
                        pivot = (remaining[i] + remaining[j]) % p
                        found = True
                        break
                if found:
                    break
            if pivot is None:
                raise DegenerateFormError("restriction became degenerate")
        out.append(pivot)
        pv = b(pivot, pivot)
        inv = pow(pv, -1, p)
        new_remaining = []
        for v in remaining:
            w = (v - (b(v, pivot) * inv) * pivot) % p
            if w.any():
                new_remaining.append(w)
        # keep an independent subset
        if new_remaining:
            m = np.column_stack(new_remaining)
            m = mm.column_space(m, p)
            new_remaining = [m[:, j].copy() for j in range(m.shape[1])]
        remaining = new_remaining
    result = np.column_stack(out) % p
    check = (result.T @ space.gram @ result) % p
    if not np.array_equal(check, np.diag(np.diagonal(check))):
        raise DegenerateFormError("diagonalization failed")
    return result


def standard_space(m, kind, p):
    """Hyperbolic space on dual-pair coordinates, gram [[0, I],[eps*I, 0]]."""
    if m < 1:
        raise ValueError("m must be >= 1")
    eps = 1 if kind == SYMMETRIC else -1
    gram = mm.zeros((2 * m, 2 * m))
    for i in range(m):
        gram[i, m + i] = 1
        gram[m + i, i] = eps % p
    return BilinearSpace(p, kind, gram)


def standard_embed(a, kind, p):
    """Embed an invertible m x m matrix as an isometry of the standard space.

    The matrix acts as A on the second (primal) block of coordinates and as
    (A^-1)^T on the first (dual) block; the embedding is a group homomorphism.
    """
    a = mm.mat(a, p)
    m = a.shape[0]
    try:
        a_inv_t = mm.inverse(a, p).T % p
    except SingularMatrixError:
        raise SingularMatrixError("only invertible matrices embed as isometries")
    space = standard_space(m, kind, p)
    big = mm.zeros((2 * m, 2 * m))
    big[:m, :m] = a_inv_t
    big[m:, m:] = a
    return Isometry(space, big)


def radical(vectors, space):
    """Basis of the radical of the form restricted to span(vectors).

    vectors: n x r matrix whose columns span the subspace.  Returns an
    n x s matrix of radical basis columns (s = 0 for a non-degenerate
    restriction).
    """
    w = mm.mat(vectors, space.p)
    if w.ndim == 1:
        w = w.reshape(-1, 1)
    if w.shape[1] == 0:
        return w
    restricted = (w.T @ space.gram @ w) % space.p
    ker = mm.kernel(restricted, space.p)
    return (w @ ker) % space.p


def reflection(space, v):
    """x -> x - 2 B(x,v)/B(v,v) v, for non-isotropic v (symmetric spaces)."""
    p = space.p
    q = space.bilin(v, v)
    if q == 0:
        raise ValueError("reflection requires a non-isotropic vector")
    coeff = (2 * pow(q, -1, p)) % p
    m = (mm.eye(space.n) - coeff * np.outer(v, space.gram @ v % p)) % p
    return m


def transvection(space, v, lam):
    """x -> x + lam B(x,v) v (skew spaces)."""
    p = space.p
    m = (mm.eye(space.n) + lam * np.outer(v, space.gram @ v % p)) % p
    return m


def isometry_generators(space):
    """Reflections (symmetric) or transvections (skew), one per direction.

    These generate the full isometry group in odd characteristic.
    """
    p, n = space.p, space.n
    gens = []
    seen = set()
    for flat in range(1, p ** n):
        v = np.array([(flat // p ** i) % p for i in range(n)], dtype=np.int64)
        lead = next(int(c) for c in v if c != 0)
        if lead != 1:
            continue  # one representative per projective direction
        key = v.tobytes()
        if key in seen:
            continue
        seen.add(key)
        if space.kind == SYMMETRIC:
            if space.bilin(v, v) != 0:
                gens.append(reflection(space, v))
        else:
            gens.append(transvection(space, v, 1))
    return gens


def random_isometry(space, seed):
    """Deterministic random isometry: a short product of reflections or
    symplectic transvections drawn from the given seed."""
    rng = random.Random(seed)
    p, n = space.p, space.n
    result = mm.eye(n)
    count = rng.randrange(0, 2 * n + 1)
    made = 0
    attempts = 0
    while made < count and attempts < 200 * (count + 1):
        attempts += 1
        v = np.array([rng.randrange(p) for _ in range(n)], dtype=np.int64)
        if not v.any():
            continue
        if space.kind == SYMMETRIC:
            if space.bilin(v, v) == 0:
                continue
            g = reflection(space, v)
        else:
            lam = rng.randrange(1, p)
            g = transvection(space, v, lam)
        result = (result @ g) % p
        made += 1
    return Isometry(space, result)
