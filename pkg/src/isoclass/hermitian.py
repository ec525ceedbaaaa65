"""Cyclic algebras F_p[x]/(q(x)^d), their dual-pair analogues, and the
hermitian forms an isometry induces on its free blocks.

An algebra carries the involution t -> t^-1, a deterministically chosen
linear functional h whose multiplication pairing is non-degenerate and which
intertwines the involution up to a sign c, and the machinery to solve
h(e*H(u,v)) = B(e*u, v) for the Gram matrix of the induced form.  Forms are
classified by reduction to the residue field, canonicalized constructively,
and ship with a brute-force congruence-orbit oracle for small algebras.

Algebra elements are coefficient tuples modulo the algebra modulus; matrices
over an algebra are nested tuples.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import modmat as mm
from . import polyfield as pf
from .errors import (
    AlgebraMismatchError,
    NotUnimodularError,
    SearchExhaustedError,
    SingularSystemError,
    TooLargeError,
)
from .spaces import disc_class, is_square, smallest_nonsquare

H_SEARCH_LIMIT = 1 << 20


class CyclicAlgebra:
    """F_p[x]/(q^d) for a single prime q, or F_p[x]/(q^d q*^d) for a dual
    pair; the involution sends t to its inverse (swapping pair components)."""

    def __init__(self, p, prime, d, partner=None):
        self.p = p
        self.prime = prime
        self.partner = partner
        self.d = d
        self.kind = "pair" if partner is not None else "simple"
        base = prime if partner is None else pf.mul(prime, partner, p)
        self.base = base
        self.modulus = pf.poly_pow(base, d, p)
        self.dim = pf.degree(self.modulus)
        self.t_powers = self._powers(pf.X, 2 * self.dim)
        t_inv = pf.invmod(pf.X, self.modulus, p)
        self.bar_pows = self._powers(t_inv, self.dim)
        # columns: coefficients of bar(t^i)
        self.bar_matrix = np.array(
            [[pw[r] if r < len(pw) else 0 for pw in self.bar_pows]
             for r in range(self.dim)],
            dtype=np.int64,
        )
        self._h = None
        self._c = None
        self._pairing_inv = None

    def _powers(self, e, count):
        out = [pf.mod(pf.ONE, self.modulus, self.p)]
        for _ in range(count - 1):
            out.append(pf.mulmod(out[-1], e, self.modulus, self.p))
        return out

    # --- element arithmetic -------------------------------------------------

    def el(self, coeffs):
        return pf.mod(pf.trim(c % self.p for c in coeffs), self.modulus, self.p)

    def from_int(self, a):
        return pf.constant(a, self.p)

    def mul(self, e1, e2):
        return pf.mulmod(e1, e2, self.modulus, self.p)

    def add(self, e1, e2):
        return pf.add(e1, e2, self.p)

    def sub(self, e1, e2):
        return pf.sub(e1, e2, self.p)

    def scale(self, e, a):
        return pf.scale(e, a, self.p)

    def bar(self, e):
        vec = self.coeff_vector(e)
        return pf.trim(int(v) for v in (self.bar_matrix @ vec) % self.p)

    def is_unit(self, e):
        return bool(e) and pf.gcd(e, self.modulus, self.p) == pf.ONE

    def inv(self, e):
        return pf.invmod(e, self.modulus, self.p)

    def coeff_vector(self, e):
        vec = mm.zeros(self.dim)
        for i, c in enumerate(e):
            vec[i] = c
        return vec

    def elements(self):
        """All elements, lexicographic by ascending coefficient tuple."""
        for flat in range(self.p ** self.dim):
            digits = []
            f = flat
            for _ in range(self.dim):
                digits.append(f % self.p)
                f //= self.p
            yield pf.trim(digits)

    def idempotents(self):
        """(e_q, e_q*) for the pair kind."""
        if self.kind != "pair":
            raise AlgebraMismatchError("idempotents exist only for pair algebras")
        f1 = pf.poly_pow(self.prime, self.d, self.p)
        f2 = pf.poly_pow(self.partner, self.d, self.p)
        e1 = pf.mod(pf.crt_idempotent(f1, f2, self.p), self.modulus, self.p)
        return e1, pf.sub(pf.ONE, e1, self.p)

    # --- residue field ------------------------------------------------------

    def residue(self, e):
        return pf.mod(e, self.prime, self.p)

    def residue_bar(self, r):
        """The involution induced on the residue field F_p[x]/(prime)."""
        tinv = pf.invmod(pf.X, self.prime, self.p)
        out = pf.ZERO
        for i, c in enumerate(r):
            term = pf.scale(pf.powmod(tinv, i, self.prime, self.p), c, self.p)
            out = pf.add(out, term, self.p)
        return pf.mod(out, self.prime, self.p)

    def residue_trivial_involution(self):
        return pf.degree(self.prime) == 1

    def key(self):
        return (self.p, self.prime, self.partner, self.d)

    def params(self):
        """Parameters relevant for form comparison across algebras."""
        return (self.p, pf.degree(self.prime), self.d, self.kind)

    # --- the functional h ---------------------------------------------------

    @property
    def h(self):
        if self._h is None:
            self._choose_h()
        return self._h

    @property
    def c(self):
        if self._c is None:
            self._choose_h()
        return self._c

    def _choose_h(self):
        """First functional, in lexicographic coefficient order, whose
        multiplication pairing is invertible and which satisfies
        h(bar(e)) = h(c e); c = +1 is preferred."""
        p, s = self.p, self.dim
        # coefficient matrix of t^(i+j) mod modulus, indexed [r][i*s+j]
        prods = mm.zeros((s, s * s))
        for i in range(s):
            for j in range(s):
                pw = self.t_powers[i + j]
                for r, cv in enumerate(pw):
                    prods[r, i * s + j] = cv
        for c in (1, p - 1):
            constraint = (self.bar_matrix.T - c * mm.eye(s)) % p
            space = mm.kernel(constraint, p)
            r = space.shape[1]
            if r == 0:
                continue
            rows, _ = mm.rref(space.T, p)
            rows = rows[:r]
            if p ** r > H_SEARCH_LIMIT:
                raise SearchExhaustedError("functional search space too large")
            for flat in range(p ** r):
                coeffs = []
                f = flat
                for _ in range(r):
                    coeffs.append(f % p)
                    f //= p
                coeffs.reverse()
                v = mm.zeros(s)
                for a, row in zip(coeffs, rows):
                    v = (v + a * row) % p
                if not v.any():
                    continue
                gram = (v @ prods).reshape(s, s) % p
                if mm.det(gram, p) != 0:
                    self._h = v
                    self._c = 1 if c == 1 else -1
                    self._pairing_inv = mm.inverse(gram, p)
                    return
        raise SearchExhaustedError("no valid functional exists")

    def h_value(self, e):
        return int(self.h @ self.coeff_vector(e)) % self.p

    def pairing_inverse(self):
        if self._pairing_inv is None:
            self._choose_h()
        return self._pairing_inv

    def __repr__(self):
        return "CyclicAlgebra(p=%d, prime=%s, d=%d, kind=%s)" % (
            self.p, list(self.prime), self.d, self.kind)


@lru_cache(maxsize=None)
def _algebra_cached(p, prime, d, partner):
    return CyclicAlgebra(p, prime, d, partner)


def algebra(p, prime, d, partner=None):
    """Shared, cached algebra instance (h and c computed once)."""
    return _algebra_cached(p, prime, d, partner)


def valid_functional(alg, v, c):
    """Check the two defining conditions for a functional candidate."""
    p, s = alg.p, alg.dim
    v = np.asarray(v, dtype=np.int64) % p
    ok_bar = np.array_equal((alg.bar_matrix.T @ v) % p, (c * v) % p)
    gram = mm.zeros((s, s))
    for i in range(s):
        for j in range(s):
            gram[i, j] = int(v @ alg.coeff_vector(alg.t_powers[i + j])) % p
    return ok_bar and mm.det(gram, p) != 0


@dataclass(frozen=True)
class HermClass:
    """Residue classification of a unimodular hermitian form."""

    tag: str  # 'herm' | 'sym' | 'alt' | 'pair'
    rank: int
    disc: str | None = None

    def to_json(self):
        return {"tag": self.tag, "rank": self.rank, "disc": self.disc}


class HermitianSpace:
    """A free module of rank k over a cyclic algebra with its induced Gram."""

    def __init__(self, alg, gram):
        self.algebra = alg
        self.gram = tuple(tuple(e for e in row) for row in gram)
        self.rank = len(self.gram)
        self.sign = self._herm_sign()

    def _herm_sign(self):
        alg = self.algebra
        for sign in (1, -1):
            ok = True
            for i in range(self.rank):
                for j in range(self.rank):
                    expect = alg.scale(alg.bar(self.gram[j][i]), sign % alg.p)
                    if self.gram[i][j] != expect:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return sign
        raise SingularSystemError("gram matrix is not hermitian for either sign")

    def is_unimodular(self):
        d = e_det(self.algebra, self.gram)
        return self.algebra.is_unit(d)

    def to_json(self):
        cls = residue_class(self)
        return {
            "prime": pf.poly_to_json(self.algebra.prime),
            "d": self.algebra.d,
            "c": self.algebra.c,
            "rank": self.rank,
            "class": {"tag": cls.tag, "disc": cls.disc},
        }


def induced_hermitian(t, space, alg, generators, h=None):
    """Gram matrix of the induced form on the free block with the given
    generators: each entry is the unique solution of h(e H) = B(e g_i, g_j).

    A custom functional h (coefficient vector) may be supplied; by default
    the algebra's canonical one is used.
    """
    p = space.p
    m = t.matrix if hasattr(t, "matrix") else np.asarray(t, dtype=np.int64) % p
    s = alg.dim
    if h is None:
        h_vec = alg.h
        pairing_inv = alg.pairing_inverse()
    else:
        h_vec = np.asarray(h, dtype=np.int64) % p
        gram = mm.zeros((s, s))
        for i in range(s):
            for j in range(s):
                gram[i, j] = int(h_vec @ alg.coeff_vector(alg.t_powers[i + j])) % p
        try:
            pairing_inv = mm.inverse(gram, p)
        except Exception:
            raise SingularSystemError("supplied functional has degenerate pairing")
    k = generators.shape[1]
    orbits = []
    for i in range(k):
        vs = [generators[:, i] % p]
        for _ in range(s - 1):
            vs.append((m @ vs[-1]) % p)
        orbits.append(np.column_stack(vs))
    entries = []
    for i in range(k):
        row = []
        for j in range(k):
            rhs = (orbits[i].T @ space.gram @ generators[:, j]) % p
            coeffs = (pairing_inv @ rhs) % p
            row.append(pf.trim(int(c) for c in coeffs))
        entries.append(row)
    return HermitianSpace(alg, entries)


def residue_class(h_space):
    """Classify by reduction modulo the radical of the algebra."""
    alg = h_space.algebra
    k = h_space.rank
    if not h_space.is_unimodular():
        raise NotUnimodularError("hermitian gram matrix is not unimodular")
    if alg.kind == "pair":
        return HermClass("pair", k)
    if not alg.residue_trivial_involution():
        return HermClass("herm", k)
    # residue field is F_p; the residue gram decides symmetric vs alternating
    p = alg.p
    res = mm.zeros((k, k))
    for i in range(k):
        for j in range(k):
            r = alg.residue(h_space.gram[i][j])
            res[i, j] = r[0] if r else 0
    if np.array_equal(res, res.T % p):
        return HermClass("sym", k, disc_class(mm.det(res, p), p))
    if np.array_equal(res, (-res.T) % p):
        return HermClass("alt", k)
    raise SingularSystemError("residue form is neither symmetric nor alternating")


def coarse_class(cls, d):
    """The z-comparison coarsening: the symmetric discriminant survives unit
    scaling exactly when the ambient restriction pins it down, which fails
    only for even d with odd rank."""
    if cls.tag == "sym" and d % 2 == 0 and cls.rank % 2 == 1:
        return HermClass("sym", cls.rank, None)
    return cls


def hermitian_equivalent(h1, h2, allow_automorphism=False):
    """Equivalence of induced forms.

    Identity mode (conjugacy): same algebra, equal residue classes.
    Automorphism mode (z-classes): classes compared after twisting by the
    involution-compatible automorphisms and functional rescalings, which at
    the residue level is the coarse_class comparison.
    """
    a1, a2 = h1.algebra, h2.algebra
    if a1.params() != a2.params():
        raise AlgebraMismatchError("forms live over incompatible algebras")
    c1, c2 = residue_class(h1), residue_class(h2)
    if not allow_automorphism:
        if (a1.prime, a1.partner) != (a2.prime, a2.partner):
            return False
        return c1 == c2
    return coarse_class(c1, a1.d) == coarse_class(c2, a2.d)


@dataclass(frozen=True)
class AlgebraAutomorphism:
    """t -> image, extended multiplicatively; commutes with the involution."""

    image: tuple
    matrix: tuple  # dim x dim, columns are image^i

    def apply(self, alg, e):
        vec = alg.coeff_vector(e)
        m = np.array(self.matrix, dtype=np.int64)
        return pf.trim(int(v) for v in (m @ vec) % alg.p)


def algebra_automorphisms(alg):
    """All algebra automorphisms with bar(f(t)) = f(t)^-1, by enumeration."""
    if alg.kind != "simple":
        raise AlgebraMismatchError("automorphism enumeration is for simple algebras")
    if alg.p ** alg.dim > 1 << 16:
        raise TooLargeError("algebra too large for automorphism enumeration")
    out = []
    p, s = alg.p, alg.dim
    for e in alg.elements():
        if not alg.is_unit(e):
            continue
        powers = [pf.ONE]
        for _ in range(s):
            powers.append(alg.mul(powers[-1], e))
        value = pf.ZERO
        for i, cv in enumerate(alg.modulus):
            value = pf.add(value, alg.scale(powers[i], cv), p)
        if value != pf.ZERO:
            continue
        mat = mm.zeros((s, s))
        for j in range(s):
            for r, cv in enumerate(powers[j]):
                mat[r, j] = cv
        if mm.det(mat, p) == 0:
            continue
        if alg.bar(e) != alg.inv(e):
            continue
        out.append(AlgebraAutomorphism(e, tuple(map(tuple, mat.tolist()))))
    return out


# ---------------------------------------------------------------------------
# matrices over an algebra


def e_identity(alg, k):
    return tuple(
        tuple(pf.ONE if i == j else pf.ZERO for j in range(k)) for i in range(k)
    )


def e_mat_mul(alg, a, b):
    k, mid, k2 = len(a), len(b), len(b[0])
    out = []
    for i in range(k):
        row = []
        for j in range(k2):
            acc = pf.ZERO
            for l in range(mid):
                acc = alg.add(acc, alg.mul(a[i][l], b[l][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def e_mat_bar(alg, a):
    return tuple(tuple(alg.bar(e) for e in row) for row in a)


def e_transpose(a):
    return tuple(tuple(a[j][i] for j in range(len(a))) for i in range(len(a[0])))


def e_transform(alg, gram, p_mat):
    """Gram of the basis with columns of p_mat: P^T . G . bar(P)."""
    return e_mat_mul(alg, e_mat_mul(alg, e_transpose(p_mat), gram), e_mat_bar(alg, p_mat))


def e_det(alg, a):
    k = len(a)
    if k == 0:
        return pf.ONE
    if k == 1:
        return a[0][0]
    total = pf.ZERO
    for j in range(k):
        if not a[0][j]:
            continue
        minor = tuple(
            tuple(a[i][l] for l in range(k) if l != j) for i in range(1, k)
        )
        term = alg.mul(a[0][j], e_det(alg, minor))
        if j % 2:
            term = alg.scale(term, alg.p - 1)
        total = alg.add(total, term)
    return total


def e_mat_inverse(alg, a):
    k = len(a)
    d = e_det(alg, a)
    if not alg.is_unit(d):
        raise NotUnimodularError("matrix over algebra is not invertible")
    dinv = alg.inv(d)
    if k == 1:
        return ((dinv,),)
    cof = []
    for i in range(k):
        row = []
        for j in range(k):
            minor = tuple(
                tuple(a[r][s] for s in range(k) if s != j)
                for r in range(k) if r != i
            )
            term = alg.mul(dinv, e_det(alg, minor))
            if (i + j) % 2:
                term = alg.scale(term, alg.p - 1)
            row.append(term)
        cof.append(tuple(row))
    return e_transpose(tuple(map(tuple, cof)))


# ---------------------------------------------------------------------------
# square roots and norm equations


def sqrt_mod(a, p):
    """One square root of a mod p (Tonelli-Shanks), or None."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = smallest_nonsquare(p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = (t2 * t2) % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, (b * b) % p
        t = (t * c) % p
        r = (r * b) % p
    return r


def solve_norm(alg, target):
    """v with v * bar(v) = target, for a bar-fixed unit target whose residue
    is a norm.  Hensel refinement after a residue-field solve."""
    p = alg.p
    if alg.bar(target) != target or not alg.is_unit(target):
        raise SingularSystemError("norm target must be a bar-fixed unit")
    if alg.kind == "pair":
        e_q, e_qs = alg.idempotents()
        v = alg.add(alg.mul(e_q, target), e_qs)
        if alg.mul(v, alg.bar(v)) != target:
            raise SingularSystemError("pair norm equation failed")
        return v
    res_target = alg.residue(target)
    w0 = None
    if alg.residue_trivial_involution():
        root = sqrt_mod(res_target[0] if res_target else 0, p)
        if root is None:
            raise SingularSystemError("target residue is not a square")
        w0 = pf.constant(root, p)
    else:
        for flat in range(p ** pf.degree(alg.prime)):
            digits = []
            f = flat
            for _ in range(pf.degree(alg.prime)):
                digits.append(f % p)
                f //= p
            w = pf.trim(digits)
            if not w:
                continue
            norm = pf.mulmod(w, alg.residue_bar(w), alg.prime, p)
            if norm == res_target:
                w0 = w
                break
        if w0 is None:
            raise SingularSystemError("target residue is not a norm")
    v = pf.mod(w0, alg.modulus, p)
    inv2 = pow(2, -1, p)
    for _ in range(alg.d.bit_length() + 3):
        value = alg.mul(v, alg.bar(v))
        if value == target:
            return v
        eps = alg.sub(alg.mul(target, alg.inv(value)), pf.ONE)
        eta = alg.scale(eps, inv2)
        v = alg.mul(v, alg.add(pf.ONE, eta))
    raise SingularSystemError("norm refinement did not converge")


def _nonsquare_unit(alg):
    return pf.constant(smallest_nonsquare(alg.p), alg.p)


# ---------------------------------------------------------------------------
# canonical bases and transports


def canonical_gram(alg, cls):
    k = cls.rank
    if cls.tag in ("herm", "pair"):
        return e_identity(alg, k)
    if cls.tag == "sym":
        g = [[pf.ONE if i == j else pf.ZERO for j in range(k)] for i in range(k)]
        if cls.disc == "nonsquare":
            g[k - 1][k - 1] = _nonsquare_unit(alg)
        return tuple(map(tuple, g))
    if cls.tag == "alt":
        g = [[pf.ZERO] * k for _ in range(k)]
        for i in range(0, k, 2):
            g[i][i + 1] = pf.ONE
            g[i + 1][i] = pf.constant(-1, alg.p)
        return tuple(map(tuple, g))
    raise ValueError("unknown class tag %r" % (cls.tag,))


def canonical_basis(h_space):
    """Invertible P over the algebra with transform(G, P) in canonical form."""
    alg = h_space.algebra
    cls = residue_class(h_space)  # also checks unimodularity
    if alg.kind == "pair":
        p_mat = _canonicalize_pair(alg, h_space.gram)
    elif cls.tag == "alt":
        p_mat = _canonicalize_alternating(alg, h_space.gram, h_space.sign)
    else:
        p_mat = _canonicalize_diagonal(alg, h_space.gram, h_space.sign, cls)
    achieved = e_transform(alg, h_space.gram, p_mat)
    if achieved != canonical_gram(alg, cls):
        raise SingularSystemError("canonicalization failed to reach target")
    return p_mat


def _gram_entry(alg, gram, u, v):
    """H(sum u_i b_i, sum v_j b_j) from the Gram of the b basis."""
    acc = pf.ZERO
    for i, ui in enumerate(u):
        if not ui:
            continue
        for j, vj in enumerate(v):
            if not vj:
                continue
            acc = alg.add(acc, alg.mul(alg.mul(ui, alg.bar(vj)), gram[i][j]))
    return acc


def _col(k, i):
    return tuple(pf.ONE if r == i else pf.ZERO for r in range(k))


def _find_unit_diagonal(alg, gram, cols):
    """(vector, index of the column it replaces): the vector has unit
    self-pairing; monomial mixes repair pure cross-pairing units."""
    for i, u in enumerate(cols):
        if alg.is_unit(_gram_entry(alg, gram, u, u)):
            return u, i
    degres = pf.degree(alg.prime)
    for i in range(len(cols)):
        for j in range(len(cols)):
            if i == j:
                continue
            u, v = cols[i], cols[j]
            if not alg.is_unit(_gram_entry(alg, gram, u, v)):
                continue
            for e in range(degres):
                lam = alg.t_powers[e]
                w = tuple(alg.add(a, alg.mul(lam, b)) for a, b in zip(u, v))
                if alg.is_unit(_gram_entry(alg, gram, w, w)):
                    return w, i
    return None, None


def _canonicalize_diagonal(alg, gram, sign, cls):
    """Hermitian Gram-Schmidt with unit diagonal pivots, then entry
    normalization; covers the 'herm' and 'sym' cases."""
    k = len(gram)

    def entry(u, v):
        return _gram_entry(alg, gram, u, v)

    done = []
    remaining = [_col(k, i) for i in range(k)]
    while remaining:
        pivot, drop = _find_unit_diagonal(alg, gram, remaining)
        if pivot is None:
            raise SingularSystemError("no unit pivot in diagonalizable case")
        pv = entry(pivot, pivot)
        pv_inv = alg.inv(pv)
        new_remaining = []
        for idx, c in enumerate(remaining):
            if idx == drop:
                continue
            coeff = alg.mul(entry(c, pivot), pv_inv)
            new_remaining.append(
                tuple(alg.sub(a, alg.mul(coeff, b)) for a, b in zip(c, pivot))
            )
        done.append(pivot)
        remaining = new_remaining
    if len(done) != k:
        raise SingularSystemError("diagonalization lost rank")
    # normalize the diagonal
    normalized = []
    nonsquare = _nonsquare_unit(alg)
    for vec in done:
        u = entry(vec, vec)
        if cls.tag == "herm":
            scale = solve_norm(alg, alg.inv(u))
        else:
            res = alg.residue(u)
            if is_square(res[0] if res else 0, alg.p):
                scale = solve_norm(alg, alg.inv(u))
            else:
                scale = solve_norm(alg, alg.mul(nonsquare, alg.inv(u)))
        normalized.append(tuple(alg.mul(scale, comp) for comp in vec))
    if cls.tag == "sym":
        normalized = _pair_up_nonsquares(alg, gram, normalized, nonsquare)
    # order: all unit-1 entries first
    ones = [v for v in normalized if _gram_entry(alg, gram, v, v) == pf.ONE]
    others = [v for v in normalized if _gram_entry(alg, gram, v, v) != pf.ONE]
    cols = ones + others
    return tuple(zip(*cols))


def _pair_up_nonsquares(alg, gram, vectors, nonsquare):
    """Replace pairs of nonsquare-normalized diagonal entries with unit ones:
    diag(d0, d0) is congruent to diag(1, 1) over the algebra."""
    p = alg.p
    ones = [v for v in vectors if _gram_entry(alg, gram, v, v) == pf.ONE]
    bad = [v for v in vectors if _gram_entry(alg, gram, v, v) != pf.ONE]
    while len(bad) >= 2:
        vi, vj = bad.pop(), bad.pop()
        a0, b0 = _circle_point(alg.p, nonsquare[0])
        x = tuple(
            alg.add(alg.scale(a, a0), alg.scale(b, b0)) for a, b in zip(vi, vj)
        )
        x = _hensel_circle(alg, gram, vi, vj, x)
        # orthogonalize vj against x and renormalize it
        xv = _gram_entry(alg, gram, x, x)
        coeff = alg.mul(_gram_entry(alg, gram, vj, x), alg.inv(xv))
        y = tuple(alg.sub(a, alg.mul(coeff, b)) for a, b in zip(vj, x))
        yv = _gram_entry(alg, gram, y, y)
        res = alg.residue(yv)
        if not is_square(res[0] if res else 0, p):
            raise SingularSystemError("pairing step produced a nonsquare")
        scale = solve_norm(alg, alg.inv(yv))
        y = tuple(alg.mul(scale, comp) for comp in y)
        ones.extend([x, y])
    return ones + bad


def _circle_point(p, delta):
    """(a, b) with delta*(a^2 + b^2) = 1 mod p and a != 0."""
    target = pow(delta, -1, p)
    for a in range(1, p):
        b2 = (target - a * a) % p
        b = sqrt_mod(b2, p)
        if b is not None:
            return a, b
    raise SearchExhaustedError("no circle point found")


def _hensel_circle(alg, gram, vi, vj, x):
    """Refine x (combination of vi, vj) until H(x, x) = 1 exactly."""
    inv2 = pow(2, -1, alg.p)
    for _ in range(alg.d.bit_length() + 3):
        val = _gram_entry(alg, gram, x, x)
        if val == pf.ONE:
            return x
        eps = alg.sub(pf.ONE, val)
        corr = alg.add(pf.ONE, alg.scale(alg.mul(eps, alg.inv(val)), inv2))
        x = tuple(alg.mul(corr, comp) for comp in x)
    raise SingularSystemError("circle refinement did not converge")


def _canonicalize_alternating(alg, gram, sign, basis_cols=None):
    """Hyperbolic reduction for the alternating case (sign = -1, trivial
    residue involution): produce pairs with H(u, v) = 1, H(u,u) = H(v,v) = 0."""
    k = len(gram)
    p = alg.p
    inv2 = pow(2, -1, p)

    def entry(u, v):
        return _gram_entry(alg, gram, u, v)

    remaining = [_col(k, i) for i in range(k)]
    out = []
    while remaining:
        found = None
        for i in range(len(remaining)):
            for j in range(len(remaining)):
                if i != j and alg.is_unit(entry(remaining[i], remaining[j])):
                    found = (i, j)
                    break
            if found:
                break
        if not found:
            raise SingularSystemError("no hyperbolic pivot in alternating case")
        u = remaining[found[0]]
        v = remaining[found[1]]
        rest = [remaining[l] for l in range(len(remaining)) if l not in found]
        # scale v so that H(u, v) = 1
        s = alg.bar(alg.inv(entry(u, v)))
        v = tuple(alg.mul(s, comp) for comp in v)
        # kill H(u, u) with u += nu v, preserving bar-antisymmetry
        for _ in range(alg.d.bit_length() + 3):
            a = entry(u, u)
            if not a:
                break
            nu = alg.scale(a, inv2)
            u = tuple(alg.add(x1, alg.mul(nu, x2)) for x1, x2 in zip(u, v))
        if entry(u, u):
            raise SingularSystemError("failed to isotropize hyperbolic vector")
        s = alg.bar(alg.inv(entry(u, v)))
        v = tuple(alg.mul(s, comp) for comp in v)
        for _ in range(alg.d.bit_length() + 3):
            b = entry(v, v)
            if not b:
                break
            mu = alg.scale(b, inv2)
            v = tuple(alg.add(x1, alg.mul(mu, x2)) for x1, x2 in zip(v, u))
        if entry(v, v) or entry(u, v) != pf.ONE:
            raise SingularSystemError("hyperbolic pair normalization failed")
        new_rest = []
        for w in rest:
            alpha = entry(w, v)
            beta = alg.scale(entry(w, u), alg.p - 1)
            w2 = tuple(
                alg.sub(alg.sub(x, alg.mul(alpha, xu)), alg.mul(beta, xv))
                for x, xu, xv in zip(w, u, v)
            )
            if not any(w2):
                raise SingularSystemError("alternating reduction lost rank")
            new_rest.append(w2)
        out.extend([u, v])
        remaining = new_rest
    if len(out) != k:
        raise SingularSystemError("alternating reduction lost rank")
    return tuple(zip(*out))


def _canonicalize_pair(alg, gram):
    """Pair algebras: the transform P = e_q I + bar-of(e_q G^-1) reaches the
    identity Gram."""
    k = len(gram)
    e_q, e_qs = alg.idempotents()
    ginv = e_mat_inverse(alg, gram)
    p_mat = []
    for i in range(k):
        row = []
        for j in range(k):
            first = e_q if i == j else pf.ZERO
            second = alg.bar(alg.mul(e_q, ginv[i][j]))
            row.append(alg.add(first, second))
        p_mat.append(tuple(row))
    return tuple(p_mat)


def transport(h_from, h_to):
    """M over the common algebra with transform(G_to, M) = G_from, i.e. the
    change of generators realizing the equivalence of the two forms."""
    if h_from.algebra is not h_to.algebra and h_from.algebra.key() != h_to.algebra.key():
        raise AlgebraMismatchError("transport requires the same algebra")
    alg = h_from.algebra
    cls_from = residue_class(h_from)
    cls_to = residue_class(h_to)
    if cls_from != cls_to:
        raise NotUnimodularError("forms are inequivalent; no transport exists")
    p_from = canonical_basis(h_from)
    p_to = canonical_basis(h_to)
    return e_mat_mul(alg, p_to, e_mat_inverse(alg, p_from))


# ---------------------------------------------------------------------------
# brute-force congruence oracle (small algebras)


def _unit_group_generators(alg, units):
    gens = []
    closure = {pf.ONE}
    for u in units:
        if u in closure:
            continue
        gens.append(u)
        frontier = list(closure)
        closure = set()
        stack = [pf.ONE]
        seen = {pf.ONE}
        while stack:
            x = stack.pop()
            closure.add(x)
            for g in gens:
                y = alg.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return gens


def congruence_generators(alg, k):
    """Generators of GL_k over the algebra as congruence moves."""
    units = [e for e in alg.elements() if alg.is_unit(e)]
    ugens = _unit_group_generators(alg, units)
    mats = []
    ident = e_identity(alg, k)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            for e in range(alg.dim):
                lam = alg.t_powers[e]
                m = [list(row) for row in ident]
                m[i][j] = lam
                mats.append(tuple(map(tuple, m)))
    for i in range(k):
        for u in ugens:
            m = [list(row) for row in ident]
            m[i][i] = u
            mats.append(tuple(map(tuple, m)))
    return mats


def bf_hermitian_equivalent(h1, h2):
    """Exhaustive-search equivalence: BFS over the congruence orbit of the
    first Gram under generators of GL_k(E)."""
    if h1.algebra.key() != h2.algebra.key():
        raise AlgebraMismatchError("oracle requires identical algebras")
    alg = h1.algebra
    if alg.p ** alg.dim > 256:
        raise TooLargeError("algebra too large for the congruence oracle")
    gens = congruence_generators(alg, h1.rank)
    start = h1.gram
    target = h2.gram
    seen = {start}
    stack = [start]
    while stack:
        g = stack.pop()
        if g == target:
            return True
        for mv in gens:
            ng = e_transform(alg, g, mv)
            if ng not in seen:
                seen.add(ng)
                stack.append(ng)
    return target in seen


def all_unimodular_grams(alg, k, sign):
    """Every unimodular sign-hermitian k x k Gram over a small algebra."""
    if alg.p ** alg.dim > 256 or k > 2:
        raise TooLargeError("enumeration limited to tiny algebras and k <= 2")
    fixed = [e for e in alg.elements()
             if alg.scale(alg.bar(e), sign % alg.p) == e]
    out = []
    if k == 1:
        for e in fixed:
            if alg.is_unit(e):
                out.append(((e,),))
        return out
    for d0 in fixed:
        for d1 in fixed:
            for off in alg.elements():
                g = ((d0, off), (alg.scale(alg.bar(off), sign % alg.p), d1))
                det = alg.sub(alg.mul(g[0][0], g[1][1]), alg.mul(g[0][1], g[1][0]))
                if alg.is_unit(det):
                    out.append(g)
    return out


def congruence_orbit_partition(alg, k, sign):
    """Partition of all unimodular sign-hermitian Grams into congruence
    orbits, by BFS sweeps; independent of the residue classification."""
    grams = all_unimodular_grams(alg, k, sign)
    gens = congruence_generators(alg, k)
    unassigned = set(grams)
    orbits = []
    while unassigned:
        start = unassigned.pop()
        orbit = {start}
        stack = [start]
        while stack:
            g = stack.pop()
            for mv in gens:
                ng = e_transform(alg, g, mv)
                if ng not in orbit:
                    orbit.add(ng)
                    stack.append(ng)
        unassigned -= orbit
        orbits.append(orbit)
    return orbits


# ---------------------------------------------------------------------------
# discriminant of the underlying F_p form of a hermitian module


def transfer_gram(alg, gram):
    """The F_p Gram matrix of the block: entries h(t^a bar(t^b) H[i][j])."""
    s = alg.dim
    k = len(gram)
    big = mm.zeros((k * s, k * s))
    for i in range(k):
        for j in range(k):
            for a in range(s):
                for b in range(s):
                    e = alg.mul(alg.mul(alg.t_powers[a], alg.bar_pows[b]), gram[i][j])
                    big[i * s + a, j * s + b] = alg.h_value(e)
    return big


def transfer_disc(alg, gram):
    d = mm.det(transfer_gram(alg, gram), alg.p)
    if d == 0:
        raise NotUnimodularError("transfer form is degenerate")
    return disc_class(d, alg.p)
