"""Module structure of a space under an isometry T.

Computes minimal polynomials, elementary divisors, the orthogonal primary
decomposition (one component per self-dual prime, per x -+ 1, and one per
dual pair of primes, the latter with totally isotropic halves), and the
orthogonal refinement of each component into blocks that are free over
F[x]/(q(x)^d_i), together with explicit free-module generators.

The peeling strategy for the refinement: a pair of vectors (u, v) generates
a non-degenerate free piece at the top power exactly when the pairing matrix
[B(T^i u, T^j v)] is invertible, so pivots can be found with plain F_p
determinants and split off by taking B-orthogonal complements.
"""

from dataclasses import dataclass, field

import numpy as np

from . import modmat as mm
from . import polyfield as pf
from .errors import NotFreeError, NotPrimaryError


def annihilator_of_vector(m, v, p):
    """Least-degree monic f with f(M) v = 0."""
    n = m.shape[0]
    if not (v % p).any():
        return pf.ONE
    cols = [v % p]
    current = v % p
    basis = v.reshape(-1, 1) % p
    for _ in range(n):
        current = (m @ current) % p
        if mm.column_span_contains(basis, current, p):
            coeffs = mm.solve(basis, current, p)
            # current = sum coeffs_i M^i v, so annihilator is x^k - sum c_i x^i
            k = basis.shape[1]
            poly = [(-int(c)) % p for c in coeffs] + [1]
            return pf.trim(poly)
        cols.append(current)
        basis = np.column_stack(cols)
    raise AssertionError("annihilator of degree <= n must exist")


def minimal_polynomial(t, p=None):
    """Monic minimal polynomial, via per-basis-vector annihilators."""
    m, p = _matrix_and_p(t, p)
    n = m.shape[0]
    result = pf.ONE
    for i in range(n):
        if pf.degree(result) == n:
            break
        v = mm.zeros(n)
        v[i] = 1
        ann = annihilator_of_vector(m, v, p)
        g = pf.gcd(result, ann, p)
        result = pf.mul(result, pf.divmod_poly(ann, g, p)[0], p)
    return result


def _matrix_and_p(t, p):
    if hasattr(t, "matrix"):
        return t.matrix, t.space.p
    if p is None:
        raise ValueError("p required when passing a bare matrix")
    return np.asarray(t, dtype=np.int64) % p, p


def elementary_divisors(t, p=None):
    """Multiset of elementary divisors as [(prime, power d, multiplicity k)].

    Sorted by (poly_key(prime), d).  Sum of deg(prime)*d*k equals n.
    """
    m, p = _matrix_and_p(t, p)
    n = m.shape[0]
    minpoly = minimal_polynomial(m, p)
    _, factors = pf.factor(minpoly, p)
    out = []
    for q, dmax in factors:
        degq = pf.degree(q)
        qt = mm.poly_at_matrix(q, m, p)
        dims = [0]
        power = mm.eye(n)
        for j in range(1, dmax + 2):
            power = (power @ qt) % p
            dims.append(n - mm.rank(power, p))
        for j in range(1, dmax + 1):
            jumps_j = dims[j] - dims[j - 1]
            jumps_next = dims[j + 1] - dims[j]
            k = (jumps_j - jumps_next) // degq
            if k > 0:
                out.append((q, j, k))
    out.sort(key=lambda item: (pf.poly_key(item[0]), item[1]))
    total = sum(pf.degree(q) * d * k for q, d, k in out)
    if total != n:
        raise AssertionError("elementary divisor dimensions do not sum to n")
    return out


@dataclass
class PrimaryComponent:
    """A T-invariant, non-degenerate orthogonal summand for one prime (or pair).

    For pair components, prime is the lexicographically smaller of the dual
    pair, partner the other; basis lists the prime-half columns first.
    """

    tag: str  # 'self_dual' | 'plus_one' | 'minus_one' | 'pair'
    prime: tuple
    partner: tuple | None
    d: int
    basis: np.ndarray  # n x dim columns
    half_dim: int | None = None  # pair case: dimension of each isotropic half

    @property
    def dim(self):
        return self.basis.shape[1]


def base_polynomial(component, p):
    """q(x) or q(x) q*(x): the polynomial whose d-th power annihilates."""
    if component.tag == "pair":
        return pf.mul(component.prime, component.partner, p)
    return component.prime


def primary_decomposition(t, p=None):
    """Orthogonal T-invariant components, one per prime or dual pair."""
    m, p = _matrix_and_p(t, p)
    minpoly = minimal_polynomial(m, p)
    _, factors = pf.factor(minpoly, p)
    by_poly = dict(factors)
    components = []
    consumed = set()
    for q, d in factors:
        if q in consumed:
            continue
        fc = pf.classify_factor(q, p)
        if fc.tag in ("plus_one", "minus_one", "self_dual"):
            qt_d = mm.poly_at_matrix(pf.poly_pow(q, d, p), m, p)
            basis = mm.kernel(qt_d, p)
            components.append(PrimaryComponent(fc.tag, q, None, d, basis))
            consumed.add(q)
        else:
            partner = fc.partner
            if partner not in by_poly or by_poly[partner] != d:
                raise NotPrimaryError("dual factor missing or exponent mismatch")
            low, high = (q, partner) if fc.tag == "pair_low" else (partner, q)
            k_low = mm.kernel(mm.poly_at_matrix(pf.poly_pow(low, d, p), m, p), p)
            k_high = mm.kernel(mm.poly_at_matrix(pf.poly_pow(high, d, p), m, p), p)
            if k_low.shape[1] != k_high.shape[1]:
                raise NotPrimaryError("dual pair halves have different dimensions")
            basis = np.hstack([k_low, k_high])
            components.append(
                PrimaryComponent("pair", low, high, d, basis, half_dim=k_low.shape[1])
            )
            consumed.add(q)
            consumed.add(partner)
    components.sort(key=_component_sort_key)
    return components


_TAG_ORDER = {"plus_one": 0, "minus_one": 1, "self_dual": 2, "pair": 3}


def _component_sort_key(c):
    return (_TAG_ORDER[c.tag], pf.poly_key(c.prime), c.d)


@dataclass
class ElementaryDivisorBlock:
    """A free block over F[x]/(q^d_i) (or the pair algebra) inside a component.

    generators: k_i columns that freely generate the block; basis: the full
    F_p-basis obtained from the generators under powers of T.
    """

    tag: str
    prime: tuple
    partner: tuple | None
    d_i: int
    k_i: int
    generators: np.ndarray  # n x k_i
    basis: np.ndarray  # n x dim

    @property
    def dim(self):
        return self.basis.shape[1]


def _pairing_matrix(m, gram, p, u, v, size):
    """[B(M^i u, M^j v)] for 0 <= i, j < size."""
    us = [u % p]
    vs = [v % p]
    for _ in range(size - 1):
        us.append((m @ us[-1]) % p)
        vs.append((m @ vs[-1]) % p)
    umat = np.column_stack(us)
    vmat = np.column_stack(vs)
    return (umat.T @ gram @ vmat) % p


def _krylov_columns(m, p, vectors, size):
    cols = []
    for v in vectors:
        current = v % p
        cols.append(current)
        for _ in range(size - 1):
            current = (m @ current) % p
            cols.append(current)
    return np.column_stack(cols)


def ed_orthogonal_split(component, t, space):
    """Split a primary component orthogonally by elementary divisor power.

    Returns blocks sorted by increasing d_i; their dimensions are
    deg(base) * d_i * k_i and their direct sum recovers the component.
    """
    p = space.p
    m = t.matrix if hasattr(t, "matrix") else np.asarray(t, dtype=np.int64) % p
    base = base_polynomial(component, p)
    degbase = pf.degree(base)
    work = component.basis
    peels = []  # (d_cur, [generator vectors])
    guard = 0
    while work.shape[1] > 0:
        guard += 1
        if guard > 4 * space.n + 8:
            raise NotFreeError("orthogonal split did not terminate")
        d_cur = _max_power(m, p, base, work, component.d)
        size = degbase * d_cur
        gens = _find_pivot(component, m, space.gram, p, work, base, d_cur, size)
        peeled = _krylov_columns(m, p, gens, size)
        if mm.rank(peeled, p) != peeled.shape[1]:
            raise NotFreeError("peeled generators are not independent")
        peels.append((d_cur, gens))
        # orthogonal complement of the peeled span inside the current subspace
        pairing = (peeled.T @ space.gram @ work) % p
        ker = mm.kernel(pairing, p)
        new_work = (work @ ker) % p
        if new_work.shape[1] != work.shape[1] - peeled.shape[1]:
            raise NotFreeError("peeled block is degenerate")
        work = new_work
    merged = {}
    for d_cur, gens in peels:
        merged.setdefault(d_cur, []).extend(gens)
    blocks = []
    for d_i in sorted(merged):
        gens = np.column_stack(merged[d_i])
        basis = _krylov_columns(m, p, merged[d_i], degbase * d_i)
        blocks.append(
            ElementaryDivisorBlock(
                component.tag,
                component.prime,
                component.partner,
                d_i,
                gens.shape[1],
                gens,
                basis,
            )
        )
    return blocks


def _max_power(m, p, base, work, d_hint):
    basemat = mm.poly_at_matrix(base, m, p)
    power = work % p
    for j in range(1, d_hint + 1):
        power = (basemat @ power) % p
        if not power.any():
            return j
    raise NotPrimaryError("component not annihilated by its prime power")


def _find_pivot(component, m, gram, p, work, base, d_cur, size):
    """Generators of one non-degenerate free piece at the top power d_cur.

    A pairing [B(T^i u, T^j v)] of full rank certifies that u and v generate
    free rank-one submodules and that the piece split off is non-degenerate.
    """
    if component.tag == "pair":
        return _find_pivot_pair(component, m, gram, p, work, d_cur, size)
    cols = [work[:, j] for j in range(work.shape[1])]
    # unit diagonal pivot
    for u in cols:
        if mm.det(_pairing_matrix(m, gram, p, u, u, size), p) != 0:
            return [u]
    # unit off-diagonal pivot; try to repair to a diagonal one
    degprime = pf.degree(component.prime)
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            u, v = cols[i], cols[j]
            if mm.det(_pairing_matrix(m, gram, p, u, v, size), p) == 0:
                continue
            for e in range(degprime):
                w = (u + mm.mat_pow(m, e, p) @ v) % p
                if mm.det(_pairing_matrix(m, gram, p, w, w, size), p) != 0:
                    return [w]
            # alternating case: keep the hyperbolic pair
            return [u, v]
    raise NotFreeError("no unit pivot found in a non-degenerate component")


def _find_pivot_pair(component, m, gram, p, work, d_cur, size):
    # candidates from each isotropic half; cross pairings carry the units
    low_d = mm.poly_at_matrix(pf.poly_pow(component.prime, d_cur, p), m, p)
    high_d = mm.poly_at_matrix(pf.poly_pow(component.partner, d_cur, p), m, p)
    low_part = (work @ mm.kernel((low_d @ work) % p, p)) % p
    high_part = (work @ mm.kernel((high_d @ work) % p, p)) % p
    for i in range(low_part.shape[1]):
        for j in range(high_part.shape[1]):
            u = low_part[:, i]
            v = high_part[:, j]
            g = (u + v) % p
            if mm.det(_pairing_matrix(m, gram, p, g, g, size), p) != 0:
                return [g]
    raise NotFreeError("no unit pivot found in a pair component")


def free_module_basis(block, t, space):
    """Validated free-module generators of a block: k vectors whose Krylov
    orbits form an F_p-basis of the block."""
    p = space.p
    m = t.matrix if hasattr(t, "matrix") else np.asarray(t, dtype=np.int64) % p
    base = base_polynomial(block, p)
    size = pf.degree(base) * block.d_i
    gens = [block.generators[:, j] for j in range(block.generators.shape[1])]
    krylov = _krylov_columns(m, p, gens, size)
    if mm.rank(krylov, p) != size * len(gens) or krylov.shape[1] != block.dim:
        raise NotFreeError("block generators do not form a free basis")
    return block.generators


def decomposition_report(t, space):
    """JSON-ready summary of the primary decomposition and its blocks."""
    p = space.p
    comps = primary_decomposition(t, p)
    out = []
    for comp in comps:
        blocks = ed_orthogonal_split(comp, t, space)
        out.append(
            {
                "prime": pf.poly_to_json(comp.prime),
                "class": comp.tag if comp.tag != "pair" else "pair",
                "d": comp.d,
                "blocks": [
                    {"d_i": b.d_i, "k_i": b.k_i, "dim": int(b.dim)} for b in blocks
                ],
            }
        )
    return out
