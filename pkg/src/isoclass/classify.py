"""End-to-end classification of isometries: conjugacy and z-class
invariants, decision procedures with witnesses, reality, Jordan
decomposition, centralizer descriptions, and brute-force oracles over
exhaustively enumerated groups.

The negative unipotent part is handled through negation: data for the
(x+1)-primary component of T are computed from -T restricted to it and
recorded under the minus tag, so plus/minus blocks always carry
comparable unipotent-type data.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import decomp as dc
from . import hermitian as hm
from . import modmat as mm
from . import polyfield as pf
from . import spaces as sp
from .errors import (
    NotConjugateError,
    SpaceMismatchError,
    TooLargeError,
    WitnessUnavailableError,
)

SCHEMA = "isoclass/1"

_TAG_ORDER = {"plus_one": 0, "minus_one": 1, "self_dual": 2, "pair": 3}

ORACLE_ORDER_BOUND = 10 ** 6


def json_canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class BlockData:
    """One elementary-divisor block with its induced hermitian form."""

    tag: str
    prime: tuple
    partner: tuple | None
    d: int
    k: int
    herm: hm.HermitianSpace
    generators: np.ndarray
    basis: np.ndarray
    matrix: np.ndarray  # the matrix whose module structure the block uses

    @property
    def herm_class(self):
        return hm.residue_class(self.herm)


def isometry_blocks(t):
    """All elementary-divisor blocks of an isometry, with induced forms.

    Minus-type components are computed from the negated matrix, so their
    algebras are the unipotent ones and their data line up with plus blocks.
    """
    s = t.space
    p = s.p
    out = []
    for comp in dc.primary_decomposition(t):
        if comp.tag == "minus_one":
            mat = (-t.matrix) % p
            virt = dc.PrimaryComponent(
                "plus_one", pf.x_minus_one(p), None, comp.d, comp.basis
            )
            blocks = dc.ed_orthogonal_split(virt, mat, s)
            for b in blocks:
                alg = hm.algebra(p, pf.x_minus_one(p), b.d_i)
                form = hm.induced_hermitian(mat, s, alg, b.generators)
                out.append(
                    BlockData(
                        "minus_one", pf.x_plus_one(p), None, b.d_i, b.k_i,
                        form, b.generators, b.basis, mat,
                    )
                )
        else:
            blocks = dc.ed_orthogonal_split(comp, t.matrix, s)
            for b in blocks:
                alg = hm.algebra(p, comp.prime, b.d_i, comp.partner)
                form = hm.induced_hermitian(t.matrix, s, alg, b.generators)
                out.append(
                    BlockData(
                        comp.tag, comp.prime, comp.partner, b.d_i, b.k_i,
                        form, b.generators, b.basis, t.matrix,
                    )
                )
    out.sort(key=lambda b: (_TAG_ORDER[b.tag], pf.poly_key(b.prime), b.d))
    return out


@dataclass(frozen=True)
class ConjugacyInvariant:
    p: int
    n: int
    kind: str
    blocks: tuple  # ((tag, prime, d, k, herm_tag, herm_disc), ...)

    def to_json(self):
        return {
            "schema": SCHEMA,
            "mode": "conjugacy",
            "p": self.p,
            "n": self.n,
            "kind": self.kind,
            "blocks": [
                {
                    "class": tag,
                    "prime": list(prime),
                    "d": d,
                    "k": k,
                    "herm": {"tag": htag, "disc": hdisc},
                }
                for tag, prime, d, k, htag, hdisc in self.blocks
            ],
        }


def conjugacy_invariant(t):
    """The complete conjugacy datum: elementary divisors plus the residue
    classes of the induced hermitian forms, in canonical block order."""
    entries = []
    for b in isometry_blocks(t):
        cls = b.herm_class
        entries.append((b.tag, b.prime, b.d, b.k, cls.tag, cls.disc))
    return ConjugacyInvariant(t.space.p, t.space.n, t.space.kind, tuple(entries))


@dataclass(frozen=True)
class ZClassInvariant:
    p: int
    n: int
    kind: str
    blocks: tuple  # ((tag, m, d, k, herm_tag, herm_disc), ...) swap-minimal

    def to_json(self):
        return {
            "schema": SCHEMA,
            "mode": "zclass",
            "p": self.p,
            "n": self.n,
            "kind": self.kind,
            "blocks": [
                {
                    "class": tag,
                    "m": m,
                    "d": d,
                    "k": k,
                    "herm": {"tag": htag, "disc": hdisc},
                }
                for tag, m, d, k, htag, hdisc in self.blocks
            ],
        }


_SWAP = {"plus_one": "minus_one", "minus_one": "plus_one"}


def _swap_blocks(blocks):
    swapped = [(_SWAP.get(tag, tag),) + rest for tag, *rest in blocks]
    return tuple(sorted(swapped, key=_zblock_key))


def _zblock_key(entry):
    tag, m, d, k, htag, hdisc = entry
    return (_TAG_ORDER[tag], m, d, k, htag, hdisc or "")


def zclass_invariant(t):
    """The z-class datum: primes forgotten to their degrees, hermitian
    classes coarsened for unit rescaling, and the plus/minus tags
    normalized by the negation symmetry."""
    entries = []
    for b in isometry_blocks(t):
        cls = hm.coarse_class(b.herm_class, b.d)
        entries.append((b.tag, pf.degree(b.prime), b.d, b.k, cls.tag, cls.disc))
    blocks = tuple(sorted(entries, key=_zblock_key))
    blocks = min(blocks, _swap_blocks(blocks))
    return ZClassInvariant(t.space.p, t.space.n, t.space.kind, blocks)


def _require_same_space(s, t):
    if not s.space.same_space(t.space):
        raise SpaceMismatchError("isometries live on different spaces")


def are_conjugate(s, t):
    _require_same_space(s, t)
    return conjugacy_invariant(s) == conjugacy_invariant(t)


def same_zclass(s, t):
    _require_same_space(s, t)
    return zclass_invariant(s) == zclass_invariant(t)


def is_real(t):
    """Whether t is conjugate to its inverse in the isometry group."""
    return are_conjugate(t, t.inverse())


# ---------------------------------------------------------------------------
# witnesses


def _poly_at_vector(coeffs, mat, vec, p):
    out = mm.zeros(mat.shape[0])
    current = vec % p
    for c in coeffs:
        if c:
            out = (out + int(c) * current) % p
        current = (mat @ current) % p
    return out


def conjugating_witness(s, t):
    """C with C s C^-1 = t and C an isometry, built blockwise by
    transporting canonical bases of the induced forms."""
    _require_same_space(s, t)
    if not are_conjugate(s, t):
        raise NotConjugateError("isometries are not conjugate")
    blocks_s = isometry_blocks(s)
    blocks_t = isometry_blocks(t)
    n = s.space.n
    p = s.space.p
    src_cols = []
    img_cols = []
    try:
        for bs, bt in zip(blocks_s, blocks_t):
            if (bs.tag, bs.prime, bs.d, bs.k) != (bt.tag, bt.prime, bt.d, bt.k):
                raise WitnessUnavailableError("block structures fail to align")
            alg = bs.herm.algebra
            move = hm.transport(bs.herm, bt.herm)
            size = alg.dim
            images = []
            for j in range(bs.k):
                img = mm.zeros(n)
                for i in range(bt.k):
                    img = (
                        img
                        + _poly_at_vector(move[i][j], bt.matrix, bt.generators[:, i], p)
                    ) % p
                images.append(img)
            for j in range(bs.k):
                src = bs.generators[:, j]
                img = images[j]
                for _ in range(size):
                    src_cols.append(src)
                    img_cols.append(img)
                    src = (bs.matrix @ src) % p
                    img = (bt.matrix @ img) % p
        x = np.column_stack(src_cols) % p
        y = np.column_stack(img_cols) % p
        c = (y @ mm.inverse(x, p)) % p
        cs = (c @ s.matrix) % p
        tc = (t.matrix @ c) % p
        if np.array_equal(cs, tc) and sp.check_isometry(c, s.space):
            return sp.Isometry(s.space, c)
        raise WitnessUnavailableError("constructed map failed verification")
    except (WitnessUnavailableError, hm.SearchExhaustedError) as exc:
        witness = _witness_by_search(s, t)
        if witness is not None:
            return witness
        raise WitnessUnavailableError(str(exc))


def _witness_by_search(s, t):
    try:
        table = enumerate_group(s.space)
    except TooLargeError:
        return None
    for g in table.elements:
        if np.array_equal((g @ s.matrix) % s.space.p, (t.matrix @ g) % s.space.p):
            return sp.Isometry(s.space, g)
    return None


# ---------------------------------------------------------------------------
# Jordan decomposition


@dataclass(frozen=True)
class JordanDecomposition:
    semisimple: sp.Isometry
    unipotent: sp.Isometry
    semisimple_poly: tuple
    unipotent_poly: tuple


def jordan_decompose(t):
    """t = t_s t_u with t_s semisimple, t_u unipotent, both polynomials in t.

    Newton refinement of the identity polynomial against the squarefree part
    of the minimal polynomial; certificates are the refining polynomials.
    """
    p = t.space.p
    m_t = dc.minimal_polynomial(t)
    f = pf.squarefree_part(m_t, p)
    s_poly = pf.mod(pf.X, m_t, p)
    for _ in range(max(1, pf.degree(m_t)).bit_length() + 3):
        fs = _poly_compose_mod(f, s_poly, m_t, p)
        if fs == pf.ZERO:
            break
        fprime = _poly_compose_mod(pf.deriv(f, p), s_poly, m_t, p)
        correction = pf.mulmod(fs, pf.invmod(fprime, m_t, p), m_t, p)
        s_poly = pf.mod(pf.sub(s_poly, correction, p), m_t, p)
    if _poly_compose_mod(f, s_poly, m_t, p) != pf.ZERO:
        raise AssertionError("jordan refinement did not converge")
    u_poly = pf.mulmod(pf.X, pf.invmod(s_poly, m_t, p), m_t, p)
    t_s = mm.poly_at_matrix(s_poly, t.matrix, p)
    t_u = mm.poly_at_matrix(u_poly, t.matrix, p)
    return JordanDecomposition(
        sp.Isometry(t.space, t_s), sp.Isometry(t.space, t_u), s_poly, u_poly
    )


def _poly_compose_mod(f, g, modulus, p):
    result = pf.ZERO
    for c in reversed(f):
        result = pf.mulmod(result, g, modulus, p)
        result = pf.add(result, pf.constant(c, p), p)
    return result


# ---------------------------------------------------------------------------
# centralizer description


_FACTOR_TYPE = {
    "herm": "unitary",
    "sym": "orthogonal",
    "alt": "symplectic",
    "pair": "general_linear",
}


@dataclass(frozen=True)
class CentralizerDescription:
    factors: tuple

    def to_json(self):
        return {
            "schema": SCHEMA,
            "factors": [dict(f) for f in self.factors],
        }


def centralizer_description(t):
    """One unitary-type factor per elementary-divisor block."""
    factors = []
    for b in isometry_blocks(t):
        cls = b.herm_class
        factors.append(
            (
                ("type", _FACTOR_TYPE[cls.tag]),
                ("rank", b.k),
                ("prime", tuple(b.prime)),
                ("d", b.d),
                ("disc", cls.disc),
            )
        )
    return CentralizerDescription(tuple(factors))


# ---------------------------------------------------------------------------
# brute-force oracles


@dataclass
class GroupTable:
    space: sp.BilinearSpace
    elements: list  # matrices in BFS discovery order
    index: dict  # bytes -> position
    generators: list

    def __len__(self):
        return len(self.elements)

    def position(self, m):
        return self.index[(np.asarray(m, dtype=np.int64) % self.space.p).tobytes()]

    def stacked(self):
        return np.stack(self.elements)


def group_order(space):
    """Exact order of the isometry group, from the classical formulas."""
    p, n = space.p, space.n
    if space.kind == sp.SKEW:
        m = n // 2
        order = p ** (m * m)
        for i in range(1, m + 1):
            order *= p ** (2 * i) - 1
        return order
    if n % 2 == 1:
        m = (n - 1) // 2
        order = 2 * p ** (m * m)
        for i in range(1, m + 1):
            order *= p ** (2 * i) - 1
        return order
    m = n // 2
    d = mm.det(space.gram, p)
    eps = 1 if sp.is_square(((-1) ** m) * d, p) else -1
    order = 2 * p ** (m * (m - 1)) * (p ** m - eps)
    for i in range(1, m):
        order *= p ** (2 * i) - 1
    return order


def enumerate_group(space, order_bound=ORACLE_ORDER_BOUND):
    """Breadth-first closure of the reflection/transvection generators."""
    expected = group_order(space)
    if expected > order_bound:
        raise TooLargeError(
            "group order %d exceeds the enumeration bound %d" % (expected, order_bound)
        )
    p = space.p
    gens = sp.isometry_generators(space)
    ident = mm.eye(space.n)
    elements = [ident]
    index = {ident.tobytes(): 0}
    frontier = [ident]
    while frontier:
        new_frontier = []
        for m in frontier:
            for g in gens:
                prod = (m @ g) % p
                key = prod.tobytes()
                if key not in index:
                    index[key] = len(elements)
                    elements.append(prod)
                    new_frontier.append(prod)
        frontier = new_frontier
    if len(elements) != expected:
        raise AssertionError(
            "enumerated %d elements, expected %d" % (len(elements), expected)
        )
    return GroupTable(space, elements, index, gens)


def bf_conjugate(table, a, b):
    """Exhaustive search for g with g a g^-1 = b."""
    p = table.space.p
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    for g in table.elements:
        if np.array_equal((g @ a) % p, (b @ g) % p):
            return True
    return False


def bf_centralizer(table, a):
    """Indices of all elements commuting with a."""
    p = table.space.p
    a = np.asarray(a, dtype=np.int64) % p
    stacked = table.stacked()
    left = np.einsum("nij,jk->nik", stacked, a) % p
    right = np.einsum("ij,njk->nik", a, stacked) % p
    hits = np.all(left == right, axis=(1, 2))
    return [i for i in range(len(table)) if hits[i]]


def _subgroup_generators(table, indices):
    p = table.space.p
    index_set = set(indices)
    gens = []
    closure = {table.index[mm.eye(table.space.n).tobytes()]}
    for i in indices:
        if i in closure:
            continue
        gens.append(i)
        stack = list(closure)
        closure = set(stack)
        work = list(closure)
        while work:
            j = work.pop()
            for g in gens:
                prod = (table.elements[j] @ table.elements[g]) % p
                pos = table.index[prod.tobytes()]
                if pos not in closure:
                    closure.add(pos)
                    work.append(pos)
    return gens


def bf_same_zclass(table, a, b):
    """Whether the centralizers of a and b are conjugate subgroups."""
    p = table.space.p
    za = bf_centralizer(table, a)
    zb = bf_centralizer(table, b)
    if len(za) != len(zb):
        return False
    zb_set = set(zb)
    zgens = _subgroup_generators(table, za)
    for g in table.elements:
        ginv = mm.inverse(g, p)
        ok = True
        for i in zgens:
            conj = (g @ table.elements[i] @ ginv) % p
            if table.index[conj.tobytes()] not in zb_set:
                ok = False
                break
        if ok:
            return True
    return False


def conjugacy_partition(table):
    """List of conjugacy classes, each a sorted list of element indices."""
    p = table.space.p
    n_el = len(table)
    stacked = table.stacked()
    inverses = np.stack([mm.inverse(g, p) for g in table.elements])
    assigned = np.full(n_el, -1, dtype=np.int64)
    classes = []
    for start in range(n_el):
        if assigned[start] >= 0:
            continue
        a = table.elements[start]
        conj = np.einsum("nij,jk,nkl->nil", stacked, a, inverses) % p
        members = sorted({table.index[conj[i].tobytes()] for i in range(n_el)})
        cls_id = len(classes)
        for i in members:
            assigned[i] = cls_id
        classes.append(members)
    return classes


def zclass_partition(table):
    """Partition of the group into z-classes (centralizer conjugacy)."""
    classes = conjugacy_partition(table)
    reps = [cls[0] for cls in classes]
    cent = {r: bf_centralizer(table, table.elements[r]) for r in reps}
    merged = []
    used = set()
    for i, r in enumerate(reps):
        if i in used:
            continue
        bucket = [i]
        used.add(i)
        for j in range(i + 1, len(reps)):
            if j in used:
                continue
            r2 = reps[j]
            if len(cent[r]) != len(cent[r2]):
                continue
            if bf_same_zclass(table, table.elements[r], table.elements[r2]):
                bucket.append(j)
                used.add(j)
        members = sorted(m for b in bucket for m in classes[b])
        merged.append(members)
    return merged
