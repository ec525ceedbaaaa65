import random

import numpy as np
import pytest

from isoclass import decomp as dc
from isoclass import modmat as mm
from isoclass import polyfield as pf
from isoclass import spaces as sp


def sym(p, gram):
    return sp.BilinearSpace(p, sp.SYMMETRIC, gram)


def skew2(p):
    return sp.BilinearSpace(p, sp.SKEW, [[0, 1], [-1, 0]])


ROT = [[0, -1], [1, 0]]


def unipotent3(p, a=1):
    """Regular unipotent preserving the antidiagonal form of rank 3."""
    b = (-pow(2, -1, p) * a * a) % p
    return np.array([[1, a, b], [0, 1, -a % p], [0, 0, 1]], dtype=np.int64) % p


def antidiag3(p):
    return sym(p, [[0, 0, 1], [0, 1, 0], [1, 0, 0]])


class TestMinimalPolynomial:
    def test_identity(self):
        assert dc.minimal_polynomial(np.eye(3, dtype=int), 7) == pf.trim((-1 % 7, 1))

    def test_rotation(self):
        assert dc.minimal_polynomial(np.array(ROT), 7) == (1, 0, 1)

    def test_transvection(self):
        t = np.array([[1, 1], [0, 1]])
        expected = pf.mul((-1 % 3, 1), (-1 % 3, 1), 3)
        assert dc.minimal_polynomial(t, 3) == expected

    def test_divides_characteristic_random(self):
        rng = random.Random(1)
        for p in (3, 5, 7):
            for _ in range(25):
                n = rng.randrange(1, 5)
                s = sym(p, np.eye(n, dtype=int))
                iso = sp.random_isometry(s, rng.randrange(10**6))
                mp = dc.minimal_polynomial(iso)
                assert mp[-1] == 1
                assert not mm.poly_at_matrix(mp, iso.matrix, p).any()


class TestElementaryDivisors:
    def test_identity(self):
        eds = dc.elementary_divisors(np.eye(3, dtype=int), 7)
        assert eds == [((-1 % 7, 1), 1, 3)]

    def test_rotation(self):
        assert dc.elementary_divisors(np.array(ROT), 7) == [((1, 0, 1), 1, 1)]

    def test_transvection(self):
        eds = dc.elementary_divisors(np.array([[1, 1], [0, 1]]), 3)
        assert eds == [((2, 1), 2, 1)]

    def test_dimension_sum_random(self):
        rng = random.Random(2)
        for p in (3, 5):
            for n, kind in ((3, sp.SYMMETRIC), (4, sp.SKEW)):
                if kind == sp.SKEW:
                    gram = mm.zeros((n, n))
                    for i in range(n // 2):
                        gram[i, n // 2 + i] = 1
                        gram[n // 2 + i, i] = p - 1
                    s = sp.BilinearSpace(p, kind, gram)
                else:
                    s = sym(p, np.eye(n, dtype=int))
                for _ in range(15):
                    iso = sp.random_isometry(s, rng.randrange(10**6))
                    eds = dc.elementary_divisors(iso)
                    assert sum(pf.degree(q) * d * k for q, d, k in eds) == n


class TestSelfDualMinimalPolynomial:
    def test_after_removing_unipotent_factors(self):
        rng = random.Random(3)
        for p in (3, 5, 7):
            s = sym(p, np.eye(4, dtype=int))
            for _ in range(40):
                iso = sp.random_isometry(s, rng.randrange(10**6))
                mp = dc.minimal_polynomial(iso)
                _, factors = pf.factor(mp, p)
                stripped = pf.ONE
                for q, e in factors:
                    if q in (pf.x_minus_one(p), pf.x_plus_one(p)):
                        continue
                    stripped = pf.mul(stripped, pf.poly_pow(q, e, p), p)
                if pf.degree(stripped) > 0:
                    assert pf.dual_poly(stripped, p) == stripped


class TestPrimaryDecomposition:
    def test_rotation_self_dual_block(self):
        s = sym(7, np.eye(2, dtype=int))
        t = sp.Isometry(s, ROT)
        comps = dc.primary_decomposition(t)
        assert len(comps) == 1
        assert comps[0].tag == "self_dual"
        assert comps[0].dim == 2

    def test_rotation_pair_block_f5(self):
        s = sym(5, np.eye(2, dtype=int))
        t = sp.Isometry(s, ROT)
        comps = dc.primary_decomposition(t)
        assert len(comps) == 1
        c = comps[0]
        assert c.tag == "pair" and c.half_dim == 1
        # the eigenline of 2 is isotropic: B((2,1),(2,1)) = 5 = 0
        v = np.array([2, 1], dtype=np.int64)
        assert s.bilin(v, v) == 0
        # each half is totally isotropic
        for half in (c.basis[:, :1], c.basis[:, 1:]):
            assert not ((half.T @ s.gram @ half) % 5).any()

    def test_mixed_components_orthogonal(self):
        p = 7
        gram = mm.zeros((5, 5))
        gram[:2, :2] = np.eye(2, dtype=int)
        gram[2:, 2:] = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
        s = sym(p, gram)
        t = mm.zeros((5, 5))
        t[:2, :2] = np.array(ROT) % p
        t[2:, 2:] = unipotent3(p)
        iso = sp.Isometry(s, t)
        comps = dc.primary_decomposition(iso)
        assert len(comps) == 2
        assert sum(c.dim for c in comps) == 5
        b1, b2 = comps[0].basis, comps[1].basis
        assert not ((b1.T @ s.gram @ b2) % p).any()
        for c in comps:
            rad = sp.radical(c.basis, s)
            assert rad.shape[1] == 0

    def test_conjugation_invariance(self):
        rng = random.Random(4)
        p = 5
        s = sym(p, np.eye(4, dtype=int))
        for _ in range(20):
            t = sp.random_isometry(s, rng.randrange(10**6))
            c = sp.random_isometry(s, rng.randrange(10**6))
            conj = sp.Isometry(
                s, (c.matrix @ t.matrix @ mm.inverse(c.matrix, p)) % p
            )
            d1 = [(x.tag, x.prime, x.d, x.dim) for x in dc.primary_decomposition(t)]
            d2 = [(x.tag, x.prime, x.d, x.dim) for x in dc.primary_decomposition(conj)]
            assert d1 == d2
            assert dc.elementary_divisors(t) == dc.elementary_divisors(conj)


class TestOrthogonalSplit:
    def test_single_divisor_whole_component(self):
        s = sym(7, np.eye(2, dtype=int))
        t = sp.Isometry(s, ROT)
        comp = dc.primary_decomposition(t)[0]
        blocks = dc.ed_orthogonal_split(comp, t, s)
        assert len(blocks) == 1
        assert blocks[0].d_i == 1 and blocks[0].k_i == 1 and blocks[0].dim == 2

    def test_unipotent_two_blocks(self):
        # elementary divisors (x-1), (x-1)^3 inside a 4-dim orthogonal space
        p = 3
        gram = mm.zeros((4, 4))
        gram[0, 0] = 1
        gram[1:, 1:] = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
        s = sym(p, gram)
        t = mm.zeros((4, 4))
        t[0, 0] = 1
        t[1:, 1:] = unipotent3(p)
        iso = sp.Isometry(s, t)
        comp = dc.primary_decomposition(iso)[0]
        assert comp.tag == "plus_one" and comp.d == 3
        blocks = dc.ed_orthogonal_split(comp, iso, s)
        assert [(b.d_i, b.k_i, b.dim) for b in blocks] == [(1, 1, 1), (3, 1, 3)]
        # mutually orthogonal
        pairing = (blocks[0].basis.T @ s.gram @ blocks[1].basis) % p
        assert not pairing.any()
        for b in blocks:
            dc.free_module_basis(b, iso, s)

    def test_pair_component_mirrored(self):
        # pair component with elementary divisors q, q^2 in each half
        p = 5
        s = sp.standard_space(3, sp.SYMMETRIC, p)
        a = np.array([[2, 1, 0], [0, 2, 0], [0, 0, 2]], dtype=np.int64)
        iso = sp.standard_embed(a, sp.SYMMETRIC, p)
        comps = dc.primary_decomposition(iso)
        assert len(comps) == 1 and comps[0].tag == "pair"
        blocks = dc.ed_orthogonal_split(comps[0], iso, s.space if hasattr(s, "space") else s)
        assert [(b.d_i, b.k_i) for b in blocks] == [(1, 1), (2, 1)]
        assert [b.dim for b in blocks] == [2, 4]

    def test_block_dimension_formula_random(self):
        rng = random.Random(6)
        for p in (3, 5):
            for gram, kind in (
                (np.eye(4, dtype=int), sp.SYMMETRIC),
                ([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], sp.SKEW),
            ):
                s = sp.BilinearSpace(p, kind, gram)
                for _ in range(15):
                    iso = sp.random_isometry(s, rng.randrange(10**6))
                    eds = dc.elementary_divisors(iso)
                    for comp in dc.primary_decomposition(iso):
                        blocks = dc.ed_orthogonal_split(comp, iso, s)
                        degbase = pf.degree(dc.base_polynomial(comp, p))
                        for b in blocks:
                            assert b.dim == degbase * b.d_i * b.k_i
                        # block divisors match the global elementary divisors
                        for b in blocks:
                            expect = [
                                (q, d, k)
                                for q, d, k in eds
                                if d == b.d_i and q in (comp.prime, comp.partner)
                            ]
                            assert expect and all(k == b.k_i for _, _, k in expect)


class TestFreeModuleBasis:
    def test_rotation_generator(self):
        s = sym(7, np.eye(2, dtype=int))
        t = sp.Isometry(s, ROT)
        block = dc.ed_orthogonal_split(dc.primary_decomposition(t)[0], t, s)[0]
        gens = dc.free_module_basis(block, t, s)
        g = gens[:, 0]
        pair = np.column_stack([g, (t.matrix @ g) % 7])
        assert mm.det(pair, 7) != 0

    def test_identity_block(self):
        s = sym(7, np.eye(3, dtype=int))
        t = sp.Isometry(s, np.eye(3, dtype=int))
        block = dc.ed_orthogonal_split(dc.primary_decomposition(t)[0], t, s)[0]
        assert block.k_i == 3 and block.d_i == 1
        gens = dc.free_module_basis(block, t, s)
        assert mm.rank(gens, 7) == 3
