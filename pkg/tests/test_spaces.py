import numpy as np
import pytest

from isoclass import modmat as mm
from isoclass import spaces as sp
from isoclass.errors import (
    DegenerateFormError,
    DimensionMismatchError,
    NotSymmetricError,
    SingularMatrixError,
)


def sym(p, gram):
    return sp.BilinearSpace(p, sp.SYMMETRIC, gram)


def skew(p, gram):
    return sp.BilinearSpace(p, sp.SKEW, gram)


class TestConstruction:
    def test_rejects_degenerate(self):
        with pytest.raises(DegenerateFormError):
            sym(7, [[1, 0], [0, 0]])

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetricError):
            sym(7, [[1, 2], [3, 1]])

    def test_rejects_odd_skew(self):
        with pytest.raises(NotSymmetricError):
            skew(5, [[1]])

    def test_json_roundtrip(self):
        s = sym(7, [[1, 0], [0, 3]])
        t = sp.BilinearSpace.from_json(s.to_json())
        assert s.same_space(t)
        assert s.to_json()["schema"] == "isoclass/1"


class TestCheckIsometry:
    def test_identity(self):
        s = sym(7, np.eye(2, dtype=int))
        assert sp.check_isometry(np.eye(2, dtype=int), s)

    def test_rotation(self):
        s = sym(7, np.eye(2, dtype=int))
        assert sp.check_isometry([[0, -1], [1, 0]], s)

    def test_shear_fails(self):
        s = sym(7, np.eye(2, dtype=int))
        assert not sp.check_isometry([[1, 1], [0, 1]], s)

    def test_dimension_mismatch(self):
        s = sym(7, np.eye(2, dtype=int))
        with pytest.raises(DimensionMismatchError):
            sp.check_isometry(np.eye(3, dtype=int), s)


class TestFormInvariant:
    def test_identity_gram(self):
        assert sp.form_invariant(sym(7, np.eye(2, dtype=int))) == sp.FormInvariant(
            2, sp.SYMMETRIC, "square"
        )

    def test_nonsquare_disc(self):
        # squares mod 7 are {1, 2, 4}; det = 3 is not one
        assert sp.form_invariant(sym(7, [[1, 0], [0, 3]])).disc == "nonsquare"

    def test_skew(self):
        inv = sp.form_invariant(skew(5, [[0, 1], [-1, 0]]))
        assert inv == sp.FormInvariant(2, sp.SKEW, None)

    def test_complete_on_small_instances(self):
        # same (rank, disc) over the same field <=> congruent gram matrices:
        # brute-force the change of basis for n = 2, p = 3
        p = 3
        grams = []
        for a in range(p):
            for b in range(p):
                for d in range(p):
                    g = np.array([[a, b], [b, d]], dtype=np.int64)
                    if mm.det(g, p) != 0:
                        grams.append(g)
        all_ms = [
            np.array([[x, y], [z, w]], dtype=np.int64)
            for x in range(p)
            for y in range(p)
            for z in range(p)
            for w in range(p)
            if (x * w - y * z) % p != 0
        ]
        for g1 in grams[:6]:
            for g2 in grams[:6]:
                s1, s2 = sym(p, g1), sym(p, g2)
                same_inv = sp.form_invariant(s1) == sp.form_invariant(s2)
                congruent = any(
                    np.array_equal((m.T @ g1 @ m) % p, g2 % p) for m in all_ms
                )
                assert same_inv == congruent


class TestDiagonalize:
    def test_identity(self):
        s = sym(7, np.eye(2, dtype=int))
        p_mat = sp.diagonalize(s)
        assert np.array_equal(p_mat, np.eye(2, dtype=int))

    @pytest.mark.parametrize("p", [3, 7])
    def test_hyperbolic(self, p):
        s = sym(p, [[0, 1], [1, 0]])
        pm = sp.diagonalize(s)
        res = (pm.T @ s.gram @ pm) % p
        assert np.array_equal(res, np.diag(np.diagonal(res)))
        assert mm.det(pm, p) != 0

    def test_rejects_skew(self):
        with pytest.raises(NotSymmetricError):
            sp.diagonalize(skew(5, [[0, 1], [-1, 0]]))


class TestStandardSpace:
    def test_m1(self):
        assert np.array_equal(sp.standard_space(1, sp.SYMMETRIC, 7).gram, [[0, 1], [1, 0]])
        assert np.array_equal(
            sp.standard_space(1, sp.SKEW, 7).gram, [[0, 1], [6, 0]]
        )

    def test_m2_det(self):
        s = sp.standard_space(2, sp.SYMMETRIC, 5)
        assert mm.det(s.gram, 5) == 1

    def test_embed_identity(self):
        iso = sp.standard_embed(np.eye(2, dtype=int), sp.SYMMETRIC, 5)
        assert np.array_equal(iso.matrix, np.eye(4, dtype=int))

    def test_embed_scalar(self):
        iso = sp.standard_embed([[2]], sp.SYMMETRIC, 5)
        # dual block first: inverse-transpose 3, then primal block 2
        assert np.array_equal(iso.matrix, [[3, 0], [0, 2]])

    def test_embed_multiplicative(self):
        rng = np.random.default_rng(5)
        for kind in (sp.SYMMETRIC, sp.SKEW):
            for _ in range(20):
                a = rng.integers(0, 7, (2, 2))
                b = rng.integers(0, 7, (2, 2))
                if mm.det(mm.mat(a, 7), 7) == 0 or mm.det(mm.mat(b, 7), 7) == 0:
                    continue
                ab = sp.standard_embed((a @ b) % 7, kind, 7)
                prod = sp.standard_embed(a, kind, 7) * sp.standard_embed(b, kind, 7)
                assert np.array_equal(ab.matrix, prod.matrix)

    def test_embed_singular_rejected(self):
        with pytest.raises(SingularMatrixError):
            sp.standard_embed([[0]], sp.SYMMETRIC, 5)


class TestRadical:
    def test_full_space_nondegenerate(self):
        s = sym(7, np.eye(3, dtype=int))
        assert sp.radical(np.eye(3, dtype=int), s).shape[1] == 0

    def test_isotropic_line(self):
        s = sym(3, [[1, 0], [0, 2]])  # diag(1, -1) mod 3
        rad = sp.radical(np.array([[1], [1]]), s)
        assert rad.shape[1] == 1

    def test_anisotropic_line(self):
        s = sym(7, np.eye(2, dtype=int))
        assert sp.radical(np.array([[1], [0]]), s).shape[1] == 0


class TestRandomIsometry:
    def test_deterministic(self):
        s = sym(5, np.eye(3, dtype=int))
        a = sp.random_isometry(s, 42)
        b = sp.random_isometry(s, 42)
        assert np.array_equal(a.matrix, b.matrix)

    @pytest.mark.parametrize("kind,gram", [
        (sp.SYMMETRIC, np.eye(4, dtype=int)),
        (sp.SKEW, [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]),
    ])
    def test_always_isometry(self, kind, gram):
        for p in (3, 5, 7):
            s = sp.BilinearSpace(p, kind, gram)
            for seed in range(30):
                iso = sp.random_isometry(s, seed)
                g = iso.matrix
                assert np.array_equal((g.T @ s.gram @ g) % p, s.gram)
