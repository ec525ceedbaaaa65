import random

import pytest

from isoclass import polyfield as pf
from isoclass.errors import (
    ExcludedRootError,
    NonMonicError,
    ReducibleError,
    ZeroPolynomialError,
)


def poly(*coeffs):
    return pf.trim(coeffs)


class TestDualPoly:
    def test_linear_root_inversion_f7(self):
        # x - 2 over F_7: root 2, inverse root 4, so dual is x - 4
        f = poly(-2 % 7, 1)
        assert pf.dual_poly(f, 7) == poly(-4 % 7, 1)

    def test_palindrome_fixed(self):
        f = poly(1, 0, 1)  # x^2 + 1
        assert pf.dual_poly(f, 7) == f

    def test_quadratic_f5(self):
        # x^2 + x + 2 over F_5 -> x^2 + 3x + 3 by the coefficient rule
        f = poly(2, 1, 1)
        assert pf.dual_poly(f, 5) == poly(3, 3, 1)

    def test_quadratic_f5_root_inversion_oracle(self):
        # independent check: in F_5[t]/(f), the inverse of the root t
        # must be a root of the computed dual
        f = poly(2, 1, 1)
        d = pf.dual_poly(f, 5)
        t_inv = pf.invmod(pf.X, f, 5)
        value = pf.ZERO
        for c in reversed(d):
            value = pf.add(pf.mulmod(value, t_inv, f, 5), pf.constant(c, 5), 5)
        assert value == pf.ZERO

    def test_involution_random(self):
        rng = random.Random(7)
        for p in (3, 5, 7):
            for _ in range(50):
                deg = rng.randrange(1, 7)
                f = pf.trim([rng.randrange(1, p)] + [rng.randrange(p) for _ in range(deg - 1)] + [1])
                if pf.degree(f) != deg:
                    continue
                assert pf.dual_poly(pf.dual_poly(f, p), p) == f

    def test_errors(self):
        with pytest.raises(NonMonicError):
            pf.dual_poly(poly(1, 2), 7)
        with pytest.raises(pf.ZeroConstantTermError):
            pf.dual_poly(poly(0, 1), 7)


class TestSelfDual:
    def test_palindrome_true(self):
        assert pf.is_self_dual(poly(1, 0, 1), 7)

    def test_linear_false(self):
        assert not pf.is_self_dual(poly(-2 % 7, 1), 7)

    def test_excluded_root(self):
        with pytest.raises(ExcludedRootError):
            pf.is_self_dual(poly(1, 1), 5)

    def test_self_dual_implies_even_degree_and_palindrome(self):
        for p in (3, 5):
            for m in (2, 4):
                for f in pf._self_dual_candidates(m, p):
                    if pf.evaluate(f, 1, p) == 0 or pf.evaluate(f, p - 1, p) == 0:
                        continue
                    assert pf.is_self_dual(f, p)
                    n = pf.degree(f)
                    assert n % 2 == 0
                    assert all(f[k] == f[n - k] for k in range(n + 1))


class TestFactor:
    def test_split_quadratic_f5(self):
        # x^2 + 1 = (x - 2)(x - 3) over F_5; roots found by exhaustive search
        unit, factors = pf.factor(poly(1, 0, 1), 5)
        assert unit == 1
        assert [(f, e) for f, e in factors] == [
            (poly(-3 % 5, 1), 1),
            (poly(-2 % 5, 1), 1),
        ]
        roots = [a for a in range(5) if pf.evaluate(poly(1, 0, 1), a, 5) == 0]
        assert sorted(roots) == [2, 3]

    def test_irreducible_f7(self):
        unit, factors = pf.factor(poly(1, 0, 1), 7)
        assert factors == [(poly(1, 0, 1), 1)]
        assert all(pf.evaluate(poly(1, 0, 1), a, 7) != 0 for a in range(7))

    def test_repeated_factor(self):
        f = pf.mul(poly(-1 % 3, 1), poly(-1 % 3, 1), 3)
        unit, factors = pf.factor(f, 3)
        assert factors == [(poly(-1 % 3, 1), 2)]

    def test_zero_rejected(self):
        with pytest.raises(ZeroPolynomialError):
            pf.factor(pf.ZERO, 5)

    def test_reconstruction_and_irreducibility_random(self):
        rng = random.Random(11)
        for p in (3, 5, 7):
            for _ in range(40):
                deg = rng.randrange(1, 8)
                f = pf.trim([rng.randrange(p) for _ in range(deg)] + [rng.randrange(1, p)])
                unit, factors = pf.factor(f, p)
                prod = pf.constant(unit, p)
                for q, e in factors:
                    prod = pf.mul(prod, pf.poly_pow(q, e, p), p)
                assert prod == f
                for q, _ in factors:
                    assert pf.is_irreducible(q, p)
                    if pf.degree(q) <= 3:
                        # low degrees: no roots unless linear
                        roots = [a for a in range(p) if pf.evaluate(q, a, p) == 0]
                        assert (pf.degree(q) == 1) == bool(roots)

    def test_deterministic(self):
        f = poly(2, 3, 0, 1, 4, 1)
        assert pf.factor(f, 5) == pf.factor(f, 5)


class TestClassify:
    def test_self_dual(self):
        fc = pf.classify_factor(poly(1, 0, 1), 7)
        assert fc.tag == "self_dual" and fc.partner is None

    def test_plus_minus(self):
        assert pf.classify_factor(pf.x_minus_one(7), 7).tag == "plus_one"
        assert pf.classify_factor(pf.x_plus_one(7), 7).tag == "minus_one"

    def test_pair(self):
        fc = pf.classify_factor(poly(-2 % 7, 1), 7)
        assert fc.tag in ("pair_low", "pair_high")
        assert fc.partner == poly(-4 % 7, 1)
        fc2 = pf.classify_factor(poly(-4 % 7, 1), 7)
        assert {fc.tag, fc2.tag} == {"pair_low", "pair_high"}

    def test_pair_partner_consistency(self):
        # low/high assignment is consistent across a dual pair
        for p in (5, 7):
            for a in range(2, p - 1):
                q = poly(-a % p, 1)
                fc = pf.classify_factor(q, p)
                if fc.tag.startswith("pair"):
                    back = pf.classify_factor(fc.partner, p)
                    assert {fc.tag, back.tag} == {"pair_low", "pair_high"}
                    assert back.partner == q

    def test_reducible_rejected(self):
        with pytest.raises(ReducibleError):
            pf.classify_factor(poly(1, 0, 1), 5)


class TestSquarefree:
    def test_examples(self):
        sq = pf.mul(poly(-1 % 3, 1), poly(-1 % 3, 1), 3)
        assert pf.squarefree_part(sq, 3) == poly(-1 % 3, 1)
        assert pf.squarefree_part(poly(1, 0, 1), 7) == poly(1, 0, 1)
        f = pf.mul(pf.mul(poly(-1 % 7, 1), poly(-1 % 7, 1), 7), poly(1, 0, 1), 7)
        assert pf.squarefree_part(f, 7) == pf.mul(poly(-1 % 7, 1), poly(1, 0, 1), 7)

    def test_divides_and_squarefree(self):
        rng = random.Random(3)
        for p in (3, 5):
            for _ in range(30):
                deg = rng.randrange(1, 6)
                f = pf.trim([rng.randrange(p) for _ in range(deg)] + [1])
                if not f:
                    continue
                s = pf.squarefree_part(f, p)
                assert pf.mod(f, s, p) == pf.ZERO
                assert pf.gcd(s, pf.deriv(s, p), p) == pf.ONE

    def test_pth_power(self):
        # (x - 1)^3 over F_3 has zero derivative; p-th root path
        f = pf.poly_pow(poly(-1 % 3, 1), 3, 3)
        assert pf.squarefree_part(f, 3) == poly(-1 % 3, 1)


class TestCounts:
    def test_irreducible_counts(self):
        assert pf.count_irreducible(1, 5) == 5
        assert pf.count_irreducible(2, 3) == 3
        assert pf.count_irreducible(2, 5) == 10

    def test_self_dual_counts(self):
        assert pf.self_dual_irreducible_count(2, 3) == 1  # x^2 + 1 only
        assert pf.self_dual_irreducible_count(2, 5) == 2
        assert pf.self_dual_irreducible_count(2, 7) == 3
        assert pf.self_dual_irreducible_count(3, 7) == 0

    def test_pair_counts(self):
        assert pf.dual_pair_count(1, 3) == 0
        assert pf.dual_pair_count(1, 5) == 1  # {x-2, x-3}
        assert pf.dual_pair_count(1, 7) == 2

    def test_pair_count_matches_enumeration(self):
        for p in (3, 5, 7):
            pairs = set()
            for a in range(p):
                q = poly(a, 1)
                if a == 0:
                    continue
                fc = pf.classify_factor(q, p)
                if fc.tag.startswith("pair"):
                    pairs.add(frozenset([q, fc.partner]))
            assert len(pairs) == pf.dual_pair_count(1, p)
