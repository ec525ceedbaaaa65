"""Univariate polynomial arithmetic over F_p (p an odd prime).

Polynomials are immutable tuples of integers in [0, p), ascending degree,
with a nonzero last entry; () is the zero polynomial.  The module provides
full factorization into monic irreducibles (squarefree split, distinct
degree, then Cantor-Zassenhaus equal-degree splitting with a fixed seed so
output is reproducible), dual polynomials, the self-dual test, and the
classification of irreducible factors into self-dual / (x -+ 1) / dual-pair
types.

The canonical polynomial order used for every tie-break in the package is
(degree, coefficients compared from the constant term up); see poly_key.
"""

import random
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    ExcludedRootError,
    NonMonicError,
    ReducibleError,
    ZeroConstantTermError,
    ZeroPolynomialError,
)

# Fixed seed for equal-degree splitting: keeps factor() bit-reproducible.
FACTOR_SEED = 0x5EED

ZERO = ()
ONE = (1,)
X = (0, 1)


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_odd_prime(p):
    if not is_prime(p) or p == 2 or p >= 1 << 20:
        raise ValueError("modulus must be an odd prime below 2**20, got %r" % (p,))


def trim(coeffs):
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def degree(f):
    return len(f) - 1


def constant(a, p):
    a %= p
    return (a,) if a else ZERO


def add(f, g, p):
    n = max(len(f), len(g))
    return trim((((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % p)
                for i in range(n))


def neg(f, p):
    return tuple((-c) % p for c in f)


def sub(f, g, p):
    return add(f, neg(g, p), p)


def scale(f, a, p):
    a %= p
    if a == 0:
        return ZERO
    return tuple((c * a) % p for c in f)


def mul(f, g, p):
    if not f or not g:
        return ZERO
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            out[i + j] = (out[i + j] + a * b) % p
    return tuple(out)


def divmod_poly(f, g, p):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(f)
    dg = degree(g)
    inv_lead = pow(g[-1], -1, p)
    q = [0] * max(len(f) - dg, 0)
    for i in range(len(f) - 1, dg - 1, -1):
        c = (f[i] * inv_lead) % p
        if c:
            q[i - dg] = c
            for j, b in enumerate(g):
                f[i - dg + j] = (f[i - dg + j] - c * b) % p
    return trim(q), trim(f)


def mod(f, g, p):
    return divmod_poly(f, g, p)[1]


def mulmod(f, g, m, p):
    return mod(mul(f, g, p), m, p)


def powmod(f, e, m, p):
    result = mod(ONE, m, p)
    base = mod(f, m, p)
    while e > 0:
        if e & 1:
            result = mulmod(result, base, m, p)
        base = mulmod(base, base, m, p)
        e >>= 1
    return result


def poly_pow(f, e, p):
    result = ONE
    base = f
    while e > 0:
        if e & 1:
            result = mul(result, base, p)
        base = mul(base, base, p)
        e >>= 1
    return result


def monic(f, p):
    if not f:
        return f
    return scale(f, pow(f[-1], -1, p), p)


def gcd(f, g, p):
    while g:
        f, g = g, mod(f, g, p)
    return monic(f, p)


def ext_gcd(f, g, p):
    """(d, u, v) with u*f + v*g = d, d monic."""
    r0, r1 = f, g
    s0, s1 = ONE, ZERO
    t0, t1 = ZERO, ONE
    while r1:
        q, r = divmod_poly(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(q, s1, p), p)
        t0, t1 = t1, sub(t0, mul(q, t1, p), p)
    if not r0:
        return ZERO, ZERO, ZERO
    inv = pow(r0[-1], -1, p)
    return scale(r0, inv, p), scale(s0, inv, p), scale(t0, inv, p)


def invmod(f, m, p):
    d, u, _ = ext_gcd(f, m, p)
    if d != ONE:
        raise ZeroDivisionError("polynomial not invertible modulo given modulus")
    return mod(u, m, p)


def deriv(f, p):
    return trim((i * c) % p for i, c in enumerate(f) if i > 0)


def evaluate(f, a, p):
    result = 0
    for c in reversed(f):
        result = (result * a + c) % p
    return result


def poly_key(f):
    """Global canonical order: degree first, then constant-term-up lex."""
    return (degree(f), f)


def poly_to_json(f):
    return list(f)


def poly_from_json(coeffs, p):
    return trim(c % p for c in coeffs)


# ---------------------------------------------------------------------------
# dual polynomials and the factor trichotomy


def dual_poly(f, p):
    """The monic polynomial whose roots are the inverses of f's roots."""
    if not f or f[-1] != 1:
        raise NonMonicError("dual polynomial requires a monic input")
    if f[0] == 0:
        raise ZeroConstantTermError("dual polynomial requires f(0) != 0")
    inv0 = pow(f[0], -1, p)
    return tuple((inv0 * c) % p for c in reversed(f))


def is_self_dual(f, p):
    """Whether f equals its dual.  0, 1 and -1 must not be roots."""
    if not f or f[-1] != 1:
        raise NonMonicError("self-duality is defined for monic polynomials")
    for a in (0, 1, p - 1):
        if evaluate(f, a, p) == 0:
            raise ExcludedRootError("self-duality excludes roots 0, 1, -1")
    return f == dual_poly(f, p)


def x_minus_one(p):
    return ((p - 1) % p, 1)


def x_plus_one(p):
    return (1, 1)


@dataclass(frozen=True)
class FactorClass:
    """Trichotomy tag of an irreducible factor, with dual partner for pairs."""

    tag: str  # 'self_dual' | 'plus_one' | 'minus_one' | 'pair_low' | 'pair_high'
    partner: tuple | None = None


def classify_factor(q, p):
    if not is_irreducible(q, p):
        raise ReducibleError("classify_factor expects an irreducible polynomial")
    if q[0] == 0:
        raise ZeroConstantTermError("irreducible factor x is not an isometry divisor")
    if q == x_minus_one(p):
        return FactorClass("plus_one")
    if q == x_plus_one(p):
        return FactorClass("minus_one")
    dual = dual_poly(q, p)
    if dual == q:
        return FactorClass("self_dual")
    if poly_key(q) < poly_key(dual):
        return FactorClass("pair_low", dual)
    return FactorClass("pair_high", dual)


# ---------------------------------------------------------------------------
# factorization


def squarefree_part(f, p):
    """Product of the distinct irreducible factors of f."""
    if not f:
        raise ZeroPolynomialError("squarefree part of the zero polynomial")
    f = monic(f, p)
    out = ONE
    for g, _ in _squarefree_decomposition(f, p):
        out = mul(out, g, p)
    return out


def _pth_root(f, p):
    # f = g(x^p) over F_p means g has the same coefficients at indices i/p
    return trim(f[i] for i in range(0, len(f), p))


def _squarefree_decomposition(f, p):
    """List of (monic squarefree g_i, multiplicity m_i), product g_i^m_i = f."""
    if degree(f) == 0:
        return []
    out = []
    df = deriv(f, p)
    if not df:
        for g, m in _squarefree_decomposition(_pth_root(f, p), p):
            out.append((g, m * p))
        return out
    c = gcd(f, df, p)
    w = divmod_poly(f, c, p)[0]
    i = 1
    while degree(w) > 0:
        y = gcd(w, c, p)
        z = divmod_poly(w, y, p)[0]
        if degree(z) > 0:
            out.append((z, i))
        w = y
        c = divmod_poly(c, y, p)[0]
        i += 1
    if degree(c) > 0:
        for g, m in _squarefree_decomposition(_pth_root(c, p), p):
            out.append((g, m * p))
    return out


def _distinct_degree(f, p):
    """Split a squarefree monic f into [(product of degree-d factors, d)]."""
    out = []
    h = mod(X, f, p)
    g = f
    d = 0
    while degree(g) >= 1:
        d += 1
        if 2 * d > degree(g):
            out.append((g, degree(g)))
            break
        h = powmod(h, p, g, p)
        factor_d = gcd(sub(h, X, p), g, p)
        if degree(factor_d) > 0:
            out.append((factor_d, d))
            g = divmod_poly(g, factor_d, p)[0]
            h = mod(h, g, p)
    return out


def _equal_degree_split(f, d, p, rng):
    """All irreducible factors of f, where every factor has degree d."""
    if degree(f) == d:
        return [f]
    half = (p ** d - 1) // 2
    while True:
        a = trim(rng.randrange(p) for _ in range(degree(f)))
        if degree(a) < 1:
            continue
        g = gcd(a, f, p)
        if 0 < degree(g) < degree(f):
            break
        b = sub(powmod(a, half, f, p), ONE, p)
        g = gcd(b, f, p)
        if 0 < degree(g) < degree(f):
            break
    rest = divmod_poly(f, g, p)[0]
    return _equal_degree_split(g, d, p, rng) + _equal_degree_split(rest, d, p, rng)


def factor(f, p):
    """Complete factorization: (unit, [(monic irreducible, exponent), ...]).

    Factors are sorted by poly_key.  Output is deterministic: the internal
    randomness of equal-degree splitting is seeded with FACTOR_SEED.
    """
    if not f:
        raise ZeroPolynomialError("cannot factor the zero polynomial")
    unit = f[-1] % p
    f = monic(f, p)
    rng = random.Random(FACTOR_SEED)
    found = {}
    for g, m in _squarefree_decomposition(f, p):
        for part, d in _distinct_degree(g, p):
            for q in _equal_degree_split(part, d, p, rng):
                found[q] = found.get(q, 0) + m
    factors = sorted(found.items(), key=lambda item: poly_key(item[0]))
    return unit, factors


@lru_cache(maxsize=None)
def _small_primes(n):
    return tuple(q for q in range(2, n + 1) if is_prime(q))


def is_irreducible(f, p):
    """Rabin irreducibility test."""
    n = degree(f)
    if n < 1:
        return False
    if n == 1:
        return True
    f = monic(f, p)
    xq = powmod(X, p ** n, f, p)
    if xq != mod(X, f, p):
        return False
    for ell in _small_primes(n):
        if n % ell == 0:
            h = powmod(X, p ** (n // ell), f, p)
            if gcd(sub(h, X, p), f, p) != ONE:
                return False
    return True


def crt_idempotent(f1, f2, p):
    """e with e = 1 mod f1 and e = 0 mod f2, for coprime f1, f2."""
    d, u, v = ext_gcd(f1, f2, p)
    if d != ONE:
        raise ValueError("moduli are not coprime")
    return mul(v, f2, p)


# ---------------------------------------------------------------------------
# counting helpers used by the census module


@lru_cache(maxsize=None)
def count_irreducible(m, p):
    """Number of monic irreducible polynomials of degree m over F_p."""
    total = 0
    d = 1
    while d * d <= m:
        if m % d == 0:
            total += _moebius(m // d) * p ** d
            if d != m // d:
                total += _moebius(d) * p ** (m // d)
        d += 1
    return total // m


def _moebius(n):
    result = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            result = -result
        d += 1
    if n > 1:
        result = -result
    return result


@lru_cache(maxsize=None)
def self_dual_irreducible_count(m, p):
    """Number of monic irreducible self-dual polynomials of degree m."""
    if m % 2 == 1:
        return 0
    count = 0
    for f in _self_dual_candidates(m, p):
        if is_irreducible(f, p):
            count += 1
    return count


def _self_dual_candidates(m, p):
    # an irreducible self-dual has constant term 1 and palindromic coefficients,
    # so it is determined by c_1 .. c_{m/2}
    half = m // 2
    if half == 0:
        return
    for tail in _tuples(half - 1, p):
        for mid in range(p):
            yield (1,) + tail + (mid,) + tail[::-1] + (1,)


def _tuples(k, p):
    if k <= 0:
        yield ()
        return
    for head in range(p):
        for rest in _tuples(k - 1, p):
            yield (head,) + rest


@lru_cache(maxsize=None)
def dual_pair_count(m, p):
    """Number of unordered dual pairs {q, q*} of degree-m irreducibles."""
    total = count_irreducible(m, p)
    fixed = self_dual_irreducible_count(m, p)
    if m == 1:
        fixed += 2  # x - 1 and x + 1 are their own duals
        total -= 1  # exclude x, which has no dual
    return (total - fixed) // 2


@lru_cache(maxsize=None)
def first_self_dual_irreducible(m, p):
    """Canonical (poly_key-least) self-dual irreducible of degree m, or None."""
    best = None
    for f in _self_dual_candidates(m, p):
        if is_irreducible(f, p):
            if best is None or poly_key(f) < poly_key(best):
                best = f
    return best
