import random

import pytest

from setrecon import fieldmath as fm


def _naive_is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def test_is_prime_matches_trial_division():
    for n in range(0, 2000):
        assert fm.is_prime(n) == _naive_is_prime(n), n


def test_is_prime_large_known():
    assert fm.is_prime((1 << 61) - 1)  # Mersenne prime
    assert not fm.is_prime((1 << 61) + 1)
    assert fm.is_prime(2**64 + 13)


@pytest.mark.parametrize("start,expected", [(20, 23), (260, 263), (4, 5), (2, 2), (24, 29)])
def test_next_prime(start, expected):
    assert fm.next_prime(start) == expected


def test_inv_mod():
    q = 10007
    for a in (1, 2, 5000, q - 1):
        assert a * fm.inv_mod(a, q) % q == 1
    with pytest.raises(ValueError):
        fm.inv_mod(0, q)


def _rand_poly(rng, deg, q):
    p = [rng.randrange(q) for _ in range(deg)] + [rng.randrange(1, q)]
    return p


def test_poly_mul_kronecker_matches_schoolbook():
    rng = random.Random(0)
    for q in (23, 65537, fm.next_prime(1 << 64)):
        for _ in range(20):
            a = _rand_poly(rng, rng.randrange(1, 30), q)
            b = _rand_poly(rng, rng.randrange(1, 30), q)
            assert fm._poly_mul_ks(a, b, q) == fm._poly_mul_school(a, b, q)


def test_poly_divmod_roundtrip():
    rng = random.Random(1)
    q = 10007
    for _ in range(50):
        a = _rand_poly(rng, rng.randrange(0, 12), q)
        b = _rand_poly(rng, rng.randrange(0, 6), q)
        quot, rem = fm.poly_divmod(a, b, q)
        assert len(rem) < len(b) or not rem
        assert fm.poly_add(fm.poly_mul(quot, b, q), rem, q) == fm.poly_trim(list(a))


def test_poly_gcd_common_factor():
    rng = random.Random(2)
    q = 101
    for _ in range(30):
        f = fm.poly_from_roots([rng.randrange(q) for _ in range(3)], q)
        g = _rand_poly(rng, 2, q)
        h = _rand_poly(rng, 2, q)
        got = fm.poly_gcd(fm.poly_mul(f, g, q), fm.poly_mul(f, h, q), q)
        # f divides the gcd
        assert fm.poly_divmod(got, fm.poly_monic(f, q), q)[1] == []


def test_poly_eval_horner():
    q = 97
    poly = [3, 0, 5, 1]  # 3 + 5x^2 + x^3
    for x in range(q):
        assert fm.poly_eval(poly, x, q) == (3 + 5 * x * x + x**3) % q


def test_poly_pow_mod_fermat():
    q = 1009
    for a in (0, 1, 17, 500):
        # Z^q mod (Z - a) is the constant a^q = a
        assert fm.poly_pow_mod([0, 1], q, [(-a) % q, 1], q) == ([a] if a else [])


def test_sqrt_mod_exhaustive_small():
    for q in (23, 29, 13, 17, 1009):  # covers both q mod 4 branches
        residues = 0
        for a in range(q):
            s = fm.sqrt_mod(a, q)
            if s is not None:
                residues += 1
                assert s * s % q == a
        assert residues == (q + 1) // 2


def test_find_distinct_roots_recovers_exact_sets():
    rng = random.Random(3)
    q = 1009
    for _ in range(60):
        k = rng.randrange(0, 8)
        roots = rng.sample(range(q), k)
        f = fm.poly_from_roots(roots, q)
        got = fm.find_distinct_roots(f, q, random.Random(1))
        assert got is not None and sorted(got) == sorted(roots)


def test_find_distinct_roots_rejects_non_split():
    q = 1009
    rng = random.Random(4)
    # repeated root
    f = fm.poly_mul(fm.poly_from_roots([5, 5], q), fm.poly_from_roots([9], q), q)
    assert fm.find_distinct_roots(f, q, rng) is None
    # irreducible quadratic: x^2 - n for a non-residue n
    n = next(a for a in range(2, q) if fm.sqrt_mod(a, q) is None)
    assert fm.find_distinct_roots([(-n) % q, 0, 1], q, rng) is None
    # linear factor times irreducible quadratic
    f = fm.poly_mul([(-n) % q, 0, 1], fm.poly_from_roots([7], q), q)
    assert fm.find_distinct_roots(f, q, rng) is None
    # zero polynomial
    assert fm.find_distinct_roots([], q, rng) is None
