"""Arithmetic over prime fields and dense univariate polynomials.

Polynomials over F_q are plain lists of ints in [0, q) with little-endian
coefficient order: [a_0, a_1, ..., a_n] is a_0 + a_1*Z + ... + a_n*Z^n.
The leading coefficient is nonzero and [] is the zero polynomial.  No
wrapper objects are used; every function takes the modulus q explicitly.
"""

from __future__ import annotations

import random

_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
    67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137,
    139, 149, 151, 157, 163, 167, 173,
)


def is_prime(n: int) -> bool:
    """Miller-Rabin with the first 40 primes as bases."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    if n <= 2:
        return 2
    c = n | 1
    while not is_prime(c):
        c += 2
    return c


def inv_mod(a: int, q: int) -> int:
    """Inverse of a modulo q; raises ZeroDivisionError for a == 0 mod q."""
    return pow(a, -1, q)


def poly_trim(a: list[int]) -> list[int]:
    """Strip trailing zero coefficients in place and return the list."""
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_add(a: list[int], b: list[int], q: int) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % q
    return poly_trim(out)


def poly_sub(a: list[int], b: list[int], q: int) -> list[int]:
    out = list(a) + [0] * (len(b) - len(a))
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % q
    return poly_trim(out)


def poly_mul_scalar(a: list[int], s: int, q: int) -> list[int]:
    s %= q
    if s == 0:
        return []
    return [c * s % q for c in a]


# Kronecker substitution pays off once the schoolbook product loop gets big.
_KS_THRESHOLD = 256


def _poly_mul_school(a: list[int], b: list[int], q: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return poly_trim([c % q for c in out])


def _poly_mul_ks(a: list[int], b: list[int], q: int) -> list[int]:
    # Pack coefficients into one big int so the product is a single
    # C-level multiplication; slot width must hold min(len)*q^2.
    slot_bits = 2 * q.bit_length() + min(len(a), len(b)).bit_length() + 1
    nbytes = (slot_bits + 7) // 8
    pa = bytearray(len(a) * nbytes)
    for i, c in enumerate(a):
        pa[i * nbytes:i * nbytes + nbytes] = c.to_bytes(nbytes, "little")
    pb = bytearray(len(b) * nbytes)
    for i, c in enumerate(b):
        pb[i * nbytes:i * nbytes + nbytes] = c.to_bytes(nbytes, "little")
    prod = int.from_bytes(pa, "little") * int.from_bytes(pb, "little")
    raw = prod.to_bytes((len(a) + len(b)) * nbytes, "little")
    out = [
        int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") % q
        for i in range(len(a) + len(b) - 1)
    ]
    return poly_trim(out)


def poly_mul(a: list[int], b: list[int], q: int) -> list[int]:
    if not a or not b:
        return []
    if len(a) * len(b) >= _KS_THRESHOLD:
        return _poly_mul_ks(a, b, q)
    return _poly_mul_school(a, b, q)


def poly_divmod(a: list[int], b: list[int], q: int) -> tuple[list[int], list[int]]:
    """Quotient and remainder of a by nonzero b."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    db = len(b) - 1
    if len(r) - 1 < db:
        return [], poly_trim(r)
    inv_lead = inv_mod(b[-1], q)
    quot = [0] * (len(r) - db)
    for k in range(len(r) - 1, db - 1, -1):
        c = r[k] % q
        if c == 0:
            continue
        f = c * inv_lead % q
        quot[k - db] = f
        for j in range(db + 1):
            r[k - db + j] = (r[k - db + j] - f * b[j]) % q
    return poly_trim(quot), poly_trim([c % q for c in r])


def poly_mod(a: list[int], b: list[int], q: int) -> list[int]:
    return poly_divmod(a, b, q)[1]


def poly_monic(a: list[int], q: int) -> list[int]:
    if not a:
        return []
    if a[-1] == 1:
        return list(a)
    return poly_mul_scalar(a, inv_mod(a[-1], q), q)


def poly_gcd(a: list[int], b: list[int], q: int) -> list[int]:
    """Monic gcd via Euclid."""
    a, b = list(a), list(b)
    while b:
        a, b = b, poly_mod(a, b, q)
    return poly_monic(a, q)


def poly_eval(a: list[int], x: int, q: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % q
    return acc


def poly_from_roots(roots, q: int) -> list[int]:
    out = [1]
    for r in roots:
        out = poly_mul(out, [(-r) % q, 1], q)
    return out


def poly_pow_mod(base: list[int], e: int, mod: list[int], q: int) -> list[int]:
    """base^e reduced modulo the polynomial `mod`."""
    result = [1]
    acc = poly_mod(base, mod, q)
    while e:
        if e & 1:
            result = poly_mod(poly_mul(result, acc, q), mod, q)
        e >>= 1
        if e:
            acc = poly_mod(poly_mul(acc, acc, q), mod, q)
    return result


def sqrt_mod(a: int, q: int) -> int | None:
    """Square root of a modulo odd prime q, or None for a non-residue."""
    a %= q
    if a == 0:
        return 0
    if pow(a, (q - 1) // 2, q) != 1:
        return None
    if q % 4 == 3:
        return pow(a, (q + 1) // 4, q)
    # Tonelli-Shanks
    s = 0
    d = q - 1
    while d % 2 == 0:
        d //= 2
        s += 1
    z = 2
    while pow(z, (q - 1) // 2, q) != q - 1:
        z += 1
    m, c, t, r = s, pow(z, d, q), pow(a, d, q), pow(a, (d + 1) // 2, q)
    while t != 1:
        t2 = t
        i = 0
        while t2 != 1:
            t2 = t2 * t2 % q
            i += 1
        b = pow(c, 1 << (m - i - 1), q)
        m, c = i, b * b % q
        t = t * c % q
        r = r * b % q
    return r


def _quadratic_roots(f: list[int], q: int) -> list[int] | None:
    """Distinct roots of a monic quadratic, or None if it does not split."""
    b, c = f[1], f[0]
    disc = (b * b - 4 * c) % q
    if disc == 0:
        return None
    s = sqrt_mod(disc, q)
    if s is None:
        return None
    inv2 = (q + 1) // 2
    return [(-b + s) * inv2 % q, (-b - s) * inv2 % q]


def _split_linear(f: list[int], q: int, rng: random.Random) -> list[int] | None:
    # f is monic and known to be a product of distinct linear factors.
    deg = len(f) - 1
    if deg == 0:
        return []
    if deg == 1:
        return [(-f[0]) % q]
    if deg == 2:
        return _quadratic_roots(f, q)
    half = (q - 1) // 2
    for _ in range(64):
        a = rng.randrange(q)
        w = poly_pow_mod([a, 1], half, f, q)
        g = poly_gcd(poly_sub(w, [1], q), f, q)
        if 0 < len(g) - 1 < deg:
            left = _split_linear(g, q, rng)
            right = _split_linear(poly_divmod(f, g, q)[0], q, rng)
            if left is None or right is None:
                return None
            return left + right
    return None


def find_distinct_roots(f: list[int], q: int, rng: random.Random) -> list[int] | None:
    """All roots of f if it splits into distinct linear factors over F_q.

    Returns None when it does not (repeated roots, irreducible factors, or
    the zero polynomial).  Uses gcd with Z^q - Z as the completeness test
    and randomized degree-one splitting with shifts drawn from rng.
    """
    if not f:
        return None
    f = poly_monic(f, q)
    deg = len(f) - 1
    if deg == 0:
        return []
    if deg == 1:
        return [(-f[0]) % q]
    if deg == 2:
        return _quadratic_roots(f, q)
    # Z^q ≡ Z (mod f) iff f is squarefree and fully split.
    if poly_pow_mod([0, 1], q, f, q) != [0, 1]:
        return None
    return _split_linear(f, q, rng)
