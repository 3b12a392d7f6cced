"""Exact arithmetic in small finite fields GF(p^e).

Field elements are plain integers in ``range(q)`` under the base-p
coefficient encoding: the integer ``sum(c[j] * p**j)`` stands for the
residue-class polynomial ``sum(c[j] * x**j)``.  Index 0 is the additive
and index 1 the multiplicative identity in every field.  All arithmetic
is integer-exact; floating point is never involved.

For small orders (q <= 256) a field instance precomputes full addition,
multiplication and inverse tables, but the tables are filled from the
polynomial arithmetic itself, so both paths agree by construction.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ParameterError

_TABLE_LIMIT = 256

# Witnesses making Miller-Rabin deterministic for every n < 3.3 * 10**24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test (exact for 64-bit inputs)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_power_decompose(q: int) -> tuple[int, int] | None:
    """Return ``(p, e)`` with ``q == p**e`` and p prime, or None."""
    if q < 2:
        return None
    # The prime base must divide q, so find the smallest prime factor and
    # check that q is a pure power of it.
    p = q
    for cand in range(2, min(q, 1 << 16)):
        if cand * cand > q:
            break
        if q % cand == 0:
            p = cand
            break
    if p == q:
        return (q, 1) if is_prime(q) else None
    e = 0
    while q % p == 0:
        q //= p
        e += 1
    return (p, e) if q == 1 else None


# ---------------------------------------------------------------------------
# Polynomials over Z_p, represented as tuples of coefficients, lowest first.


def _poly_divmod(num: tuple[int, ...], den: tuple[int, ...], p: int):
    num = list(num)
    dden = len(den) - 1
    lead_inv = pow(den[-1], p - 2, p) if den[-1] != 1 else 1
    for i in range(len(num) - 1, dden - 1, -1):
        coef = num[i] * lead_inv % p
        if coef:
            for j, c in enumerate(den):
                num[i - dden + j] = (num[i - dden + j] - coef * c) % p
        num[i] = coef  # quotient coefficient stored in place
    quot = tuple(num[dden:])
    rem = tuple(num[:dden])
    return quot, rem


def _poly_mulmod(a: tuple[int, ...], b: tuple[int, ...], mod: tuple[int, ...], p: int):
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    _, rem = _poly_divmod(tuple(prod), mod, p)
    return rem


def _is_irreducible(poly: tuple[int, ...], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg(poly)//2."""
    deg = len(poly) - 1
    for k in range(1, deg // 2 + 1):
        for enc in range(p**k):
            div = _encoding_to_coeffs(enc, p, k) + (1,)
            _, rem = _poly_divmod(poly, div, p)
            if not any(rem):
                return False
    return True


def _encoding_to_coeffs(enc: int, p: int, length: int) -> tuple[int, ...]:
    coeffs = []
    for _ in range(length):
        coeffs.append(enc % p)
        enc //= p
    return tuple(coeffs)


def _coeffs_to_encoding(coeffs, p: int) -> int:
    enc = 0
    for c in reversed(tuple(coeffs)):
        enc = enc * p + c
    return enc


def find_irreducible(p: int, e: int) -> tuple[int, ...]:
    """Smallest monic irreducible polynomial of degree e over Z_p.

    "Smallest" means the minimum of ``sum(c[j] * p**j)`` over the non-leading
    coefficients, which makes the choice (and everything derived from it)
    deterministic.  Returned as e+1 coefficients, lowest degree first, with
    a trailing 1.  For e == 1 this is the polynomial x.
    """
    if not is_prime(p):
        raise ParameterError(f"p={p} is not prime")
    if e < 1:
        raise ParameterError(f"extension degree e={e} must be >= 1")
    if e == 1:
        return (0, 1)
    for enc in range(p**e):
        poly = _encoding_to_coeffs(enc, p, e) + (1,)
        if _is_irreducible(poly, p):
            return poly
    raise AssertionError("unreachable: an irreducible polynomial always exists")


class PrimePowerField:
    """Arithmetic in GF(p^e) on integer-encoded elements.

    Elements are integers in ``range(q)``; ``coeffs``/``from_coeffs`` convert
    between the integer encoding and the coefficient vector.  ``add``, ``mul``,
    ``inv`` and ``pow`` are exact.  Do not mix elements of distinct fields.
    """

    def __init__(self, p: int, e: int, modulus: tuple[int, ...] | None = None):
        if not is_prime(p):
            raise ParameterError(f"p={p} is not prime")
        if e < 1:
            raise ParameterError(f"extension degree e={e} must be >= 1")
        if modulus is None:
            modulus = find_irreducible(p, e)
        else:
            modulus = tuple(int(c) for c in modulus)
            if len(modulus) != e + 1 or modulus[-1] != 1:
                raise ParameterError("modulus must be monic of degree e")
            if not all(0 <= c < p for c in modulus[:-1]):
                raise ParameterError("modulus coefficients must lie in [0, p)")
            if e > 1 and not _is_irreducible(modulus, p):
                raise ParameterError(f"modulus {modulus} is reducible over Z_{p}")
        self.p = p
        self.e = e
        self.q = p**e
        self.modulus = modulus
        self.add_table: np.ndarray | None = None
        self.mul_table: np.ndarray | None = None
        self.inv_table: np.ndarray | None = None
        if self.q <= _TABLE_LIMIT:
            self._build_tables()

    # -- representation ----------------------------------------------------

    def __repr__(self):
        return f"PrimePowerField(p={self.p}, e={self.e})"

    def __eq__(self, other):
        return (
            isinstance(other, PrimePowerField)
            and (self.p, self.e, self.modulus) == (other.p, other.e, other.modulus)
        )

    def __hash__(self):
        return hash((self.p, self.e, self.modulus))

    def coeffs(self, a: int) -> tuple[int, ...]:
        """Coefficient vector of element ``a``, lowest degree first."""
        self._check(a)
        return _encoding_to_coeffs(a, self.p, self.e)

    def from_coeffs(self, coeffs) -> int:
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) != self.e or not all(0 <= c < self.p for c in coeffs):
            raise ParameterError(f"need {self.e} coefficients in [0, {self.p})")
        return _coeffs_to_encoding(coeffs, self.p)

    def _check(self, a: int) -> int:
        if not isinstance(a, (int, np.integer)) or not 0 <= a < self.q:
            raise ParameterError(f"{a!r} is not an element of GF({self.q})")
        return int(a)

    # -- scalar arithmetic ---------------------------------------------------

    def add(self, a: int, b: int) -> int:
        a, b = self._check(a), self._check(b)
        if self.e == 1:
            return (a + b) % self.p
        return self._poly_add(a, b)

    def neg(self, a: int) -> int:
        a = self._check(a)
        if self.e == 1:
            return (-a) % self.p
        return _coeffs_to_encoding(
            tuple((-c) % self.p for c in self.coeffs(a)), self.p
        )

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        a, b = self._check(a), self._check(b)
        if self.mul_table is not None:
            return int(self.mul_table[a, b])
        return self._poly_mul(a, b)

    def inv(self, a: int) -> int:
        a = self._check(a)
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.q})")
        if self.inv_table is not None:
            return int(self.inv_table[a])
        return self._poly_inv(a)

    def pow(self, a: int, n: int) -> int:
        """Square-and-multiply exponentiation; negative n inverts first."""
        a = self._check(a)
        if n < 0:
            a, n = self.inv(a), -n
        result = 1
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    # -- polynomial ground truth (always available, used to build tables) ----

    def _poly_add(self, a: int, b: int) -> int:
        ca = _encoding_to_coeffs(a, self.p, self.e)
        cb = _encoding_to_coeffs(b, self.p, self.e)
        return _coeffs_to_encoding(
            tuple((x + y) % self.p for x, y in zip(ca, cb)), self.p
        )

    def _poly_mul(self, a: int, b: int) -> int:
        if self.e == 1:
            return a * b % self.p
        ca = _encoding_to_coeffs(a, self.p, self.e)
        cb = _encoding_to_coeffs(b, self.p, self.e)
        rem = _poly_mulmod(ca, cb, self.modulus, self.p)
        rem = rem + (0,) * (self.e - len(rem))
        return _coeffs_to_encoding(rem, self.p)

    def _poly_inv(self, a: int) -> int:
        """Inverse by the extended Euclidean algorithm on polynomials."""
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        p = self.p
        r0, r1 = self.modulus, _encoding_to_coeffs(a, p, self.e)
        t0, t1 = (0,), (1,)
        while any(r1):
            while r1 and r1[-1] == 0:
                r1 = r1[:-1]
            quot, rem = _poly_divmod(r0, r1, p)
            # t0 - quot * t1, all reduced mod the modulus
            prod = [0] * (len(quot) + len(t1) - 1)
            for i, qi in enumerate(quot):
                for j, tj in enumerate(t1):
                    prod[i + j] = (prod[i + j] + qi * tj) % p
            new_t = [0] * max(len(t0), len(prod))
            for i in range(len(new_t)):
                x = t0[i] if i < len(t0) else 0
                y = prod[i] if i < len(prod) else 0
                new_t[i] = (x - y) % p
            r0, r1, t0, t1 = r1, rem, t1, tuple(new_t)
        # r0 is now gcd = nonzero constant; normalize t0 by its inverse.
        const_inv = pow(r0[0], p - 2, p)
        t0 = tuple(c * const_inv % p for c in t0)
        _, rem = _poly_divmod(t0 + (0,) * (self.e + 1 - len(t0)), self.modulus, p)
        rem = rem + (0,) * (self.e - len(rem))
        return _coeffs_to_encoding(rem, self.p)

    def _build_tables(self):
        q = self.q
        add = np.empty((q, q), dtype=np.int16)
        mul = np.empty((q, q), dtype=np.int16)
        for a in range(q):
            for b in range(a, q):
                s = self._poly_add(a, b)
                m = self._poly_mul(a, b)
                add[a, b] = add[b, a] = s
                mul[a, b] = mul[b, a] = m
        inv = np.zeros(q, dtype=np.int16)
        for a in range(1, q):
            inv[a] = self._poly_inv(a)
        self.add_table = add
        self.mul_table = mul
        self.inv_table = inv

    def as_dict(self) -> dict:
        return {"p": self.p, "e": self.e, "modulus": list(self.modulus)}


@lru_cache(maxsize=None)
def field_for(p: int, e: int) -> PrimePowerField:
    """Shared field instance for GF(p^e) with the canonical modulus."""
    return PrimePowerField(p, e)


def field_for_order(q: int) -> PrimePowerField:
    """Shared field instance for the (unique) field with q elements."""
    pe = prime_power_decompose(q)
    if pe is None:
        raise ParameterError(f"q={q} is not a prime power")
    return field_for(*pe)


def field_from_dict(data: dict) -> PrimePowerField:
    try:
        p, e = int(data["p"]), int(data["e"])
        modulus = tuple(int(c) for c in data["modulus"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed field description: {data!r}") from exc
    return PrimePowerField(p, e, modulus)
