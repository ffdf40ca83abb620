"""Exact modular arithmetic over NTT-friendly primes.

Every prime q used by the kernels satisfies q == 1 (mod 2N) so that a
primitive 2N-th root of unity psi exists (psi^N == -1 mod q).  Word size
is capped at 54 bits so that a product of two residues fits comfortably
in double-word arithmetic on any backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import List

MAX_WORD_BITS = 54

# Deterministic Miller-Rabin witnesses, valid for all candidates < 3.3e24
# (covers every < 64-bit modulus this library generates).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class NoPrimeFound(Exception):
    """Search space of the requested bit length is exhausted."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def bit_reverse(value: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (value & 1)
        value >>= 1
    return out


@dataclass(frozen=True)
class PrimeModulus:
    """A prime q with a verified primitive 2N-th root of unity.

    Immutable after construction; safe to share across workers.
    """

    q: int
    two_n: int
    psi: int
    psi_inv: int
    n_inv: int
    # Barrett constants: mu = floor(2^(2k) / q) with k = bitlen(q).
    barrett_k: int = field(repr=False, default=0)
    barrett_mu: int = field(repr=False, default=0)

    @classmethod
    def create(cls, q: int, two_n: int, psi: int) -> "PrimeModulus":
        n = two_n // 2
        if pow(psi, two_n, q) != 1 or pow(psi, n, q) != q - 1:
            raise ValueError(f"psi={psi} is not a primitive {two_n}-th root mod {q}")
        k = q.bit_length()
        return cls(
            q=q,
            two_n=two_n,
            psi=psi,
            psi_inv=pow(psi, -1, q),
            n_inv=pow(n, -1, q),
            barrett_k=k,
            barrett_mu=(1 << (2 * k)) // q,
        )

    @property
    def n(self) -> int:
        return self.two_n // 2


def mod_mul(a: int, b: int, m: PrimeModulus) -> int:
    """a*b mod q via Barrett reduction: one 2w-bit product, fixed corrections.

    Operands must already be reduced. The quotient estimate is off by at
    most two, so two conditional subtractions always suffice.
    """
    q = m.q
    t = a * b
    k = m.barrett_k
    qhat = ((t >> (k - 1)) * m.barrett_mu) >> (k + 1)
    r = t - qhat * q
    if r >= q:
        r -= q
    if r >= q:
        r -= q
    return r


def mod_pow(base: int, exp: int, m: PrimeModulus) -> int:
    result = 1
    base %= m.q
    while exp > 0:
        if exp & 1:
            result = mod_mul(result, base, m)
        base = mod_mul(base, base, m)
        exp >>= 1
    return result


def _find_primitive_root(q: int, two_n: int) -> int:
    """Smallest generator-derived psi with multiplicative order exactly 2N.

    2N is a power of two, so psi has order 2N iff psi^N == -1 (mod q).
    """
    n = two_n // 2
    e = (q - 1) // two_n
    for g in range(2, q):
        psi = pow(g, e, q)
        if pow(psi, n, q) == q - 1:
            return psi
    raise NoPrimeFound(f"no primitive {two_n}-th root mod {q}")


def find_ntt_prime(bits: int, two_n: int, skip: int = 0) -> PrimeModulus:
    """(skip+1)-th prime of the given bit length with q == 1 (mod two_n)."""
    if bits > MAX_WORD_BITS:
        raise ValueError(f"bit length {bits} exceeds word size {MAX_WORD_BITS}")
    if two_n & (two_n - 1) != 0:
        raise ValueError("two_n must be a power of two")
    lo, hi = 1 << (bits - 1), 1 << bits
    # Smallest candidate of this bit length congruent to 1 mod two_n.
    q = lo + 1 if lo % two_n == 0 else lo + (two_n - lo % two_n) + 1
    remaining = skip
    while q < hi:
        if is_prime(q):
            if remaining == 0:
                return PrimeModulus.create(q, two_n, _find_primitive_root(q, two_n))
            remaining -= 1
        q += two_n
    raise NoPrimeFound(f"no {bits}-bit prime == 1 mod {two_n} after skipping {skip}")


def find_ntt_primes(bits: int, two_n: int, count: int, skip: int = 0) -> List[PrimeModulus]:
    """Like find_ntt_prime but scans the candidate space once."""
    lo, hi = 1 << (bits - 1), 1 << bits
    q = lo + 1 if lo % two_n == 0 else lo + (two_n - lo % two_n) + 1
    found: List[PrimeModulus] = []
    remaining = skip
    while q < hi and len(found) < count:
        if is_prime(q):
            if remaining == 0:
                found.append(PrimeModulus.create(q, two_n, _find_primitive_root(q, two_n)))
            else:
                remaining -= 1
        q += two_n
    if len(found) < count:
        raise NoPrimeFound(f"only {len(found)} of {count} {bits}-bit primes == 1 mod {two_n}")
    return found


class TwiddleSource:
    """Powers of psi, either from a stored table or generated on the fly.

    Both modes return identical values for every exponent; the stored mode
    reads a precomputed table while the on-the-fly mode keeps one running
    product and reaches other exponents by square-and-multiply.
    """

    STORED = "stored"
    ON_THE_FLY = "on_the_fly"

    def __init__(self, m: PrimeModulus, mode: str = STORED):
        if mode not in (self.STORED, self.ON_THE_FLY):
            raise ValueError(f"unknown twiddle mode {mode!r}")
        self.m = m
        self.mode = mode
        self._table: List[int] | None = None
        # Running (exponent, value) pair for incremental generation.
        self._exp = 0
        self._val = 1

    def _stored(self) -> List[int]:
        if self._table is None:
            m = self.m
            table = [1] * m.two_n
            for i in range(1, m.two_n):
                table[i] = mod_mul(table[i - 1], m.psi, m)
            self._table = table
        return self._table

    def power(self, exp: int) -> int:
        """psi^exp for 0 <= exp < 2N (natural-order accessor)."""
        exp %= self.m.two_n
        if self.mode == self.STORED:
            return self._stored()[exp]
        if exp == self._exp + 1:
            self._val = mod_mul(self._val, self.m.psi, self.m)
        elif exp != self._exp:
            self._val = mod_pow(self.m.psi, exp, self.m)
        self._exp = exp
        return self._val

    def bitrev_power(self, index: int) -> int:
        """psi^bitrev(index) over the full 2N index range."""
        width = self.m.two_n.bit_length() - 1
        if not 0 <= index < self.m.two_n:
            raise ValueError(f"index {index} out of range [0, {self.m.two_n})")
        return self.power(bit_reverse(index, width))


def twiddle(m: PrimeModulus, index: int, mode: str = TwiddleSource.STORED,
            order: str = "natural") -> int:
    """One twiddle factor; see TwiddleSource for the stored/on-the-fly contract."""
    src = TwiddleSource(m, mode)
    if order == "natural":
        return src.power(index)
    if order == "bitrev":
        return src.bitrev_power(index)
    raise ValueError(f"unknown twiddle order {order!r}")


@dataclass(frozen=True)
class RnsBasis:
    """RNS bases for the ciphertext chain (q_i) and the special primes (p_i).

    K = ceil((L+1)/dnum) special primes back the key-switching digits; the
    base-conversion constants (hats) are derived lazily by the CKKS layer.
    """

    q_list: tuple
    p_list: tuple
    n: int
    dnum: int

    def __post_init__(self):
        moduli = [m.q for m in self.q_list + self.p_list]
        if len(set(moduli)) != len(moduli):
            raise ValueError("RNS moduli must be pairwise distinct primes")
        if self.k * self.dnum < self.l_max + 1:
            raise ValueError("dnum * K must cover the full modulus chain")
        for m in self.q_list + self.p_list:
            if m.two_n != 2 * self.n:
                raise ValueError("all moduli must support the ring degree")

    @property
    def l_max(self) -> int:
        return len(self.q_list) - 1

    @property
    def k(self) -> int:
        return len(self.p_list)

    @property
    def p_product(self) -> int:
        return reduce(lambda x, y: x * y, (m.q for m in self.p_list), 1)

    def q_product(self, level: int) -> int:
        return reduce(lambda x, y: x * y, (m.q for m in self.q_list[: level + 1]), 1)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "dnum": self.dnum,
            "q": [str(m.q) for m in self.q_list],
            "p": [str(m.q) for m in self.p_list],
            "psi_q": [str(m.psi) for m in self.q_list],
            "psi_p": [str(m.psi) for m in self.p_list],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RnsBasis":
        n = int(doc["n"])
        q_list = tuple(
            PrimeModulus.create(int(q), 2 * n, int(psi))
            for q, psi in zip(doc["q"], doc["psi_q"])
        )
        p_list = tuple(
            PrimeModulus.create(int(q), 2 * n, int(psi))
            for q, psi in zip(doc["p"], doc["psi_p"])
        )
        return cls(q_list=q_list, p_list=p_list, n=n, dnum=int(doc["dnum"]))


def make_basis(n: int, levels: int, dnum: int, bits: int, first_bits: int | None = None,
               p_bits: int | None = None, insecure_ok: bool = True) -> RnsBasis:
    """Generate an RNS basis: L+1 ciphertext primes plus K special primes.

    Parameter sets produced here are for functional verification; nothing
    about the sizes chosen claims cryptographic security.
    """
    if not insecure_ok:
        raise ValueError("this generator only produces test-grade parameter sets")
    k = -(-(levels + 1) // dnum)
    first = first_bits or bits
    p_bits = p_bits or bits
    if first == bits:
        q_primes = find_ntt_primes(bits, 2 * n, levels + 1)
    else:
        q_primes = find_ntt_primes(first, 2 * n, 1)
        q_primes += find_ntt_primes(bits, 2 * n, levels)
    # Special primes must not collide with the chain primes of equal size.
    skip = sum(1 for m in q_primes if m.q.bit_length() == p_bits)
    p_primes = find_ntt_primes(p_bits, 2 * n, k, skip=skip)
    return RnsBasis(q_list=tuple(q_primes), p_list=tuple(p_primes), n=n, dnum=dnum)
