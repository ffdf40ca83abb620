"""Negacyclic polynomial kernels over a single RNS limb.

Provides the reference forward/inverse NTT (natural input, bit-reversed
output and back), a hierarchical (N1, N2) NTT that never materializes a
transpose, the direct automorphism map and its shuffle-tree realization,
and the triadic pointwise MAS unit.

Layout convention shared with the AUT unit: coefficient i of a ring
element lives at address (i mod N1) of memory (i div N1), i.e. memory j
holds the contiguous chunk [j*N1, (j+1)*N1).  Reading one address across
all N2 memories yields the stride-N1 row used by the second NTT phase
and by the automorphism, so neither ever needs a transposed copy.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Tuple

from .modarith import PrimeModulus, TwiddleSource, bit_reverse


class DomainError(Exception):
    """Operation applied to a polynomial in the wrong domain."""


class PlanMismatch(Exception):
    """NttPlan does not factor the polynomial length."""


class InvalidGalois(Exception):
    """Galois element must be odd and inside (0, 2N)."""


class ModulusMismatch(Exception):
    pass


class DomainMismatch(Exception):
    pass


class Domain(Enum):
    COEFF = 0
    NTT = 1


@dataclass
class Poly:
    coeffs: List[int]
    modulus: PrimeModulus
    domain: Domain = Domain.COEFF

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def copy(self) -> "Poly":
        return Poly(list(self.coeffs), self.modulus, self.domain)


@dataclass(frozen=True)
class NttPlan:
    """(N1, N2) factorization; the transform costs N1 cycles at N2 lanes."""

    n1: int
    n2: int
    twiddle_mode: str = TwiddleSource.STORED

    def __post_init__(self):
        for side in (self.n1, self.n2):
            if side < 1 or side & (side - 1):
                raise PlanMismatch(f"plan sides must be powers of two, got {self}")

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    def validate(self, n: int) -> None:
        if self.n != n:
            raise PlanMismatch(f"plan {self.n1}x{self.n2} does not cover N={n}")


# ---------------------------------------------------------------------------
# Twiddle tables (stored or generated on the fly, identical values)

_table_cache: Dict[tuple, tuple] = {}


def _psi_table_bitrev(m: PrimeModulus, size: int, stride_exp: int, inverse: bool,
                      mode: str) -> List[int]:
    """[psi^(stride_exp * bitrev(i, log2 size)) for i < size], negated exponents
    when inverse."""
    key = ("brv", m.q, size, stride_exp, inverse, mode)
    if key not in _table_cache:
        src = TwiddleSource(m, mode)
        width = size.bit_length() - 1
        two_n = m.two_n
        exps = [stride_exp * bit_reverse(i, width) % two_n for i in range(size)]
        if inverse:
            exps = [(two_n - e) % two_n for e in exps]
        _table_cache[key] = tuple(src.power(e) for e in exps)
    return list(_table_cache[key])


def _omega_table(m: PrimeModulus, size: int, stride_exp: int, mode: str) -> List[int]:
    """[psi^(stride_exp * j) for j < size]: natural powers of a cyclic root."""
    key = ("nat", m.q, size, stride_exp, mode)
    if key not in _table_cache:
        src = TwiddleSource(m, mode)
        _table_cache[key] = tuple(src.power(stride_exp * j % m.two_n) for j in range(size))
    return list(_table_cache[key])


def _interphase_table(m: PrimeModulus, plan: NttPlan, stride_exp: int) -> List[int]:
    """Twiddles between the two hybrid phases, indexed [c*N1 + a]."""
    key = ("mid", m.q, plan.n1, plan.n2, stride_exp, plan.twiddle_mode)
    if key not in _table_cache:
        src = TwiddleSource(m, plan.twiddle_mode)
        n1, n2 = plan.n1, plan.n2
        width2 = n2.bit_length() - 1
        two_n = m.two_n
        table = [1] * (n1 * n2)
        for c in range(n2):
            base = (2 * bit_reverse(c, width2) + 1) * stride_exp
            for a in range(n1):
                table[c * n1 + a] = src.power(base * a % two_n)
        _table_cache[key] = tuple(table)
    return list(_table_cache[key])


def _ring_stride(m: PrimeModulus, n: int) -> int:
    """Exponent stride mapping psi (a 2*m.n-th root) onto a 2n-th root."""
    if n < 1 or n & (n - 1):
        raise PlanMismatch(f"polynomial length {n} must be a power of two")
    if m.n % n:
        raise PlanMismatch(f"modulus supports 2N={m.two_n}, not length {n}")
    return m.n // n


# ---------------------------------------------------------------------------
# Core butterflies (in-place on raw lists; strided so the hybrid phases can
# read the memory layout directly)


def _ct_negacyclic(x: List[int], base: int, stride: int, size: int,
                   table: List[int], q: int) -> None:
    """Cooley-Tukey pass, natural order in, bit-reversed out.

    table[h + i] holds the butterfly constant of block i at half-size h,
    i.e. the 2*size-th roots in bit-reversed order.
    """
    t = size
    m = 1
    while m < size:
        t >>= 1
        for i in range(m):
            s = table[m + i]
            j1 = base + 2 * i * t * stride
            for j in range(j1, j1 + t * stride, stride):
                u = x[j]
                v = x[j + t * stride] * s % q
                x[j] = (u + v) % q
                x[j + t * stride] = (u - v) % q
        m <<= 1


def _gs_inverse(x: List[int], size: int, table: List[int], q: int) -> None:
    """Gentleman-Sande pass, bit-reversed in, natural out (no 1/N scaling)."""
    t = 1
    m = size
    while m > 1:
        h = m >> 1
        j1 = 0
        for i in range(h):
            s = table[h + i]
            for j in range(j1, j1 + t):
                u = x[j]
                v = x[j + t]
                x[j] = (u + v) % q
                x[j + t] = (u - v) * s % q
            j1 += 2 * t
        t <<= 1
        m = h
    return


def _dif_cyclic(x: List[int], base: int, size: int, omega: List[int], q: int) -> None:
    """Decimation-in-frequency pass for the plain DFT, natural in, bit-reversed
    out.  omega holds natural powers of a primitive size-th root."""
    h = size >> 1
    while h >= 1:
        step = size // (2 * h)
        for start in range(base, base + size, 2 * h):
            for j in range(h):
                u = x[start + j]
                v = x[start + j + h]
                x[start + j] = (u + v) % q
                x[start + j + h] = (u - v) * omega[j * step] % q
        h >>= 1


# ---------------------------------------------------------------------------
# Reference transforms


def ntt_reference(p: Poly, mode: str = TwiddleSource.STORED) -> Poly:
    """Forward negacyclic NTT; output in bit-reversed order."""
    if p.domain != Domain.COEFF:
        raise DomainError("ntt_reference expects a coefficient-domain polynomial")
    m = p.modulus
    n = p.n
    table = _psi_table_bitrev(m, n, _ring_stride(m, n), inverse=False, mode=mode)
    x = list(p.coeffs)
    _ct_negacyclic(x, 0, 1, n, table, m.q)
    return Poly(x, m, Domain.NTT)


def intt_reference(p: Poly, mode: str = TwiddleSource.STORED) -> Poly:
    """Exact inverse of ntt_reference, including the 1/N scaling."""
    if p.domain != Domain.NTT:
        raise DomainError("intt_reference expects an NTT-domain polynomial")
    m = p.modulus
    n = p.n
    table = _psi_table_bitrev(m, n, _ring_stride(m, n), inverse=True, mode=mode)
    x = list(p.coeffs)
    _gs_inverse(x, n, table, m.q)
    n_inv = m.n_inv if n == m.n else pow(n, -1, m.q)
    q = m.q
    return Poly([c * n_inv % q for c in x], m, Domain.COEFF)


def ntt_hybrid(p: Poly, plan: NttPlan) -> Poly:
    """Hierarchical NTT, bit-identical to ntt_reference.

    Phase one runs N1 size-N2 negacyclic transforms on the stride-N1 rows
    (one address across all memories), phase two runs N2 size-N1 cyclic
    transforms on the contiguous per-memory chunks.  Writing each small
    transform in bit-reversed order makes the composed output land exactly
    in the reference ordering, which is what removes the transpose.
    """
    if p.domain != Domain.COEFF:
        raise DomainError("ntt_hybrid expects a coefficient-domain polynomial")
    plan.validate(p.n)
    m = p.modulus
    q = m.q
    n1, n2 = plan.n1, plan.n2
    s = _ring_stride(m, p.n)
    mode = plan.twiddle_mode
    x = list(p.coeffs)

    if n2 > 1:
        row_table = _psi_table_bitrev(m, n2, s * n1, inverse=False, mode=mode)
        for a in range(n1):
            _ct_negacyclic(x, a, n1, n2, row_table, q)

    mid = _interphase_table(m, plan, s)
    for i in range(n1 * n2):
        x[i] = x[i] * mid[i] % q

    if n1 > 1:
        omega = _omega_table(m, n1, 2 * s * n2, mode=mode)
        for c in range(n2):
            _dif_cyclic(x, c * n1, n1, omega, q)

    return Poly(x, m, Domain.NTT)


# ---------------------------------------------------------------------------
# Automorphism


def _check_gle(gle: int, two_n: int) -> None:
    if gle % 2 == 0 or not 0 < gle < two_n:
        raise InvalidGalois(f"galois element must be odd in (0, {two_n}), got {gle}")


def automorphism_oracle(p: Poly, gle: int) -> Poly:
    """Direct O(N) signed-permutation map x -> x^gle mod (x^N + 1)."""
    n = p.n
    two_n = 2 * n
    _check_gle(gle, two_n)
    q = p.modulus.q
    out = [0] * n
    for i, c in enumerate(p.coeffs):
        t = i * gle % two_n
        out[t % n] = c if t < n else (q - c) % q
    return Poly(out, p.modulus, p.domain)


def _shuffle_tree(lanes: List[Tuple[int, int]], n2: int) -> List[int]:
    """Route (dest_lane, value) pairs through log2(N2) pairwise-merge stages.

    Each stage merges adjacent batches by one destination bit (an LSB-first
    radix pass), so after log2(N2) stages the lanes sit in destination
    order.  The stage count is the AUT unit's per-row pipeline depth.
    """
    batches = [[lane] for lane in lanes]
    bit = 1
    while len(batches) > 1:
        merged = []
        for k in range(0, len(batches), 2):
            pair = batches[k] + batches[k + 1]
            merged.append([e for e in pair if not e[0] & bit]
                          + [e for e in pair if e[0] & bit])
        batches = merged
        bit <<= 1
    out = [0] * n2
    for dest, value in batches[0]:
        out[dest] = value
    return out


def automorphism_shuffle(p: Poly, gle: int, plan: NttPlan) -> Poly:
    """Row-by-row automorphism through the lane shuffle network.

    For each source address l0 the N2 coefficients read across memories
    share one destination address l1 = l0*gle mod N1; only their lane
    order (and negacyclic signs) changes, handled by the shuffle tree.
    """
    n = p.n
    two_n = 2 * n
    _check_gle(gle, two_n)
    plan.validate(n)
    n1, n2 = plan.n1, plan.n2
    q = p.modulus.q
    coeffs = p.coeffs
    out = [0] * n
    for l0 in range(n1):
        index = l0 * gle
        l1 = index % n1
        lanes = []
        for j in range(n2):
            t = (index + j * n1 * gle) % two_n
            # Destination-address property: every lane of this row lands at l1.
            assert t % n % n1 == l1
            value = coeffs[l0 + j * n1]
            if t >= n:
                value = (q - value) % q
            lanes.append((t % n // n1, value))
        row = _shuffle_tree(lanes, n2)
        for j in range(n2):
            out[l1 + j * n1] = row[j]
    return Poly(out, p.modulus, p.domain)


# ---------------------------------------------------------------------------
# Triadic MAS unit


class MasOp(Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    MAC = "mac"


def mas(op: MasOp, a: Poly, b: Poly, acc: Poly | None = None) -> Poly:
    """Pointwise multiply/add/subtract or multiply-and-accumulate."""
    if a.modulus.q != b.modulus.q:
        raise ModulusMismatch("operands use different moduli")
    if a.domain != b.domain:
        raise DomainMismatch("operands live in different domains")
    q = a.modulus.q
    av, bv = a.coeffs, b.coeffs
    if op == MasOp.ADD:
        out = [(x + y) % q for x, y in zip(av, bv)]
    elif op == MasOp.SUB:
        out = [(x - y) % q for x, y in zip(av, bv)]
    elif op == MasOp.MUL:
        out = [x * y % q for x, y in zip(av, bv)]
    elif op == MasOp.MAC:
        if acc is None:
            raise ValueError("MAC requires an accumulator")
        if acc.modulus.q != q:
            raise ModulusMismatch("accumulator uses a different modulus")
        if acc.domain != a.domain:
            raise DomainMismatch("accumulator lives in a different domain")
        out = [(z + x * y) % q for x, y, z in zip(av, bv, acc.coeffs)]
    else:  # pragma: no cover
        raise ValueError(f"unknown MAS op {op}")
    return Poly(out, a.modulus, a.domain)


# ---------------------------------------------------------------------------
# Serialization: (N, modulus_id, domain) header + little-endian u64 residues


def poly_to_bytes(p: Poly, modulus_id: int) -> bytes:
    head = struct.pack("<IIB", p.n, modulus_id, p.domain.value)
    return head + b"".join(struct.pack("<Q", c) for c in p.coeffs)


def poly_from_bytes(data: bytes, modulus: PrimeModulus) -> Tuple[Poly, int]:
    n, modulus_id, dom = struct.unpack_from("<IIB", data, 0)
    coeffs = list(struct.unpack_from(f"<{n}Q", data, 9))
    return Poly(coeffs, modulus, Domain(dom)), modulus_id
