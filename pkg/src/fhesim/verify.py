"""Oracle-differential verification suites.

Each suite runs a batch of randomized cases comparing the optimized paths
against independent oracles (schoolbook negacyclic products, the direct
automorphism map, a bit-serial keystream, wide-integer CRT arithmetic)
and returns a summary with the number of elementwise comparisons made.
A deliberate-fault mode perturbs the shuffle addressing so the harness
itself can be shown to catch regressions.
"""

from __future__ import annotations

import random
from contextlib import contextmanager
from typing import Dict, List, Optional

import numpy as np

from . import opcount, polykernel
from .ckks import CkksContext, count_ops, ksk_to_bytes
from .modarith import PrimeModulus, TwiddleSource, find_ntt_prime, make_basis
from .polykernel import (Domain, MasOp, NttPlan, Poly, automorphism_oracle,
                         automorphism_shuffle, intt_reference, mas, ntt_hybrid,
                         ntt_reference)
from .trivium import trivium_stream


# ---------------------------------------------------------------------------
# Independent oracles


def schoolbook_negacyclic(a: List[int], b: List[int], q: int) -> List[int]:
    """O(N^2) product mod x^N + 1; the ground truth for NTT multiplication."""
    n = len(a)
    out = [0] * n
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            k = i + j
            v = x * y
            if k >= n:
                out[k - n] = (out[k - n] - v) % q
            else:
                out[k] = (out[k] + v) % q
    return out


def trivium_bit_serial(seed: int, count: int) -> List[int]:
    """Reference keystream, one bit per step, packed little-endian in time."""
    s = [0] * 289  # 1-indexed registers
    for i in range(64):
        bit = seed >> i & 1
        s[1 + i] = bit
        s[94 + i] = bit
    s[286] = s[287] = s[288] = 1
    words: List[int] = []
    bits: List[int] = []
    for step in range(1152 + count * 64):
        t1 = s[66] ^ s[93]
        t2 = s[162] ^ s[177]
        t3 = s[243] ^ s[288]
        z = t1 ^ t2 ^ t3
        t1 ^= (s[91] & s[92]) ^ s[171]
        t2 ^= (s[175] & s[176]) ^ s[264]
        t3 ^= (s[286] & s[287]) ^ s[69]
        s[2:94] = s[1:93]
        s[1] = t3
        s[95:178] = s[94:177]
        s[94] = t1
        s[179:289] = s[178:288]
        s[178] = t2
        if step >= 1152:
            bits.append(z)
            if len(bits) == 64:
                words.append(sum(b << i for i, b in enumerate(bits)))
                bits = []
    return words


# ---------------------------------------------------------------------------
# Fault injection (mutation-testing hook for the harness itself)


@contextmanager
def inject_fault(name: Optional[str]):
    if name is None:
        yield
        return
    if name == "shuffle-offby1":
        original = polykernel._shuffle_tree

        def faulty(lanes, n2):
            out = original(lanes, n2)
            return out[1:] + out[:1] if n2 > 1 else out

        polykernel._shuffle_tree = faulty
        try:
            yield
        finally:
            polykernel._shuffle_tree = original
    else:
        raise ValueError(f"unknown fault {name!r}")


# ---------------------------------------------------------------------------
# Suites


class SuiteResult:
    def __init__(self, name: str):
        self.name = name
        self.cases = 0
        self.comparisons = 0
        self.failures: List[str] = []

    def check(self, label: str, ok: bool, comparisons: int = 1) -> None:
        self.cases += 1
        self.comparisons += comparisons
        if not ok:
            self.failures.append(label)

    def to_dict(self) -> dict:
        return {"suite": self.name, "cases": self.cases,
                "comparisons": self.comparisons, "failures": self.failures}


def _rand_poly(rng: random.Random, m: PrimeModulus, n: int) -> Poly:
    return Poly([rng.randrange(m.q) for _ in range(n)], m, Domain.COEFF)


def suite_kernels(size: str = "toy", seed: int = 0,
                  fault: Optional[str] = None) -> SuiteResult:
    res = SuiteResult("kernels")
    rng = random.Random(seed)
    if size == "toy":
        n, reps, gle_all = 256, 20, True
        splits = (1, 4, 16)
    else:
        n, reps, gle_all = 1024, 30, False
        splits = (1, 4, 16, 64)
    m = find_ntt_prime(_suite_prime_bits(n), 2 * n)

    with inject_fault(fault):
        # hybrid NTT vs reference, all requested splits, both twiddle modes
        for n2 in splits:
            for mode in (TwiddleSource.STORED, TwiddleSource.ON_THE_FLY):
                plan = NttPlan(n // n2, n2, mode)
                for _ in range(reps):
                    p = _rand_poly(rng, m, n)
                    res.check(f"hybrid {plan.n1}x{plan.n2} {mode}",
                              ntt_hybrid(p, plan).coeffs == ntt_reference(p).coeffs,
                              comparisons=n)

        # roundtrip and pointwise-product oracle
        for _ in range(reps):
            p = _rand_poly(rng, m, n)
            res.check("ntt roundtrip",
                      intt_reference(ntt_reference(p)).coeffs == p.coeffs,
                      comparisons=n)
        for _ in range(5):
            a = _rand_poly(rng, m, n)
            b = _rand_poly(rng, m, n)
            prod = mas(MasOp.MUL, ntt_reference(a), ntt_reference(b))
            res.check("negacyclic product",
                      intt_reference(prod).coeffs ==
                      schoolbook_negacyclic(a.coeffs, b.coeffs, m.q),
                      comparisons=n)

        # automorphism shuffle vs direct map
        plan = NttPlan(n // 16, 16)
        gles = (range(1, 2 * n, 2) if gle_all
                else [rng.randrange(1, 2 * n) | 1 for _ in range(64)])
        for gle in gles:
            p = _rand_poly(rng, m, n)
            res.check(f"automorphism gle={gle}",
                      automorphism_shuffle(p, gle, plan).coeffs ==
                      automorphism_oracle(p, gle).coeffs,
                      comparisons=n)
        # composition law
        for _ in range(10):
            g1 = rng.randrange(1, 2 * n) | 1
            g2 = rng.randrange(1, 2 * n) | 1
            p = _rand_poly(rng, m, n)
            lhs = automorphism_oracle(automorphism_oracle(p, g2), g1)
            rhs = automorphism_oracle(p, g1 * g2 % (2 * n))
            res.check("automorphism composition", lhs.coeffs == rhs.coeffs,
                      comparisons=n)

        # twiddle streams
        stored = TwiddleSource(m, TwiddleSource.STORED)
        otf = TwiddleSource(m, TwiddleSource.ON_THE_FLY)
        res.check("twiddle stored == on-the-fly",
                  all(stored.power(e) == otf.power(e) for e in range(2 * n)),
                  comparisons=2 * n)

        # keystream vs bit-serial oracle
        words = 200 if size == "toy" else 1000
        for s in range(3):
            sd = rng.getrandbits(64)
            res.check(f"trivium seed={sd:#x}",
                      trivium_stream(sd, words) == trivium_bit_serial(sd, words),
                      comparisons=words)
    return res


def _suite_prime_bits(n: int) -> int:
    """Smallest workable prime size for ring degree n in the suites."""
    return max(14, (2 * n).bit_length() + 2)


def suite_ckks(size: str = "toy", seed: int = 0) -> SuiteResult:
    res = SuiteResult("ckks")
    if size == "toy":
        basis = make_basis(n=1024, levels=4, dnum=5, bits=40, first_bits=45, p_bits=45)
        basis_d = make_basis(n=1024, levels=4, dnum=2, bits=40, first_bits=45, p_bits=45)
    else:
        basis = make_basis(n=4096, levels=8, dnum=9, bits=40, first_bits=45, p_bits=45)
        basis_d = make_basis(n=4096, levels=8, dnum=3, bits=40, first_bits=45, p_bits=45)
    rng = np.random.default_rng(seed)
    levels = basis.l_max

    ctx = CkksContext(basis)
    sk, keys = ctx.keygen(seed=seed + 1, rotations=(1,))
    a = np.linspace(0.1, 1.0, ctx.slots)
    b = np.linspace(1.0, 2.0, ctx.slots)
    cta = ctx.encrypt(ctx.encode(a, levels), sk, rng)
    ctb = ctx.encrypt(ctx.encode(b, levels), sk, rng)

    dec = ctx.decode(ctx.decrypt(cta, sk), cta.scale)
    res.check("enc/dec roundtrip", float(np.max(np.abs(dec - a))) < 1e-6,
              comparisons=ctx.slots)

    csum = ctx.add(cta, ctb)
    dec = ctx.decode(ctx.decrypt(csum, sk), csum.scale)
    res.check("hadd", float(np.max(np.abs(dec - (a + b)))) < 1e-6,
              comparisons=ctx.slots)

    with count_ops() as census:
        d = ctx.mult(cta, ctb)
        ks_full = ctx.keyswitch_full_dnum(d, keys.relin)
    want = opcount.keyswitch_full(levels)
    want_mas = want["MAS"] + opcount.hmult(levels)["MAS"]
    res.check("census matches closed form",
              census["INTT"] == want["INTT"] and census["NTT"] == want["NTT"]
              and census["MAS"] == want_mas, comparisons=3)

    rs = ctx.rescale(ks_full)
    dec = ctx.decode(ctx.decrypt(rs, sk), rs.scale)
    rel = float(np.max(np.abs(dec - a * b) / np.maximum(np.abs(a * b), 1e-9)))
    res.check("mult/keyswitch/rescale", rel < 1e-4, comparisons=ctx.slots)

    ks_gen = ctx.keyswitch_generic(d, keys.relin)
    same = all(f.coeffs == g.coeffs
               for fc, gc in ((ks_full.c0, ks_gen.c0), (ks_full.c1, ks_gen.c1))
               for f, g in zip(fc.limbs, gc.limbs))
    res.check("generic dnum degeneration bit-exact", same,
              comparisons=2 * (levels + 1) * ctx.n)

    rot = ctx.rotate(cta, 1, keys)
    dec = ctx.decode(ctx.decrypt(rot, sk), rot.scale)
    want_slots = np.roll(a, -1)
    rel = float(np.max(np.abs(dec - want_slots) / np.maximum(np.abs(want_slots), 1e-9)))
    res.check("rotation pipeline", rel < 1e-4, comparisons=ctx.slots)

    # seeded key half: re-expansion determinism and storage accounting
    digit = keys.relin.digits[0]
    limb0 = ctx.expand_ksk1_limb(digit.ksk1_seeds[0], ctx.all_bases()[0])
    limb1 = ctx.expand_ksk1_limb(digit.ksk1_seeds[0], ctx.all_bases()[0])
    res.check("ksk1 re-expansion deterministic", limb0.coeffs == limb1.coeffs,
              comparisons=ctx.n)
    for j, dg in enumerate(keys.relin.digits):
        for t in range(len(dg.ksk0)):
            ctx.ksk1_limb(keys.relin, j, t)
    seeded = len(ksk_to_bytes(keys.relin, seeded=True))
    expanded = len(ksk_to_bytes(keys.relin, seeded=False))
    ratio = seeded / expanded
    res.check("seeded key is half the footprint", 0.5 <= ratio < 0.52,
              comparisons=1)

    # generic dnum end to end on the second basis
    ctx_d = CkksContext(basis_d)
    sk_d, keys_d = ctx_d.keygen(seed=seed + 2)
    ca = ctx_d.encrypt(ctx_d.encode(a[: ctx_d.slots], levels), sk_d, rng)
    cb = ctx_d.encrypt(ctx_d.encode(b[: ctx_d.slots], levels), sk_d, rng)
    with count_ops() as census_d:
        ksd = ctx_d.keyswitch_generic(ctx_d.mult(ca, cb), keys_d.relin)
    rsd = ctx_d.rescale(ksd)
    dec = ctx_d.decode(ctx_d.decrypt(rsd, sk_d), rsd.scale)
    rel = float(np.max(np.abs(dec - a * b) / np.maximum(np.abs(a * b), 1e-9)))
    res.check("dnum<L+1 pipeline", rel < 1e-4, comparisons=ctx_d.slots)
    want_d = opcount.keyswitch_generic(levels, basis_d.dnum, basis_d.k)
    res.check("generic census matches closed form",
              census_d["INTT"] == want_d["INTT"] and census_d["NTT"] == want_d["NTT"]
              and census_d["MAS"] == want_d["MAS"] + opcount.hmult(levels)["MAS"],
              comparisons=3)
    return res


def run_verify(scope: str = "all", size: str = "toy", seed: int = 0,
               fault: Optional[str] = None) -> Dict:
    suites: List[SuiteResult] = []
    if scope in ("kernels", "all"):
        suites.append(suite_kernels(size, seed, fault=fault))
    if scope in ("ckks", "all"):
        suites.append(suite_ckks(size, seed))
    return {
        "scope": scope,
        "size": size,
        "seed": seed,
        "fault": fault,
        "suites": [s.to_dict() for s in suites],
        "cases": sum(s.cases for s in suites),
        "comparisons": sum(s.comparisons for s in suites),
        "failures": [f"{s.name}: {f}" for s in suites for f in s.failures],
    }
