import math
import random
from functools import reduce

import numpy as np
import pytest

from fhesim import opcount
from fhesim.ckks import (Ciphertext, CkksContext, ExtCiphertext, LevelExhausted,
                         LevelMismatch, MissingRotationKey, RnsPoly, ScaleMismatch,
                         SlotOverflow, ciphertext_to_bytes, count_ops, derive_seed,
                         ksk_to_bytes)
from fhesim.modarith import make_basis
from fhesim.polykernel import Domain, Poly, intt_reference, ntt_reference

BASIS = make_basis(n=1024, levels=4, dnum=5, bits=40, first_bits=45, p_bits=45)
BASIS3 = make_basis(n=1024, levels=4, dnum=2, bits=40, first_bits=45, p_bits=45)


@pytest.fixture(scope="module")
def ctx():
    return CkksContext(BASIS)


@pytest.fixture(scope="module")
def keyed(ctx):
    sk, keys = ctx.keygen(seed=123, rotations=(1, 2))
    return sk, keys


@pytest.fixture(scope="module")
def ctx3():
    return CkksContext(BASIS3)


@pytest.fixture(scope="module")
def keyed3(ctx3):
    sk, keys = ctx3.keygen(seed=321, rotations=(1,))
    return sk, keys


def rng():
    return np.random.default_rng(77)


def slots_vec(ctx, kind="lin"):
    if kind == "lin":
        return np.linspace(0.1, 1.0, ctx.slots)
    return np.linspace(1.0, 2.0, ctx.slots)


def rel_err(got, want):
    return float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-9)))


def test_encode_decode_roundtrip(ctx):
    v = np.array([0.5 + 0.25j, -1.0, 2.0, 3.14] + [0.0] * (ctx.slots - 4))
    pt = ctx.encode(v, level=BASIS.l_max)
    back = ctx.decode(pt, ctx.delta)
    # relative to the scale, the roundtrip error stays below 2^-20
    assert float(np.max(np.abs(back - v))) < 2 ** -20


def test_encode_zero_vector_is_zero_polynomial(ctx):
    pt = ctx.encode(np.zeros(ctx.slots), level=1)
    assert all(c == 0 for limb in pt.limbs for c in limb.coeffs)


def test_encode_slot_overflow(ctx):
    with pytest.raises(SlotOverflow):
        ctx.encode(np.zeros(ctx.slots + 1), level=1)


def test_encrypt_decrypt(ctx, keyed):
    sk, _ = keyed
    v = slots_vec(ctx)
    ct = ctx.encrypt(ctx.encode(v, BASIS.l_max), sk, rng())
    out = ctx.decode(ctx.decrypt(ct, sk), ct.scale)
    assert rel_err(out, v) < 1e-6


def test_add_and_identities(ctx, keyed):
    sk, _ = keyed
    v = slots_vec(ctx)
    ct = ctx.encrypt(ctx.encode(v, BASIS.l_max), sk, rng())
    zero = ctx.encrypt(ctx.encode(np.zeros(ctx.slots), BASIS.l_max), sk, rng())
    out = ctx.decode(ctx.decrypt(ctx.add(ct, zero), sk), ct.scale)
    assert rel_err(out, v) < 1e-6
    out2 = ctx.decode(ctx.decrypt(ctx.add(ct, ct), sk), ct.scale)
    assert rel_err(out2, 2 * v) < 1e-6


def test_add_level_and_scale_checks(ctx, keyed):
    sk, _ = keyed
    v = slots_vec(ctx)
    a = ctx.encrypt(ctx.encode(v, BASIS.l_max), sk, rng())
    b = ctx.encrypt(ctx.encode(v, BASIS.l_max - 1), sk, rng())
    with pytest.raises(LevelMismatch):
        ctx.add(a, b)
    c = ctx.encrypt(ctx.encode(v, BASIS.l_max), sk, rng())
    c.scale *= 2
    with pytest.raises(ScaleMismatch):
        ctx.add(a, c)


def test_mult_cross_term_symmetry_and_zero(ctx, keyed):
    sk, _ = keyed
    v = slots_vec(ctx)
    a = ctx.encrypt(ctx.encode(v, BASIS.l_max), sk, rng())
    b = ctx.encrypt(ctx.encode(slots_vec(ctx, "b"), BASIS.l_max), sk, rng())
    d_ab = ctx.mult(a, b)
    d_ba = ctx.mult(b, a)
    assert all(x.coeffs == y.coeffs for x, y in zip(d_ab.d1.limbs, d_ba.d1.limbs))
    # enc(0) * ct decrypts (with 1, s, s^2) to about zero
    zero = ctx.encrypt(ctx.encode(np.zeros(ctx.slots), BASIS.l_max), sk, rng())
    d = ctx.mult(zero, a)
    out = ctx.decode(ctx.decrypt_triple(d, sk), d.scale)
    assert float(np.max(np.abs(out))) < 1e-4


def test_mult_keyswitch_rescale_pipeline(ctx, keyed):
    sk, keys = keyed
    a = slots_vec(ctx)
    b = slots_vec(ctx, "b")
    ca = ctx.encrypt(ctx.encode(a, BASIS.l_max), sk, rng())
    cb = ctx.encrypt(ctx.encode(b, BASIS.l_max), sk, rng())
    ks = ctx.keyswitch_full_dnum(ctx.mult(ca, cb), keys.relin)
    rs = ctx.rescale(ks)
    assert rs.level == BASIS.l_max - 1
    assert math.isclose(rs.scale, ks.scale / BASIS.q_list[BASIS.l_max].q)
    out = ctx.decode(ctx.decrypt(rs, sk), rs.scale)
    assert rel_err(out, a * b) < 1e-4


def test_keyswitch_census_matches_closed_form(ctx, keyed):
    sk, keys = keyed
    a = ctx.encrypt(ctx.encode(slots_vec(ctx), BASIS.l_max), sk, rng())
    b = ctx.encrypt(ctx.encode(slots_vec(ctx, "b"), BASIS.l_max), sk, rng())
    d = ctx.mult(a, b)
    with count_ops() as census:
        ctx.keyswitch_full_dnum(d, keys.relin)
    want = opcount.keyswitch_full(BASIS.l_max)
    assert census["INTT"] == want["INTT"]
    assert census["NTT"] == want["NTT"]
    assert census["MAS"] == want["MAS"]


def test_generic_degenerates_bit_exactly(ctx, keyed):
    sk, keys = keyed
    a = ctx.encrypt(ctx.encode(slots_vec(ctx), BASIS.l_max), sk, rng())
    b = ctx.encrypt(ctx.encode(slots_vec(ctx, "b"), BASIS.l_max), sk, rng())
    d = ctx.mult(a, b)
    full = ctx.keyswitch_full_dnum(d, keys.relin)
    gen = ctx.keyswitch_generic(d, keys.relin)
    for fc, gc in ((full.c0, gen.c0), (full.c1, gen.c1)):
        for f, g in zip(fc.limbs, gc.limbs):
            assert f.coeffs == g.coeffs


def test_generic_dnum_pipeline_and_census(ctx3, keyed3):
    sk, keys = keyed3
    a = slots_vec(ctx3)
    b = slots_vec(ctx3, "b")
    ca = ctx3.encrypt(ctx3.encode(a, BASIS3.l_max), sk, rng())
    cb = ctx3.encrypt(ctx3.encode(b, BASIS3.l_max), sk, rng())
    with count_ops() as census:
        d = ctx3.mult(ca, cb)
        ks = ctx3.keyswitch_generic(d, keys.relin)
    rs = ctx3.rescale(ks)
    out = ctx3.decode(ctx3.decrypt(rs, sk), rs.scale)
    assert rel_err(out, a * b) < 1e-4
    want = opcount.keyswitch_generic(BASIS3.l_max, BASIS3.dnum, BASIS3.k)
    assert census["INTT"] == want["INTT"]
    assert census["NTT"] == want["NTT"]
    assert census["MAS"] == want["MAS"] + opcount.hmult(BASIS3.l_max)["MAS"]


def test_rotation_pipeline_shifts_slots(ctx, keyed):
    sk, keys = keyed
    v = np.arange(1, ctx.slots + 1, dtype=float)
    ct = ctx.encrypt(ctx.encode(v, BASIS.l_max), sk, rng())
    for rot in (1, 2):
        out = ctx.decode(ctx.decrypt(ctx.rotate(ct, rot, keys), sk), ct.scale)
        assert rel_err(out, np.roll(v, -rot)) < 1e-4


def test_rotate_perm_composition(ctx, keyed):
    sk, _ = keyed
    v = slots_vec(ctx)
    ct = ctx.encrypt(ctx.encode(v, BASIS.l_max), sk, rng())
    once = ctx.rotate_perm(ctx.rotate_perm(ct, 1), 2)
    combined = ctx.rotate_perm(ct, 3)
    for a, b in zip(once.c0.limbs + once.c1.limbs,
                    combined.c0.limbs + combined.c1.limbs):
        assert a.coeffs == b.coeffs


def test_missing_rotation_key(ctx, keyed):
    sk, keys = keyed
    ct = ctx.encrypt(ctx.encode(slots_vec(ctx), BASIS.l_max), sk, rng())
    with pytest.raises(MissingRotationKey):
        ctx.rotate(ct, 5, keys)


def test_identity_keyswitch_preserves_plaintext(ctx, keyed):
    # switching from s to s with a key for s itself
    sk, _ = keyed
    v = slots_vec(ctx)
    ct = ctx.encrypt(ctx.encode(v, BASIS.l_max), sk, rng())
    ident = ctx.make_keyswitch_key(sk, sk.ntt_limbs, derive_seed(9, 9),
                                   np.random.default_rng(5))
    zero = RnsPoly([Poly([0] * ctx.n, p.modulus, Domain.NTT)
                    for p in ct.c1.limbs], ct.level)
    d = ExtCiphertext(ct.c0, zero, ct.c1, ct.level, ct.scale)
    out_ct = ctx.keyswitch_full_dnum(d, ident)
    out = ctx.decode(ctx.decrypt(out_ct, sk), out_ct.scale)
    assert rel_err(out, v) < 1e-4


def test_keygen_verification_identity(ctx, keyed):
    # ksk0 + ksk1*s - gadget*s' must be the same small error in every base
    sk, keys = keyed
    key = keys.relin
    s2 = [Poly([a * a % p.modulus.q for a in p.coeffs], p.modulus, Domain.NTT)
          for p in sk.ntt_limbs]
    for j in (0, len(key.digits) - 1):
        gadget = ctx._gadget(j)
        err_polys = []
        for t, m in enumerate(ctx.all_bases()):
            a = ctx.ksk1_limb(key, j, t)
            q = m.q
            coeffs = [
                (k0 + av * sv - g * pv) % q
                for k0, av, sv, pv in zip(key.digits[j].ksk0[t].coeffs, a.coeffs,
                                          sk.ntt_limbs[t].coeffs, s2[t].coeffs)
                for g in (gadget[t],)
            ]
            e = intt_reference(Poly(coeffs, m, Domain.NTT))
            centered = [c if c <= q // 2 else c - q for c in e.coeffs]
            assert max(abs(c) for c in centered) < 64  # small gaussian error
            err_polys.append(centered)
        for other in err_polys[1:]:
            assert other == err_polys[0]


def test_ksk1_seed_expansion_referentially_transparent(ctx, keyed):
    sk, keys = keyed
    key = keys.relin
    limb = ctx.ksk1_limb(key, 0, 0)
    # drop the cached limb and regenerate mid-computation
    key.digits[0]._ksk1[0] = None
    again = ctx.ksk1_limb(key, 0, 0)
    assert limb.coeffs == again.coeffs


def test_seeded_key_storage_ratio(ctx, keyed):
    _, keys = keyed
    key = keys.relin
    for j, dg in enumerate(key.digits):
        for t in range(len(dg.ksk0)):
            ctx.ksk1_limb(key, j, t)
    seeded = len(ksk_to_bytes(key, seeded=True))
    expanded = len(ksk_to_bytes(key, seeded=False))
    assert 0.5 <= seeded / expanded < 0.52


def test_rescale_level_exhausted(ctx, keyed):
    sk, _ = keyed
    ct = ctx.encrypt(ctx.encode(slots_vec(ctx), 0), sk, rng())
    with pytest.raises(LevelExhausted):
        ctx.rescale(ct)


def test_rescale_composes(ctx, keyed):
    # encode aligned with the two moduli to be dropped, rescale twice
    sk, _ = keyed
    v = slots_vec(ctx)
    lmax = BASIS.l_max
    scale = ctx.delta * BASIS.q_list[lmax].q * BASIS.q_list[lmax - 1].q
    ct = ctx.encrypt(ctx.encode(v, lmax, scale=scale), sk, rng())
    once = ctx.rescale(ctx.rescale(ct))
    assert once.level == lmax - 2
    assert math.isclose(once.scale, ctx.delta)
    out = ctx.decode(ctx.decrypt(once, sk), once.scale)
    assert rel_err(out, v) < 1e-3


def test_rescale_of_product_aligns_scale(ctx, keyed):
    sk, _ = keyed
    v = slots_vec(ctx)
    pt = ctx.encode(v, BASIS.l_max, scale=ctx.delta * BASIS.q_list[BASIS.l_max].q)
    rs = ctx.rescale(ctx.encrypt(pt, sk, rng()))
    out = ctx.decode(ctx.decrypt(rs, sk), rs.scale)
    assert math.isclose(rs.scale, ctx.delta)
    assert rel_err(out, v) < 1e-4


def test_moddown_exact_on_divisible_input(ctx):
    level = BASIS.l_max
    live = ctx.live_bases(level)
    p_prod = BASIS.p_product
    vals = [v * p_prod for v in range(ctx.n)]
    limbs = [ntt_reference(Poly([v % m.q for v in vals], m, Domain.COEFF))
             for m in live]
    down = ctx.moddown(RnsPoly(limbs, level, extended=True))
    out = intt_reference(down.limbs[0])
    q0 = BASIS.q_list[0].q
    assert out.coeffs == [v % q0 for v in range(ctx.n)]


def test_moddown_crt_oracle(ctx):
    level = BASIS.l_max
    live = ctx.live_bases(level)
    p_prod = BASIS.p_product
    rs = np.random.default_rng(3)
    vals = [int(x) for x in rs.integers(0, 1 << 62, ctx.n)]
    limbs = [ntt_reference(Poly([v % m.q for v in vals], m, Domain.COEFF))
             for m in live]
    down = ctx.moddown(RnsPoly(limbs, level, extended=True))
    out = [intt_reference(p).coeffs for p in down.limbs]
    mods = [m.q for m in BASIS.q_list[: level + 1]]
    big_q = reduce(lambda a, b: a * b, mods)
    recon = [(big_q // m) * pow(big_q // m, -1, m) for m in mods]
    for i in range(0, ctx.n, 61):
        got = sum(out[t][i] * recon[t] for t in range(level + 1)) % big_q
        if got > big_q // 2:
            got -= big_q
        want = (vals[i] - vals[i] % p_prod) // p_prod
        assert abs(got - want) <= BASIS.k


def test_bconv_zero_and_exact_small(ctx):
    src = [BASIS.p_list[0]]
    targets = list(BASIS.q_list[:2])
    zero = [Poly([0] * ctx.n, src[0], Domain.COEFF)]
    out = ctx.bconv_routine(zero, targets, emit_ntt=False)
    assert all(c == 0 for p in out for c in p.coeffs)
    small = [Poly([i % 1000 for i in range(ctx.n)], src[0], Domain.COEFF)]
    out = ctx.bconv_routine(small, targets, emit_ntt=False)
    for p in out:
        assert p.coeffs == [i % 1000 % p.modulus.q for i in range(ctx.n)]


def test_bconv_slack_is_multiple_of_source_product(ctx3):
    # fast conversion P -> Q_l returns y + alpha*P with 0 <= alpha < K,
    # verified against a wide-integer CRT reconstruction
    rngl = random.Random(5)
    basis = BASIS3
    src = list(basis.p_list)
    p_prod = basis.p_product
    targets = list(basis.q_list)
    vals = [rngl.randrange(p_prod) for _ in range(ctx3.n)]
    limbs = [Poly([v % m.q for v in vals], m, Domain.COEFF) for m in src]
    out = ctx3.bconv_routine(limbs, targets, emit_ntt=False)
    mods = [m.q for m in targets]
    big_q = reduce(lambda a, b: a * b, mods)
    recon = [(big_q // m) * pow(big_q // m, -1, m) for m in mods]
    for i in range(0, ctx3.n, 113):
        got = sum(out[t].coeffs[i] * recon[t] for t in range(len(mods))) % big_q
        diff = got - vals[i]
        assert diff % p_prod == 0
        assert 0 <= diff // p_prod < basis.k


def test_ciphertext_serialization_shape(ctx, keyed):
    sk, _ = keyed
    ct = ctx.encrypt(ctx.encode(slots_vec(ctx), 2), sk, rng())
    blob = ciphertext_to_bytes(ct, ctx.n, BASIS.dnum)
    # header + 2 components x 3 limbs x (9-byte poly header + residues)
    assert len(blob) == 20 + 2 * 3 * (9 + 8 * ctx.n)


def test_census_context_nesting(ctx, keyed):
    sk, keys = keyed
    ct = ctx.encrypt(ctx.encode(slots_vec(ctx), BASIS.l_max), sk, rng())
    with count_ops() as outer:
        ctx.rescale(ct)
        with count_ops() as inner:
            ctx.rescale(ct)
    want = opcount.rescale(BASIS.l_max)
    assert inner["INTT"] == want["INTT"] and inner["NTT"] == want["NTT"]
    assert outer["NTT"] == 2 * want["NTT"]
