"""Closed-form micro-op censuses shared by the CKKS layer and the simulator.

Both sides count the same way, so the functional library's measured counts
and the simulator's expanded instruction streams can be cross-checked for
any (level, dnum, K).  Counts are per whole routine, all limbs included.
"""

from __future__ import annotations

from typing import Dict, List

Census = Dict[str, int]


def _zero() -> Census:
    return {"INTT": 0, "NTT": 0, "MAS": 0, "AUT": 0}


def digit_sizes(level: int, k: int) -> List[int]:
    """Live limbs per key-switching digit at the given level."""
    sizes = []
    i = 0
    while i <= level:
        sizes.append(min(k, level + 1 - i))
        i += k
    return sizes


def moddown(level: int, k: int, final_add: bool = True) -> Census:
    """One ciphertext component dropped from PQ_l to Q_l."""
    c = _zero()
    c["INTT"] = k
    c["NTT"] = level + 1
    # premultiply by hat inverses, base-conversion MACs, fused (d - t)*P^-1,
    # and (optionally) the addition back into the carrier component
    c["MAS"] = k + (level + 1) * k + (level + 1) + (level + 1 if final_add else 0)
    return c


def keyswitch_full(level: int) -> Census:
    """dnum = L+1 (K = 1) key switch including both ModDowns."""
    l1 = level + 1
    c = _zero()
    c["INTT"] = l1 + 2
    c["NTT"] = l1 * (l1 + 1) + 2 * l1
    c["MAS"] = 2 * l1 * (l1 + 1) + 2 * moddown(level, 1)["MAS"]
    return c


def keyswitch_generic(level: int, dnum: int, k: int) -> Census:
    """Arbitrary-dnum key switch (digit ModUp via base conversion)."""
    sizes = digit_sizes(level, k)
    nb = level + 1 + k  # live bases of PQ_l
    c = _zero()
    c["INTT"] = (level + 1) + 2 * k
    c["NTT"] = sum(nb - s for s in sizes) + 2 * (level + 1)
    mas = 0
    for s in sizes:
        mas += s                 # hat-inverse premultiplies
        mas += s * (nb - s)      # base-conversion accumulation
    mas += 2 * len(sizes) * nb   # key multiplication, two components
    mas += 2 * (len(sizes) - 1) * nb  # digit accumulation
    md = moddown(level, k)
    mas += 2 * md["MAS"]
    c["MAS"] = mas
    return c


def rescale(level: int) -> Census:
    """Both ciphertext components, dropping base q_level."""
    c = _zero()
    c["INTT"] = 2
    c["NTT"] = 2 * level
    c["MAS"] = 2 * level
    return c


def hadd(level: int) -> Census:
    c = _zero()
    c["MAS"] = 2 * (level + 1)
    return c


def hmult(level: int) -> Census:
    c = _zero()
    c["MAS"] = 4 * (level + 1)
    return c


def rotate_perm(level: int) -> Census:
    """Functional-layer rotation: limbs pass through coefficient domain."""
    c = _zero()
    c["INTT"] = 2 * (level + 1)
    c["AUT"] = 2 * (level + 1)
    c["NTT"] = 2 * (level + 1)
    return c
