"""Trivium keystream generator, 64 bits per round.

The PRNG that regenerates the seed-expandable key-switching key half.  It
keeps the standard 288-bit Trivium register bank but is keyed by a single
64-bit seed: the seed is loaded into both the key and IV slots (the
remaining slots are zero except the customary trailing ones).  Because the
shortest tap distance exceeds 64, sixty-four steps can be evaluated at
once with word operations; initialization therefore takes 18 such rounds
(the usual 4*288 = 1152 warm-up clocks) and afterwards every round yields
one 64-bit word.

Register layout: each shift register is held as an int whose bit p stores
state bit s_(len-p), so new bits enter at the top and every tap is a
contiguous little-endian 64-bit window.  Bit t of an output word is the
keystream bit produced at step t of its round (earliest bit = LSB).
"""

from __future__ import annotations

from typing import Iterator, List

_M64 = (1 << 64) - 1

INIT_ROUNDS = 18
WORD_BITS = 64


class TriviumState:
    """288-bit Trivium stepped 64 clocks at a time."""

    def __init__(self, seed: int):
        if not 0 <= seed < 1 << 64:
            raise ValueError("seed must be a 64-bit value")
        # A: s1..s93, B: s94..s177, C: s178..s288 (bit p of A = s_(93-p), etc.)
        self.a = 0
        self.b = 0
        self.c = 0b111  # s286, s287, s288
        for i in range(64):
            bit = seed >> i & 1
            self.a |= bit << (92 - i)       # key slots s1..s64
            self.b |= bit << (83 - i)       # IV slots s94..s157
        for _ in range(INIT_ROUNDS):
            self._round()

    def _round(self) -> int:
        a, b, c = self.a, self.b, self.c
        t1 = (a >> 27 ^ a) & _M64           # s66 ^ s93
        t2 = (b >> 15 ^ b) & _M64           # s162 ^ s177
        t3 = (c >> 45 ^ c) & _M64           # s243 ^ s288
        z = t1 ^ t2 ^ t3
        f1 = (t1 ^ (a >> 2 & a >> 1) ^ b >> 6) & _M64   # + s91*s92 + s171
        f2 = (t2 ^ (b >> 2 & b >> 1) ^ c >> 24) & _M64  # + s175*s176 + s264
        f3 = (t3 ^ (c >> 2 & c >> 1) ^ a >> 24) & _M64  # + s286*s287 + s69
        self.a = (a >> 64) | (f3 << 29)     # 93 - 64
        self.b = (b >> 64) | (f1 << 20)     # 84 - 64
        self.c = (c >> 64) | (f2 << 47)     # 111 - 64
        return z

    def next_word(self) -> int:
        return self._round()

    def words(self) -> Iterator[int]:
        while True:
            yield self._round()


def trivium_stream(seed: int, count: int) -> List[int]:
    """First `count` 64-bit keystream words for the given seed."""
    state = TriviumState(seed)
    return [state.next_word() for _ in range(count)]


class ResidueSampler:
    """Uniform residues mod q drawn from the keystream.

    Each draw masks one keystream word down to bitlen(q) bits and rejects
    values >= q, so the result is exactly uniform; for a w-bit modulus the
    masked candidate is below 2q and at most every second word is wasted
    (about two words per residue in the worst case).
    """

    def __init__(self, seed: int, q: int):
        self._state = TriviumState(seed)
        self.q = q
        self._mask = (1 << q.bit_length()) - 1

    def next_residue(self) -> int:
        while True:
            cand = self._state.next_word() & self._mask
            if cand < self.q:
                return cand

    def poly(self, n: int) -> List[int]:
        return [self.next_residue() for _ in range(n)]
