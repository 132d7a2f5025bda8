"""Seeded randomness with hash-derived sub-streams.

The generator is splitmix64, a 64-bit counter-based PRNG with a public
reference implementation. It is tiny, fast, and produces identical output on
any host and Python build, which is what the determinism guarantees of this
package rest on (python's ``random`` would also be stable, but splitmix64
keeps the whole stream definition inside the repo and portable to other
languages).

Sub-streams are derived by hashing a tuple of string tags with blake2b, so
adding a new consumer of randomness never perturbs the draws of existing
ones.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def derive_seed(*parts: object) -> int:
    """Derive a 64-bit sub-stream seed from arbitrary string-able parts."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class Stream:
    """A splitmix64 stream plus the sampling helpers the generators need."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._state = self.seed

    def substream(self, *tags: object) -> "Stream":
        """Independent child stream; same tags always give the same child."""
        return Stream(derive_seed(self.seed, *tags))

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0**-53)

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow() requires n > 0")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def randint(self, a: int, b: int) -> int:
        """Integer in [a, b], both ends inclusive."""
        if b < a:
            raise ValueError("randint() requires a <= b")
        return a + self.randbelow(b - a + 1)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()

    def choice(self, seq):
        if not seq:
            raise ValueError("choice() on empty sequence")
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, seq, k: int) -> list:
        """k distinct elements, order given by a partial shuffle."""
        if k < 0 or k > len(seq):
            raise ValueError(f"sample() of {k} from {len(seq)} items")
        indices = list(range(len(seq)))
        picked = []
        for i in range(k):
            j = self.randint(i, len(indices) - 1)
            indices[i], indices[j] = indices[j], indices[i]
            picked.append(seq[indices[i]])
        return picked
