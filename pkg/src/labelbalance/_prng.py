"""Counter-based pseudorandom stream used for all seeded behavior.

Every random choice the package makes (synthetic datasets, index
shuffles) is drawn from this one scheme so that fixtures are
bit-reproducible across runs, platforms, and reimplementations in other
languages.  The scheme is the splitmix64 output function applied to a
counter:

    state_i = (seed + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = state_i
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    out_i = z ^ (z >> 31)

``i`` starts at 0 for the first draw.  Uniform doubles in [0, 1) are
``(out_i >> 11) * 2**-53``, which is exact in IEEE-754 binary64.
"""

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


def mix64(state: int) -> int:
    """splitmix64 finalizer for a 64-bit state."""
    z = state & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class CounterStream:
    """Sequential view of the counter-based stream for one seed."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def next_double(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) via the modulo method.

        The modulo bias is below 2**-32 for any bound this package uses;
        the method is chosen for being trivial to reproduce exactly.
        """
        return self.next_uint64() % bound
