"""Color arithmetic: prime selection, pair/triple encodings and the additive-group
update rules. Everything here is a pure function of its arguments."""
from __future__ import annotations

from dataclasses import dataclass
import math
from math import isqrt
from typing import Iterable


class ColorError(ValueError):
    pass


def is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x % 2 == 0:
        return x == 2
    for d in range(3, isqrt(x) + 1, 2):
        if x % d == 0:
            return False
    return True


def select_prime(lower: int) -> int:
    """Smallest prime >= lower (Bertrand: always < 2 * lower)."""
    if lower < 2:
        raise ColorError("select_prime needs lower >= 2")
    q = lower
    while not is_prime(q):
        q += 1
    return q


def ceil_sqrt(k: int) -> int:
    r = isqrt(k)
    return r if r * r == k else r + 1


def ag_modulus(delta: int, palette: int) -> int:
    """Prime q with q > 2*delta and q*q >= palette."""
    return select_prime(max(2 * delta + 1, ceil_sqrt(max(palette, 1)), 2))


@dataclass(frozen=True, slots=True)
class ColorPair:
    a: int
    b: int
    q: int

    def __post_init__(self) -> None:
        if not (0 <= self.a < self.q and 0 <= self.b < self.q):
            raise ColorError(f"pair <{self.a},{self.b}> out of range for q={self.q}")

    @property
    def final(self) -> bool:
        return self.a == 0

    def __str__(self) -> str:
        return f"<{self.a},{self.b}>"


@dataclass(frozen=True, slots=True)
class ColorTriple:
    c: int
    b: int
    a: int
    p: int

    def __post_init__(self) -> None:
        if not all(0 <= x < self.p for x in (self.c, self.b, self.a)):
            raise ColorError(f"triple <{self.c},{self.b},{self.a}> out of range for p={self.p}")

    @property
    def final(self) -> bool:
        return self.c == 0 and self.b == 0


def encode_pair(i: int, q: int) -> ColorPair:
    if not 0 <= i < q * q:
        raise ColorError(f"color {i} does not fit in q^2 = {q * q}")
    return ColorPair(i // q, i % q, q)


def decode_pair(pair: ColorPair) -> int:
    return pair.a * pair.q + pair.b


def encode_triple(i: int, p: int) -> ColorTriple:
    if not 0 <= i < p ** 3:
        raise ColorError(f"color {i} does not fit in p^3 = {p ** 3}")
    return ColorTriple(i // (p * p), (i // p) % p, i % p, p)


def decode_triple(t: ColorTriple) -> int:
    return (t.c * t.p + t.b) * t.p + t.a


def has_conflict(mine: ColorPair, neighbor_colors: Iterable[ColorPair]) -> bool:
    """Two pairs conflict iff their second coordinates agree."""
    hit = False
    for other in neighbor_colors:
        if other.q != mine.q:
            raise ColorError(f"mixed moduli {mine.q} and {other.q}")
        if other.b == mine.b:
            hit = True
    return hit


def ag_update(mine: ColorPair, conflicted: bool) -> ColorPair:
    if conflicted:
        return ColorPair(mine.a, (mine.b + mine.a) % mine.q, mine.q)
    return ColorPair(0, mine.b, mine.q)


def ag_successors(pair: ColorPair) -> set[ColorPair]:
    """The (at most two) colors a vertex holding ``pair`` can take next round."""
    return {ag_update(pair, True), ag_update(pair, False)}


def b_blocks(mine: ColorTriple, other: ColorTriple) -> bool:
    """Whether neighbor ``other`` counts as a b-conflict for ``mine``.

    A working neighbor with the same <c,b> does not: the two differ in a, so
    they stay distinct whichever of them fixes b first, while counting it
    would keep both stepping in lockstep forever.
    """
    return other.b == mine.b and not (mine.c != 0 and other.c == mine.c)


def three_ag_update(mine: ColorTriple, b_conflicted: bool, a_conflicted: bool,
                    hold: bool = False) -> ColorTriple:
    """One 3AG(p) step.

    ``hold`` only blocks transitions that would reach the fully final form
    <0,0,a>; the vertex keeps circling instead.
    """
    c, b, a, p = mine.c, mine.b, mine.a, mine.p
    if c != 0:
        if b_conflicted or (hold and b == 0):
            return ColorTriple(c, (b + c) % p, a, p)
        return ColorTriple(0, b, a, p)
    if a_conflicted or hold:
        return ColorTriple(0, b, (a + b) % p, p)
    return ColorTriple(0, 0, a, p)


def three_ag_successors(t: ColorTriple) -> set[ColorTriple]:
    return {three_ag_update(t, bc, ac, h) for bc in (False, True)
            for ac in (False, True) for h in (False, True)}


def agn_update(mine: ColorPair, conflicted: bool, hold: bool, n: int) -> ColorPair:
    """AG over Z_N: first coordinate is the working flag, second the residue."""
    if mine.q != n:
        raise ColorError(f"pair modulus {mine.q} != N={n}")
    if mine.a == 0:
        return mine
    if conflicted or hold:
        return ColorPair(1, (mine.b + 1) % n, n)
    return ColorPair(0, mine.b, n)


def arb_update(mine: ColorPair, cross_color_conflicts: int, p: int) -> ColorPair:
    if cross_color_conflicts <= p:
        return ColorPair(0, mine.b, mine.q)
    return ColorPair(mine.a, (mine.a + mine.b) % mine.q, mine.q)


def log_star(n: float) -> int:
    k = 0
    x = float(n)
    while x >= 2:
        x = math.log2(x)
        k += 1
    return k
