"""Polynomial color reduction (Linial), its forbidden-set and interval variants,
and Cole-Vishkin 3-coloring of oriented paths and cycles."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Hashable, Iterable, Mapping

from .algebra import is_prime


class LinialError(RuntimeError):
    pass


@dataclass(frozen=True)
class LinialParams:
    """One reduction step: colors in [0, m) become points <x, g(x)> of GF(q)^2.

    ``tolerance`` is the number of neighbor polynomials allowed to agree with
    ours at the chosen point (0 for a proper step).
    """
    q: int
    d: int
    m: int
    delta: int
    forbidden: int = 0
    tolerance: int = 0

    @property
    def target(self) -> int:
        return self.q * self.q

    @property
    def shrinks(self) -> bool:
        return self.target < self.m


def _need(d: int, delta: int, forbidden: int, tolerance: int) -> int:
    bad = -(-d * delta // (tolerance + 1))
    return bad + 2 * forbidden + 1


@lru_cache(maxsize=None)
def linial_params(m: int, delta: int, forbidden: int = 0, tolerance: int = 0) -> LinialParams:
    """Smallest prime q admitting a degree d with q**(d+1) >= m and
    q >= ceil(d*delta/(tolerance+1)) + 2*forbidden + 1; d is minimal for that q."""
    q = 2
    while True:
        if is_prime(q):
            d = 1
            while _need(d, delta, forbidden, tolerance) <= q:
                if q ** (d + 1) >= m:
                    return LinialParams(q, d, m, delta, forbidden, tolerance)
                d += 1
        q += 1


def poly_coeffs(color: int, q: int, d: int) -> tuple[int, ...]:
    out = []
    for _ in range(d + 1):
        color, r = divmod(color, q)
        out.append(r)
    return tuple(out)


def poly_eval(coeffs: tuple[int, ...], x: int, q: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def linial_step(my_color: int, neighbor_colors: Iterable[int], forbidden: Iterable[int],
                params: LinialParams) -> int:
    """New color x*q + g(x) for the smallest admissible x."""
    q, d = params.q, params.d
    nbrs = set(neighbor_colors)
    forb = set(forbidden)
    if not 0 <= my_color < params.m:
        raise LinialError(f"color {my_color} outside source palette [0, {params.m})")
    if params.tolerance == 0 and my_color in nbrs:
        raise LinialError(f"input coloring not proper: {my_color} shared with a neighbor")
    for c in nbrs:
        if not 0 <= c < params.m:
            raise LinialError(f"neighbor color {c} outside source palette [0, {params.m})")
    mine = poly_coeffs(my_color, q, d)
    others = [poly_coeffs(c, q, d) for c in nbrs if c != my_color]
    for x in range(q):
        y = poly_eval(mine, x, q)
        agree = sum(1 for g in others if poly_eval(g, x, q) == y)
        if agree <= params.tolerance and x * q + y not in forb:
            return x * q + y
    raise LinialError(f"no admissible point for color {my_color} with {len(nbrs)} neighbors "
                      f"and {len(forb)} forbidden colors under {params}")


def reduction_schedule(n_bound: int, delta: int) -> list[LinialParams]:
    """Proper (no forbidden set) steps from an ID coloring down to O(delta^2).

    Steps continue while they strictly shrink the palette.
    """
    steps = []
    m = n_bound
    while True:
        p = linial_params(m, delta, 0)
        if not p.shrinks:
            return steps
        steps.append(p)
        m = p.target


@dataclass(frozen=True)
class IntervalTable:
    """Disjoint color intervals I_0 < I_1 < ... < I_r; I_r holds ID colors.

    ``steps[j]`` maps I_j (as offsets) into I_{j-1}, for j = 1..r.
    """
    n_bound: int
    delta: int
    sizes: tuple[int, ...]  # |I_0|, |I_1|, ..., |I_r| (= n_bound)
    steps: tuple[LinialParams | None, ...]  # index 0 unused

    @property
    def r(self) -> int:
        return len(self.sizes) - 1

    @property
    def t(self) -> tuple[int, ...]:
        """Palette sizes t_1..t_r."""
        return self.sizes[:-1]

    @property
    def bounds(self) -> tuple[tuple[int, int], ...]:
        out, lo = [], 0
        for s in self.sizes:
            out.append((lo, lo + s - 1))
            lo += s
        return tuple(out)

    @property
    def id_base(self) -> int:
        return sum(self.sizes[:-1])

    @property
    def palette(self) -> int:
        return sum(self.sizes)

    @property
    def q(self) -> int:
        """Field size of the step into I_0; I_0 colors are pairs over it."""
        return self.steps[1].q

    @cached_property
    def _starts(self) -> tuple[int, ...]:
        out, lo = [], 0
        for s in self.sizes:
            out.append(lo)
            lo += s
        return tuple(out)

    def lo(self, j: int) -> int:
        return self._starts[j]

    def interval_of(self, color: int) -> int | None:
        if not isinstance(color, int) or not 0 <= color < self.palette:
            return None
        return bisect.bisect_right(self._starts, color) - 1

    def initial_color(self, vid: int) -> int:
        return self.id_base + vid


@lru_cache(maxsize=None)
def interval_table(n_bound: int, delta: int, i0_size: int | None = None) -> IntervalTable:
    """ROM-computable interval layout.

    The last step is sized for a forbidden set of 2*delta colors (the AG
    successors of already-small neighbors). Earlier proper steps are kept only
    while the palette shrinks and stays above what the last step produces.
    ``i0_size`` enlarges I_0 beyond the last step's palette when the
    consumer of I_0 needs a larger color space.
    """
    if delta < 1 or n_bound < delta + 1:
        raise ValueError("interval_table needs n_bound >= delta + 1 >= 2")
    f = 2 * delta
    chain = [n_bound]
    while True:
        p = linial_params(chain[-1], delta, 0)
        nxt = p.target
        if nxt < chain[-1] and nxt > linial_params(nxt, delta, f).target:
            chain.append(nxt)
        else:
            break
    last = linial_params(chain[-1], delta, f)
    t1 = last.target if i0_size is None else max(i0_size, last.target)
    # chain = [n, t_r, ..., t_2]; sizes run from I_0 upward
    sizes = (t1,) + tuple(reversed(chain[1:])) + (n_bound,)
    steps: list[LinialParams | None] = [None, last]
    for j in range(2, len(sizes)):
        steps.append(linial_params(sizes[j], delta, 0))
    return IntervalTable(n_bound, delta, sizes, tuple(steps))


def mod_linial(my_color: int, same_interval: Iterable[int], forbidden: Iterable[int],
               table: IntervalTable) -> int:
    """Move a color from I_j to I_{j-1} (j >= 1), avoiding ``forbidden`` (I_0 colors)."""
    j = table.interval_of(my_color)
    if j is None or j == 0:
        raise LinialError(f"mod_linial needs a color in I_j, j >= 1; got {my_color}")
    lo = table.lo(j)
    q_off = []
    for c in same_interval:
        if table.interval_of(c) != j:
            raise LinialError(f"neighbor color {c} not in interval I_{j}")
        q_off.append(c - lo)
    forb = list(forbidden) if j == 1 else []
    out = linial_step(my_color - lo, q_off, forb, table.steps[j])
    return table.lo(j - 1) + out


# Cole-Vishkin

def cv_fold(color: int, succ_color: int | None) -> int:
    """2*k + bit_k(color), k = lowest bit index where color and the successor differ."""
    if succ_color is None:
        return color & 1
    diff = color ^ succ_color
    if diff == 0:
        raise LinialError("Cole-Vishkin input not proper along the successor link")
    k = (diff & -diff).bit_length() - 1
    return 2 * k + ((color >> k) & 1)


def cv_fold_bounds(id_bits: int) -> list[int]:
    """Exclusive color bounds after each fold, starting from ``id_bits``-bit IDs."""
    bound = 1 << id_bits
    out = []
    while bound > 6:
        bound = 2 * max(1, (bound - 1).bit_length())
        out.append(bound)
    return out


def cole_vishkin_3color(ids: Mapping[Hashable, int],
                        successor: Mapping[Hashable, Hashable | None]) -> tuple[dict, int]:
    """3-color items on disjoint oriented paths/cycles.

    ``successor[x]`` is the next item along x's path (None at a path end).
    Returns (colors in {0,1,2}, synchronous rounds used).
    """
    items = list(ids)
    pred: dict[Hashable, Hashable] = {}
    for x in items:
        s = successor.get(x)
        if s is None:
            continue
        if s not in ids:
            raise LinialError(f"successor {s!r} of {x!r} unknown")
        if s == x:
            raise LinialError("item is its own successor")
        if s in pred:
            raise LinialError(f"item {s!r} has two predecessors; input is not paths/cycles")
        pred[s] = x
    if len(set(ids.values())) != len(ids):
        raise LinialError("identifiers must be unique")
    id_bits = max(1, max((i.bit_length() for i in ids.values()), default=1))
    color = dict(ids)
    rounds = 0
    for _ in cv_fold_bounds(id_bits):
        color = {x: cv_fold(color[x], color[successor[x]] if successor.get(x) is not None else None)
                 for x in items}
        rounds += 1
    # on paths and cycles each item has at most one predecessor and one
    # successor, so a color class can pick from {0,1,2} directly
    for c in (5, 4, 3):
        color = recolor_class(color, successor, pred, items, c)
        rounds += 1
    return color, rounds


def recolor_class(color: dict, successor: Mapping, pred: Mapping, items: list, c: int) -> dict:
    out = dict(color)
    for x in items:
        if color[x] != c:
            continue
        used = set()
        s = successor.get(x)
        if s is not None:
            used.add(color[s])
        if x in pred:
            used.add(color[pred[x]])
        out[x] = min({0, 1, 2} - used)
    return out
