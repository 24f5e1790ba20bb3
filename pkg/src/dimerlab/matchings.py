"""Exact i-matching counts: a subset DP engine plus two independent oracles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import OutOfRange, TooLarge
from .graph_core import Graph

MAX_DP_N = 32
DENSE_DP_N = 22
BRUTE_FORCE_MAX_EDGES = 40
DELETION_CONTRACTION_MAX_V = 24


@dataclass(frozen=True)
class MatchingVector:
    """Counts ``m_0..m_n`` of i-edge matchings; ``counts[i] = m_i``."""

    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    def __getitem__(self, i: int) -> int:
        return self.counts[i]

    def __len__(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        """Number of all matchings (generating polynomial at 1)."""
        return sum(self.counts)

    def is_log_concave(self) -> bool:
        m = self.counts
        return all(m[i] * m[i] >= m[i - 1] * m[i + 1] for i in range(1, len(m) - 1))


@lru_cache(maxsize=None)
def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        pop += (idx >> bit) & 1
    return pop


def _dense_dp(g: Graph) -> list[int]:
    n = g.n
    # (r+1)^n bounds the number of all matchings, hence every DP entry.
    dtype = np.int64 if (g.r + 1) ** n < 2**62 else object
    f = np.zeros(1 << n, dtype=dtype)
    f[0] = 1
    for nbrs in g.adjacency:
        new = f.copy()
        for b in nbrs:
            src = f.reshape(-1, 2, 1 << b)
            dst = new.reshape(-1, 2, 1 << b)
            dst[:, 1, :] += src[:, 0, :]
        f = new
    pop = _popcounts(n)
    return [int(f[pop == i].sum()) for i in range(n + 1)]


def _frontier_order(g: Graph) -> list[int]:
    """Greedy left order keeping few right vertices half-processed."""
    remaining = [g.r] * g.n
    open_right: set[int] = set()
    todo = set(range(g.n))
    order = []
    while todo:
        def cost(a: int) -> tuple[int, int]:
            nbrs = g.adjacency[a]
            opened = sum(1 for b in nbrs if b not in open_right)
            closed = sum(1 for b in nbrs if remaining[b] == 1)
            return (opened - closed, a)

        a = min(todo, key=cost)
        todo.remove(a)
        order.append(a)
        for b in g.adjacency[a]:
            remaining[b] -= 1
            if remaining[b]:
                open_right.add(b)
            else:
                open_right.discard(b)
    return order


# Primes just below 2^61: the frontier DP only adds, so residues stay below
# 2^62 and fit int64; CRT over enough of them recovers the exact counts.
_PRIMES = (2305843009213693951, 2305843009213693921, 2305843009213693907, 2305843009213693723)
FRONTIER_BUDGET_BYTES = 1 << 30


def _frontier_slots(g: Graph, order: list[int]) -> tuple[list[list[int]], list[list[int]], int]:
    """Slot index per (step, neighbour) and the slots freed after each step."""
    remaining = [g.r] * g.n
    slot_of: dict[int, int] = {}
    free: list[int] = []
    width = 0
    step_slots, step_closed = [], []
    for a in order:
        slots = []
        for b in g.adjacency[a]:
            if b not in slot_of:
                if free:
                    slot_of[b] = free.pop()
                else:
                    slot_of[b] = width
                    width += 1
            slots.append(slot_of[b])
        closed = []
        for b in g.adjacency[a]:
            remaining[b] -= 1
            if not remaining[b]:
                closed.append(slot_of.pop(b))
        free.extend(sorted(closed, reverse=True))
        step_slots.append(slots)
        step_closed.append(closed)
    return step_slots, step_closed, width


def _sparse_dp(g: Graph) -> list[int]:
    """Same recursion, but a right vertex leaves the state once all its left
    neighbours are done, so the state is (used open vertices, size).

    Open right vertices live in a few reusable bit slots; the table is a
    numpy array over (slot mask, size) holding residues modulo large primes.
    """
    n = g.n
    order = _frontier_order(g)
    step_slots, step_closed, width = _frontier_slots(g, order)
    bound = (g.r + 1) ** n  # number of all matchings is at most this
    primes = []
    modulus = 1
    for q in _PRIMES:
        if modulus > bound:
            break
        primes.append(q)
        modulus *= q
    need = len(primes) * (1 << width) * (n + 1) * 8
    if need > FRONTIER_BUDGET_BYTES:
        raise TooLarge(f"frontier of {width} open right vertices needs {need >> 20} MiB")

    P = np.array(primes, dtype=np.int64).reshape(-1, 1, 1)
    A = np.zeros((len(primes), 1 << width, n + 1), dtype=np.int64)
    A[:, 0, 0] = 1
    for slots, closed in zip(step_slots, step_closed):
        new = A.copy()
        for s in slots:
            src = A.reshape(len(primes), -1, 2, 1 << s, n + 1)
            dst = new.reshape(len(primes), -1, 2, 1 << s, n + 1)
            dst[:, :, 1, :, 1:] += src[:, :, 0, :, :-1]
        np.remainder(new, P, out=new)
        for s in closed:
            view = new.reshape(len(primes), -1, 2, 1 << s, n + 1)
            view[:, :, 0] += view[:, :, 1]
            view[:, :, 1] = 0
        np.remainder(new, P, out=new)
        A = new

    residues = A.sum(axis=1, dtype=object)  # every slot is closed: only mask 0 is nonzero
    counts = []
    for i in range(n + 1):
        x, mod = 0, 1
        for j, q in enumerate(primes):
            rj = int(residues[j, i]) % q
            # combine x (mod mod) with rj (mod q)
            t = ((rj - x) * pow(mod, -1, q)) % q
            x += mod * t
            mod *= q
        counts.append(x)
    return counts


def count_matchings(g: Graph) -> MatchingVector:
    """m_i for all i by dynamic programming over left vertices.

    The state is the set S of right vertices already used; adding left
    vertex a maps f to f'(S) = f(S) + sum over b in S & N(a) of f(S - b).
    Up to n = 22 this runs on a dense array over all 2^n sets; beyond that
    finished right vertices are projected out of S, so memory follows the
    frontier of the left-vertex order rather than 2^n.
    """
    if g.n > MAX_DP_N:
        raise TooLarge(f"subset DP supports n <= {MAX_DP_N}, got n = {g.n}")
    counts = _dense_dp(g) if g.n <= DENSE_DP_N else _sparse_dp(g)
    return MatchingVector(tuple(counts))


def brute_force_matchings(g: Graph, max_edges: int = BRUTE_FORCE_MAX_EDGES) -> MatchingVector:
    """Enumerate edge subsets, keeping the pairwise-disjoint ones, and count them by size.

    Subsets are walked depth-first in edge order; a branch is dropped the
    moment its last edge collides with an earlier one.
    """
    edges = g.edges()
    if len(edges) > max_edges:
        raise TooLarge(f"brute force supports at most {max_edges} edges, got {len(edges)}")
    counts = [0] * (g.n + 1)
    m = len(edges)

    def walk(k: int, used_left: int, used_right: int, size: int) -> None:
        if k == m:
            counts[size] += 1
            return
        walk(k + 1, used_left, used_right, size)
        a, b = edges[k]
        if not (used_left >> a) & 1 and not (used_right >> b) & 1:
            walk(k + 1, used_left | (1 << a), used_right | (1 << b), size + 1)

    walk(0, 0, 0, 0)
    return MatchingVector(tuple(counts))


def _poly_add(p: list[int], q: list[int], shift: int = 0) -> list[int]:
    out = list(p) + [0] * max(0, len(q) + shift - len(p))
    for i, c in enumerate(q):
        out[i + shift] += c
    return out


def deletion_contraction_matchings(g: Graph) -> MatchingVector:
    """Matching polynomial by the edge recursion M(G) = M(G - e) + x M(G - u - w).

    Subgraphs are memoised on their sorted nonzero left rows, which is
    invariant under relabelling of the left class.
    """
    if g.v > DELETION_CONTRACTION_MAX_V:
        raise TooLarge(f"deletion-contraction supports v <= {DELETION_CONTRACTION_MAX_V}, got v = {g.v}")
    memo: dict[tuple[int, ...], list[int]] = {(): [1]}

    def poly(rows: tuple[int, ...]) -> list[int]:
        hit = memo.get(rows)
        if hit is not None:
            return hit
        first = rows[0]
        low = first & -first
        rest = rows[1:]
        deleted = _key((first ^ low,) + rest)
        contracted = _key(tuple(R & ~low for R in rest))
        res = _poly_add(poly(deleted), poly(contracted), shift=1)
        memo[rows] = res
        return res

    counts = poly(_key(g.rows))
    counts = counts + [0] * (g.n + 1 - len(counts))
    return MatchingVector(tuple(counts))


def _key(rows: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(R for R in rows if R))


def complete_graph_matchings(v: int, i: int) -> int:
    """Number of i-matchings of the complete graph K_v: v! / ((v-2i)! i! 2^i)."""
    if i < 0 or 2 * i > v:
        raise OutOfRange(f"need 0 <= 2i <= v, got v = {v}, i = {i}")
    return factorial(v) // (factorial(v - 2 * i) * factorial(i) * 2**i)
