"""Regular bipartite graphs: validation, graph6 I/O and exact canonical forms.

A :class:`Graph` stores the left-to-right adjacency of an r-regular bipartite
simple graph with ``n`` vertices per class.  Left vertices are ``0..n-1``,
right vertices are ``0..n-1`` as well; in every flat serialization the left
class comes first, so right vertex ``b`` becomes vertex ``n + b``.

Canonical forms are computed by ordered column-class refinement with full
backtracking over row choices (no hashing), so two graphs receive the same
key exactly when they are isomorphic.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

from .errors import (
    ClassSizeMismatch,
    MalformedGraph6,
    NotBipartite,
    NotRegular,
    NotSimple,
)

GRAPH6_HEADER = b">>graph6<<"


@dataclass(frozen=True)
class Graph:
    """Validated r-regular bipartite simple graph (use :func:`validate`)."""

    n: int
    r: int
    adjacency: tuple[tuple[int, ...], ...]
    label: str | None = field(default=None, compare=False)

    @property
    def v(self) -> int:
        return 2 * self.n

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency)

    @cached_property
    def rows(self) -> tuple[int, ...]:
        """Left neighbourhoods as bitmasks (bit ``b`` set for right vertex ``b``)."""
        return tuple(sum(1 << b for b in nbrs) for nbrs in self.adjacency)

    @cached_property
    def right_adjacency(self) -> tuple[tuple[int, ...], ...]:
        cols: list[list[int]] = [[] for _ in range(self.n)]
        for a, nbrs in enumerate(self.adjacency):
            for b in nbrs:
                cols[b].append(a)
        return tuple(tuple(c) for c in cols)

    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a, nbrs in enumerate(self.adjacency) for b in nbrs]

    def components(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Connected components as (left vertices, right vertices), ordered by smallest left vertex."""
        seen_left = [False] * self.n
        seen_right = [False] * self.n
        out = []
        for start in range(self.n):
            if seen_left[start]:
                continue
            left, right = [start], []
            seen_left[start] = True
            stack = [start]
            while stack:
                a = stack.pop()
                for b in self.adjacency[a]:
                    if seen_right[b]:
                        continue
                    seen_right[b] = True
                    right.append(b)
                    for a2 in self.right_adjacency[b]:
                        if not seen_left[a2]:
                            seen_left[a2] = True
                            left.append(a2)
                            stack.append(a2)
            out.append((tuple(sorted(left)), tuple(sorted(right))))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def relabel(self, left_perm: Sequence[int], right_perm: Sequence[int], swap: bool = False) -> Graph:
        """Image of the graph under vertex permutations (``perm[old] = new``), optionally swapping classes."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, nbrs in enumerate(self.adjacency):
            for b in nbrs:
                na, nb = left_perm[a], right_perm[b]
                if swap:
                    na, nb = nb, na
                adj[na].append(nb)
        return Graph(self.n, self.r, tuple(tuple(sorted(x)) for x in adj), self.label)


def validate(
    candidate: Mapping[int, Iterable[int]] | Sequence[Iterable[int]],
    n_right: int | None = None,
    label: str | None = None,
) -> Graph:
    """Check raw left adjacency lists and return a :class:`Graph`.

    ``candidate`` maps each left vertex ``0..n-1`` to its right neighbours.
    The right class size is ``n_right`` if given, else one more than the
    largest right index seen.
    """
    if isinstance(candidate, Mapping):
        keys = sorted(candidate)
        if keys != list(range(len(keys))):
            raise ClassSizeMismatch(f"left vertices must be 0..{len(keys) - 1}, got {keys}")
        lists = [list(candidate[k]) for k in keys]
    else:
        lists = [list(nbrs) for nbrs in candidate]
    n = len(lists)
    if n == 0:
        raise NotRegular("graph has no vertices")

    for a, nbrs in enumerate(lists):
        for b in nbrs:
            if not isinstance(b, int) or b < 0:
                raise ClassSizeMismatch(f"invalid right vertex {b!r} at left vertex {a}")
        if len(set(nbrs)) != len(nbrs):
            raise NotSimple(f"duplicate edge at left vertex {a}")

    seen_max = max((b for nbrs in lists for b in nbrs), default=-1)
    if n_right is None:
        n_right = seen_max + 1
    elif seen_max >= n_right:
        raise ClassSizeMismatch(f"right vertex {seen_max} outside class of size {n_right}")
    if n_right != n:
        raise ClassSizeMismatch(f"left class has {n} vertices, right class has {n_right}")

    r = len(lists[0])
    if r < 1:
        raise NotRegular("degree must be at least 1")
    right_deg = [0] * n
    for a, nbrs in enumerate(lists):
        if len(nbrs) != r:
            raise NotRegular(f"left vertex {a} has degree {len(nbrs)}, expected {r}")
        for b in nbrs:
            right_deg[b] += 1
    for b, d in enumerate(right_deg):
        if d != r:
            raise NotRegular(f"right vertex {b} has degree {d}, expected {r}")

    return Graph(n, r, tuple(tuple(sorted(nbrs)) for nbrs in lists), label)


# ---------------------------------------------------------------------------
# graph6


def _encode_size(N: int) -> bytes:
    if N <= 62:
        return bytes([N + 63])
    if N <= 258047:
        return bytes([126] + [((N >> s) & 63) + 63 for s in (12, 6, 0)])
    return bytes([126, 126] + [((N >> s) & 63) + 63 for s in (30, 24, 18, 12, 6, 0)])


def encode_graph6(N: int, edges: Iterable[tuple[int, int]]) -> bytes:
    """graph6 encoding of an undirected simple graph on ``0..N-1`` (no newline)."""
    adj = set()
    for u, w in edges:
        adj.add((min(u, w), max(u, w)))
    nbits = N * (N - 1) // 2
    bits = bytearray(nbits + (-nbits) % 6)
    k = 0
    for j in range(1, N):
        for i in range(j):
            if (i, j) in adj:
                bits[k] = 1
            k += 1
    out = bytearray(_encode_size(N))
    for start in range(0, len(bits), 6):
        val = 0
        for bit in bits[start:start + 6]:
            val = (val << 1) | bit
        out.append(val + 63)
    return bytes(out)


def emit_graph6(g: Graph) -> bytes:
    """graph6 line for ``g`` with the left class first (no trailing newline)."""
    return encode_graph6(g.v, ((a, g.n + b) for a, b in g.edges()))


def decode_graph6(line: bytes | str) -> tuple[int, list[list[int]]]:
    """Decode one graph6 line into (vertex count, adjacency lists)."""
    if isinstance(line, str):
        line = line.encode("ascii", errors="replace")
    data = line.strip()
    if data.startswith(GRAPH6_HEADER):
        data = data[len(GRAPH6_HEADER):]
    if not data:
        raise MalformedGraph6("empty graph6 line")
    if data[0] in b":&;":
        raise MalformedGraph6("sparse6/digraph6 input is not supported")
    if any(c < 63 or c > 126 for c in data):
        raise MalformedGraph6("byte outside the graph6 range 63..126")

    if data[0] != 126:
        N, pos = data[0] - 63, 1
    elif len(data) >= 2 and data[1] == 126:
        if len(data) < 8:
            raise MalformedGraph6("truncated size header")
        N, pos = 0, 8
        for c in data[2:8]:
            N = (N << 6) | (c - 63)
    else:
        if len(data) < 4:
            raise MalformedGraph6("truncated size header")
        N, pos = 0, 4
        for c in data[1:4]:
            N = (N << 6) | (c - 63)

    nbits = N * (N - 1) // 2
    body = data[pos:]
    if len(body) != (nbits + 5) // 6:
        raise MalformedGraph6(f"expected {(nbits + 5) // 6} data bytes for N={N}, got {len(body)}")

    adj: list[list[int]] = [[] for _ in range(N)]
    k = 0
    bit_iter = ((c - 63) >> s & 1 for c in body for s in range(5, -1, -1))
    for j in range(1, N):
        for i in range(j):
            if next(bit_iter):
                adj[i].append(j)
                adj[j].append(i)
            k += 1
    if any(bit_iter):
        raise MalformedGraph6("nonzero padding bits")
    return N, adj


def parse_graph6(line: bytes | str, label: str | None = None) -> Graph:
    """Parse a graph6 line and recover the bipartition by 2-colouring.

    Each component is coloured from its smallest vertex, which goes to the
    left class; classes are then relabelled in increasing original order.
    This makes :func:`parse_graph6` the inverse of :func:`emit_graph6`.
    """
    N, adj = decode_graph6(line)
    color = [-1] * N
    for s in range(N):
        if color[s] != -1:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if color[y] == -1:
                    color[y] = 1 - color[x]
                    stack.append(y)
                elif color[y] == color[x]:
                    raise NotBipartite(f"odd cycle through vertices {x} and {y}")

    degrees = {len(a) for a in adj}
    if len(degrees) != 1 or 0 in degrees:
        raise NotRegular(f"vertex degrees {sorted(degrees)} are not a single positive value")

    left = [x for x in range(N) if color[x] == 0]
    right = [x for x in range(N) if color[x] == 1]
    if len(left) != len(right):
        raise ClassSizeMismatch(f"classes of size {len(left)} and {len(right)}")
    right_index = {x: i for i, x in enumerate(right)}
    return validate([[right_index[y] for y in adj[x]] for x in left], n_right=len(right), label=label)


# ---------------------------------------------------------------------------
# canonical forms


class _Greater(Exception):
    """Raised when a canonicity check finds a lexicographically larger form."""


def _max_form(
    rows: Sequence[int], colmask: int, fixed: Sequence[int] | None = None, max_gens: int = 64
) -> tuple[int, ...]:
    """Lexicographically maximal row-major form under row and column permutations.

    Rows are bitmasks over the columns in ``colmask`` (bit positions are
    arbitrary).  Choosing rows one at a time refines an ordered partition of
    the columns into classes of identical partial column vectors; each
    choice contributes the row's class counts written as left-justified
    ones.  Two leaves with equal forms yield an automorphism, and sibling
    branches in one orbit of the automorphisms fixing the current path are
    skipped.  With ``fixed`` given the search instead raises
    :class:`_Greater` as soon as some ordering beats ``fixed``.
    """
    best: list[int] = list(fixed) if fixed is not None else []
    check = fixed is not None
    nrows = len(rows)
    gens: list[list[int]] = []
    path: list[int] = []
    first_leaf: list[int] | None = None

    def same_orbit(idx: int, explored: list[int]) -> bool:
        active = [g for g in gens if all(g[x] == x for x in path)]
        if not active:
            return False
        orbit = {idx}
        frontier = [idx]
        while frontier:
            x = frontier.pop()
            for g in active:
                y = g[x]
                if y not in orbit:
                    orbit.add(y)
                    frontier.append(y)
        return any(e in orbit for e in explored)

    def rec(t: int, remaining: list[int], blocks: list[tuple[int, int]]) -> None:
        nonlocal first_leaf
        if t == nrows:
            if first_leaf is None:
                first_leaf = list(path)
            elif len(gens) < max_gens:
                perm = list(range(nrows))
                for a, b in zip(first_leaf, path):
                    perm[a] = b
                gens.append(perm)
            return
        pats: dict[int, int] = {}
        seen_vals = set()
        for idx in remaining:
            R = rows[idx]
            if R in seen_vals:
                continue
            seen_vals.add(R)
            val = 0
            for B, s in blocks:
                c = (R & B).bit_count()
                val = (val << s) | (((1 << c) - 1) << (s - c))
            pats[idx] = val
        p = max(pats.values())
        if t < len(best):
            if p < best[t]:
                return
            if p > best[t]:
                if check:
                    raise _Greater
                del best[t:]
                best.append(p)
                first_leaf = None
        else:
            best.append(p)
        explored: list[int] = []
        for idx, val in pats.items():
            if val != p:
                continue
            if explored and gens and same_orbit(idx, explored):
                continue
            explored.append(idx)
            R = rows[idx]
            refined = []
            for B, s in blocks:
                inside = B & R
                if inside:
                    c = inside.bit_count()
                    refined.append((inside, c))
                    if c < s:
                        refined.append((B & ~R, s - c))
                else:
                    refined.append((B, s))
            path.append(idx)
            rec(t + 1, [x for x in remaining if x != idx], refined)
            path.pop()

    rec(0, list(range(nrows)), [(colmask, colmask.bit_count())] if colmask else [])
    return tuple(best)


def is_max_form(rows: Sequence[int], ncols: int) -> bool:
    """True if ``rows`` (column 0 = most significant bit) is its own maximal form."""
    try:
        _max_form(rows, (1 << ncols) - 1, fixed=rows)
    except _Greater:
        return False
    return True


def max_form(rows: Sequence[int], ncols: int) -> tuple[int, ...]:
    return _max_form(rows, (1 << ncols) - 1)


def _transpose(rows: Sequence[int], colmask: int) -> list[int]:
    cols = []
    c = colmask
    while c:
        low = c & -c
        cols.append(sum(1 << i for i, R in enumerate(rows) if R & low))
        c ^= low
    return cols


def _colored_key(rows: Sequence[int], colmask: int) -> tuple:
    """Key of a two-coloured bipartite graph up to colour-preserving isomorphism."""
    rows = list(rows)
    parts = []
    unused = colmask
    todo = set(range(len(rows)))
    while todo:
        i = min(todo)
        todo.discard(i)
        comp_rows, cols = [rows[i]], rows[i] & colmask
        grew = True
        while grew:
            grew = False
            for j in list(todo):
                if rows[j] & cols:
                    todo.discard(j)
                    comp_rows.append(rows[j])
                    cols |= rows[j] & colmask
                    grew = True
        unused &= ~cols
        parts.append((len(comp_rows), cols.bit_count(), _max_form(comp_rows, cols)))
    parts.extend([(0, 1, ())] * unused.bit_count())
    return tuple(sorted(parts))


def _component_key(rows: Sequence[int], colmask: int, r: int) -> tuple:
    nc = len(rows)
    dense = 2 * r > nc
    if dense:
        rows = [colmask & ~R for R in rows]
    cols = _transpose(rows, colmask)
    k = max(_colored_key(rows, colmask), _colored_key(cols, (1 << nc) - 1))
    return (nc, int(dense), k)


class CanonicalForm(bytes):
    """Total-order key; equal exactly for isomorphic graphs (class swaps allowed)."""

    def hex_digest(self) -> str:
        import hashlib

        return hashlib.sha1(self).hexdigest()


def canonical_form(g: Graph) -> CanonicalForm:
    """Exact isomorphism key of ``g``.

    Components are keyed separately (dense components via their bipartite
    complement, which keeps highly symmetric graphs cheap) and the sorted
    component keys form the graph key.  Swapping the classes of any
    component leaves the key unchanged.
    """
    keys = []
    for left, right in g.components():
        colmask = sum(1 << b for b in right)
        keys.append(_component_key([g.rows[a] for a in left], colmask, g.r))
    keys.sort()
    return CanonicalForm(repr((g.n, g.r, tuple(keys))).encode("ascii"))
