"""Streams of regular bipartite graphs: exhaustive enumeration, sampling, graph6 files.

Enumeration is an orderly algorithm on biadjacency matrices.  A matrix is
kept only if it is the lexicographic maximum (row-major, column 0 most
significant) of its class under row and column permutations, and since
every prefix of a maximal matrix is itself maximal, rows are added one at a
time and non-maximal prefixes are cut immediately.  A final filter removes
class-swapped duplicates and, for disconnected graphs, per-component swaps.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import random
from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import GraphError, Infeasible, MalformedGraph6
from .graph_core import Graph, canonical_form, emit_graph6, is_max_form, max_form, parse_graph6, validate

ENUMERATE, SAMPLE, FILE = "enumerate", "sample", "file"

# Largest v enumerated without ``force``, keyed by min(r, n - r).
ENUMERATION_LIMITS = {0: 64, 1: 64, 2: 40, 3: 24, 4: 22}
ENUMERATION_LIMIT_DENSE = 20


@dataclass(frozen=True)
class SourceSpec:
    kind: str
    r: int | None = None
    v: int | None = None
    connected_only: bool = True
    count: int = 1
    seed: int = 0
    path: str | None = None
    mixing_swaps: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (ENUMERATE, SAMPLE, FILE):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == FILE:
            if not self.path:
                raise ValueError("file source needs a path")
            return
        if self.r is None or self.v is None:
            raise ValueError(f"{self.kind} source needs r and v")
        if self.v <= 0 or self.v % 2:
            raise ValueError(f"v must be a positive even number, got {self.v}")
        if not 1 <= self.r <= self.v // 2:
            raise ValueError(f"need 1 <= r <= v/2, got r = {self.r}, v = {self.v}")
        if self.kind == SAMPLE and self.count < 1:
            raise ValueError("sample count must be at least 1")
        if self.kind == SAMPLE and self.connected_only and self.r == 1 and self.v > 2:
            # the only 1-regular graph is a perfect matching; rejection would never end
            raise ValueError("no connected 1-regular graph with v > 2; sample with connected_only=False")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def n(self) -> int:
        assert self.v is not None
        return self.v // 2

    def digest(self) -> str:
        """Stable hash identifying the stream (used by checkpoints)."""
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def stream(spec: SourceSpec, force: bool = False) -> Iterator[Graph]:
    if spec.kind == ENUMERATE:
        return enumerate_graphs(spec, force=force)
    if spec.kind == SAMPLE:
        return sample_graphs(spec)
    return ingest_graphs(spec)


# ---------------------------------------------------------------------------
# enumeration


def enumeration_limit(n: int, r: int) -> int:
    return ENUMERATION_LIMITS.get(min(r, n - r), ENUMERATION_LIMIT_DENSE)


def _rows_connected(rows: list[int]) -> bool:
    reached_rows = 1
    cols = rows[0]
    pending = set(range(1, len(rows)))
    grew = True
    while grew and pending:
        grew = False
        for i in list(pending):
            if rows[i] & cols:
                cols |= rows[i]
                pending.discard(i)
                reached_rows += 1
                grew = True
    return not pending


def _transpose_msb(rows: list[int], n: int) -> list[int]:
    cols = []
    for c in range(n):
        bit = 1 << (n - 1 - c)
        cols.append(sum(1 << (n - 1 - i) for i, R in enumerate(rows) if R & bit))
    return cols


def _row_candidates(blocks: list[tuple[int, int, int]], r: int, rows_left: int, n: int) -> Iterator[int]:
    """Rows of weight r, left-justified in every column class, in decreasing order.

    ``blocks`` holds (start column, size, column sum) for each run of equal
    columns; ``rows_left`` counts the rows still to come after this one.
    """
    nb = len(blocks)
    lo, hi = [0] * nb, [0] * nb
    for j, (_, s, cs) in enumerate(blocks):
        if cs >= r:
            continue
        deficit = r - cs
        if deficit > rows_left + 1:
            return
        hi[j] = s
        lo[j] = s if deficit > rows_left else 0
    suffix_hi = [0] * (nb + 1)
    suffix_lo = [0] * (nb + 1)
    for j in range(nb - 1, -1, -1):
        suffix_hi[j] = suffix_hi[j + 1] + hi[j]
        suffix_lo[j] = suffix_lo[j + 1] + lo[j]

    def rec(j: int, need: int, val: int) -> Iterator[int]:
        if j == nb:
            if need == 0:
                yield val
            return
        start, s, _ = blocks[j]
        top = min(hi[j], need - suffix_lo[j + 1])
        bottom = max(lo[j], need - suffix_hi[j + 1])
        for c in range(top, bottom - 1, -1):
            bits = ((1 << c) - 1) << (n - start - c)
            yield from rec(j + 1, need - c, val | bits)

    yield from rec(0, r, 0)


def _split_blocks(blocks: list[tuple[int, int, int]], row: int, n: int) -> list[tuple[int, int, int]]:
    out = []
    for start, s, cs in blocks:
        c = 0
        while c < s and row >> (n - 1 - start - c) & 1:
            c += 1
        if c:
            out.append((start, c, cs + 1))
        if c < s:
            out.append((start + c, s - c, cs))
    return out


def orderly_matrices(n: int, r: int) -> Iterator[list[int]]:
    """All maximal n x n 0/1 matrices with row and column sums r (rows MSB-first).

    One matrix per class under independent row and column permutations, in
    decreasing lexicographic order.
    """
    rows: list[int] = []

    def rec(blocks: list[tuple[int, int, int]]) -> Iterator[list[int]]:
        k = len(rows)
        if k == n:
            yield list(rows)
            return
        prev = rows[-1] if rows else None
        for cand in _row_candidates(blocks, r, n - k - 1, n):
            if prev is not None and cand > prev:
                continue
            rows.append(cand)
            if k < 1 or is_max_form(rows, n):
                yield from rec(_split_blocks(blocks, cand, n))
            rows.pop()

    yield from rec([(0, n, 0)])


def _complement_rows(rows: list[int], n: int) -> list[int]:
    full = (1 << n) - 1
    return [full & ~R for R in rows]


def _graph_from_rows(rows: list[int], n: int, label: str | None = None) -> Graph:
    adj = [[c for c in range(n) if R >> (n - 1 - c) & 1] for R in rows]
    return validate(adj, n_right=n, label=label)


def enumerate_graphs(spec: SourceSpec, force: bool = False) -> Iterator[Graph]:
    """Each isomorphism class of r-regular bipartite graphs on v vertices, exactly once.

    Isomorphism is graph isomorphism: class swaps are allowed, per component
    for disconnected graphs.  Dense cases (2r > n) are generated through
    their bipartite complements.  Output order is deterministic.
    """
    if spec.kind != ENUMERATE:
        raise ValueError("enumerate_graphs needs an enumerate SourceSpec")
    n, r = spec.n, spec.r
    assert r is not None
    limit = enumeration_limit(n, r)
    if spec.v > limit and not force:
        raise Infeasible(f"enumeration of r = {r}, v = {spec.v} exceeds the supported v <= {limit}")

    base_r = min(r, n - r)
    complemented = base_r != r
    seen: set[bytes] = set()
    if base_r == 0:
        mats: Iterable[list[int]] = [[0] * n]
    else:
        mats = orderly_matrices(n, base_r)

    index = 0
    for base in mats:
        # class swap: keep the orientation whose maximal form is larger
        if base_r and tuple(base) < max_form(_transpose_msb(base, n), n):
            continue
        rows = _complement_rows(base, n) if complemented else base
        connected = _rows_connected(rows)
        if spec.connected_only and not connected:
            continue
        g = _graph_from_rows(rows, n)
        if not connected:
            key = canonical_form(g)
            if key in seen:
                continue
            seen.add(key)
        yield Graph(g.n, g.r, g.adjacency, f"enum:r{r}:v{spec.v}:{index}")
        index += 1


# ---------------------------------------------------------------------------
# sampling


def _configuration_pairing(n: int, r: int, rng: random.Random, attempts: int) -> list[set[int]] | None:
    for _ in range(attempts):
        stubs = [b for b in range(n) for _ in range(r)]
        rng.shuffle(stubs)
        adj = [set(stubs[a * r:(a + 1) * r]) for a in range(n)]
        if all(len(s) == r for s in adj):
            return adj
    return None


def _mix(adj: list[set[int]], moves: int, rng: random.Random) -> None:
    """Uniform double-edge swaps (a1,b1),(a2,b2) -> (a1,b2),(a2,b1); rejected swaps still count."""
    edges = [[a, b] for a, nbrs in enumerate(adj) for b in sorted(nbrs)]
    m = len(edges)
    if m < 2:
        return
    for _ in range(moves):
        i, j = rng.randrange(m), rng.randrange(m)
        a1, b1 = edges[i]
        a2, b2 = edges[j]
        if a1 == a2 or b1 == b2 or b2 in adj[a1] or b1 in adj[a2]:
            continue
        adj[a1].remove(b1)
        adj[a2].remove(b2)
        adj[a1].add(b2)
        adj[a2].add(b1)
        edges[i][1] = b2
        edges[j][1] = b1


def sample_graphs(spec: SourceSpec, pairing_attempts: int = 100) -> Iterator[Graph]:
    """Approximately uniform random r-regular bipartite graphs, deterministic per seed.

    Each graph starts from a bipartite configuration-model pairing, redrawn
    while it has parallel edges.  When ``pairing_attempts`` draws all fail
    (likely only for large r) a circulant graph is used instead.  Either
    start is then mixed by ``mixing_swaps`` double-edge swap moves
    (default 10 r n).
    """
    if spec.kind != SAMPLE:
        raise ValueError("sample_graphs needs a sample SourceSpec")
    n, r = spec.n, spec.r
    assert r is not None
    moves = spec.mixing_swaps if spec.mixing_swaps is not None else 10 * r * n
    rng = random.Random(spec.seed)
    produced = 0
    while produced < spec.count:
        adj = _configuration_pairing(n, r, rng, pairing_attempts)
        if adj is None:
            adj = [{(a + j) % n for j in range(r)} for a in range(n)]
        _mix(adj, moves, rng)
        g = validate([sorted(s) for s in adj], n_right=n)
        if spec.connected_only and not g.is_connected():
            continue
        yield Graph(g.n, g.r, g.adjacency, f"sample:r{r}:v{spec.v}:seed{spec.seed}:{produced}")
        produced += 1


# ---------------------------------------------------------------------------
# graph6 files


def ingest_graphs(spec: SourceSpec) -> Iterator[Graph]:
    """Parse a graph6 file (optionally gzipped) line by line.

    Errors carry the 1-based line number.
    """
    if spec.kind != FILE:
        raise ValueError("ingest_graphs needs a file SourceSpec")
    assert spec.path is not None
    opener = gzip.open if str(spec.path).endswith(".gz") else open
    with opener(spec.path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                g = parse_graph6(raw, label=f"{spec.path}:{lineno}")
            except MalformedGraph6 as exc:
                raise MalformedGraph6(str(exc), line=lineno) from exc
            except GraphError as exc:
                raise type(exc)(f"line {lineno}: {exc}") from exc
            if spec.connected_only and not g.is_connected():
                continue
            yield g


def write_graph6(graphs: Iterable[Graph], path: str | Path) -> int:
    """Write one graph6 line per graph; returns the number written."""
    count = 0
    with open(path, "wb") as fh:
        for g in graphs:
            fh.write(emit_graph6(g) + b"\n")
            count += 1
    return count
