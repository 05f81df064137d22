"""Simple undirected graphs, trees, and the invariants used by the reward functions.

Vertices are ``0..n-1``. Edges are stored as pairs ``(i, j)`` with ``i < j``;
the canonical edge order is lexicographic, so pair ``(i, j)`` has index
``edge_index(n, i, j)``.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .linalg import charpoly_exact, sym_eigenvalues
from .matching import matching_size

__all__ = [
    "Graph",
    "PeakProfile",
    "Disconnected",
    "NotATree",
    "LabelOutOfRange",
    "NotDivisible",
    "edge_index",
    "edge_pairs",
    "is_connected",
    "is_tree",
    "distance_matrix",
    "matching_number",
    "lambda1",
    "proximity",
    "diameter",
    "distance_spectrum",
    "transmission",
    "is_transmission_regular",
    "distance_laplacian",
    "prufer_decode",
    "prufer_encode",
    "random_tree",
    "count_matchings",
    "matching_counts",
    "adjacency_charpoly_tree",
    "peak_profile",
    "build_t_nd",
    "build_comet",
    "path_graph",
    "complete_graph",
    "cycle_graph",
    "star_graph",
    "format_edge_list",
    "parse_edge_list",
]


class Disconnected(ValueError):
    pass


class NotATree(ValueError):
    pass


class LabelOutOfRange(ValueError):
    pass


class NotDivisible(ValueError):
    pass


def edge_pairs(n: int) -> list[tuple[int, int]]:
    """All vertex pairs in canonical (lexicographic) order."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def edge_index(n: int, i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    if not 0 <= i < j < n:
        raise ValueError(f"invalid pair ({i}, {j}) for n={n}")
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class Graph:
    """Simple undirected labeled graph."""

    n: int
    edges: frozenset

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        norm = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(norm))

    @cached_property
    def adj(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @property
    def m(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency_matrix(self) -> list[list[int]]:
        a = [[0] * self.n for _ in range(self.n)]
        for i, j in self.edges:
            a[i][j] = a[j][i] = 1
        return a

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        return Graph(self.n, ((perm[i], perm[j]) for i, j in self.edges))

    def add_edges(self, extra: Iterable[tuple[int, int]]) -> "Graph":
        return Graph(self.n, list(self.edges) + list(extra))

    def remove_edges(self, gone: Iterable[tuple[int, int]]) -> "Graph":
        drop = {(min(i, j), max(i, j)) for i, j in gone}
        return Graph(self.n, self.edges - drop)

    @cached_property
    def _distances(self) -> list[list[int]]:
        n = self.n
        dist = []
        for s in range(n):
            row = [-1] * n
            row[s] = 0
            q = deque([s])
            while q:
                v = q.popleft()
                for u in self.adj[v]:
                    if row[u] < 0:
                        row[u] = row[v] + 1
                        q.append(u)
            dist.append(row)
        return dist


# ---------------------------------------------------------------------------
# small builders
# ---------------------------------------------------------------------------


def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(n, edge_pairs(n))


def star_graph(leaves: int) -> Graph:
    """Star K_{1,leaves} centred at vertex 0."""
    return Graph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def build_t_nd(n: int, d: int) -> Graph:
    """Path on ``d`` vertices with ``(n - d) / d`` leaves hung on every path vertex."""
    if d < 3 or n < d:
        raise ValueError(f"need d >= 3 and n >= d, got n={n}, d={d}")
    if n % d:
        raise NotDivisible(f"{d} does not divide {n}")
    per = (n - d) // d
    edges = [(i, i + 1) for i in range(d - 1)]
    nxt = d
    for v in range(d):
        for _ in range(per):
            edges.append((v, nxt))
            nxt += 1
    return Graph(n, edges)


def build_comet(tail: int, pendants: int) -> Graph:
    """Path ``v_0..v_{tail-1}`` with ``pendants`` leaves on ``v_{(tail-1)/2 - 1}``."""
    if tail < 3 or tail % 2 == 0:
        raise ValueError(f"tail must be odd and >= 3, got {tail}")
    if pendants < 0:
        raise ValueError("pendants must be non-negative")
    hub = (tail - 1) // 2 - 1
    edges = [(i, i + 1) for i in range(tail - 1)]
    edges += [(hub, tail + k) for k in range(pendants)]
    return Graph(tail + pendants, edges)


# ---------------------------------------------------------------------------
# connectivity, distances
# ---------------------------------------------------------------------------


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    return all(d >= 0 for d in g._distances[0])


def is_tree(g: Graph) -> bool:
    return g.n >= 1 and g.m == g.n - 1 and is_connected(g)


def _require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise Disconnected(f"graph on {g.n} vertices is not connected")


def _require_tree(g: Graph) -> None:
    if not is_tree(g):
        raise NotATree(f"graph with n={g.n}, m={g.m} is not a tree")


def distance_matrix(g: Graph) -> list[list[int]]:
    _require_connected(g)
    return [list(row) for row in g._distances]


def diameter(g: Graph) -> int:
    _require_connected(g)
    return max((max(row) for row in g._distances), default=0)


def transmission(g: Graph) -> list[int]:
    _require_connected(g)
    return [sum(row) for row in g._distances]


def is_transmission_regular(g: Graph) -> bool:
    return len(set(transmission(g))) <= 1


def proximity_exact(g: Graph) -> Fraction:
    if g.n < 2:
        raise ValueError("proximity needs at least two vertices")
    return Fraction(min(transmission(g)), g.n - 1)


def proximity(g: Graph) -> float:
    """Minimum over vertices of the mean distance to the other vertices."""
    return float(proximity_exact(g))


def distance_laplacian(g: Graph) -> list[list[int]]:
    d = distance_matrix(g)
    t = [sum(row) for row in d]
    return [[t[i] if i == j else -d[i][j] for j in range(g.n)] for i in range(g.n)]


def distance_spectrum(g: Graph, *, method: str = "jacobi") -> np.ndarray:
    return sym_eigenvalues(distance_matrix(g), method=method)


def lambda1(g: Graph, *, method: str = "jacobi") -> float:
    if g.n < 1:
        raise ValueError("empty graph")
    return float(sym_eigenvalues(g.adjacency_matrix(), method=method)[0])


def matching_number(g: Graph) -> int:
    return matching_size(g.n, g.adj)


# ---------------------------------------------------------------------------
# Pruefer codes
# ---------------------------------------------------------------------------


def prufer_decode(code: Sequence[int], n: int | None = None) -> Graph:
    """Tree on ``len(code) + 2`` vertices encoded by ``code``."""
    if n is None:
        n = len(code) + 2
    if n < 2 or len(code) != n - 2:
        raise ValueError(f"code of length {len(code)} does not describe a tree on {n} vertices")
    degree = [1] * n
    for c in code:
        if not 0 <= c < n:
            raise LabelOutOfRange(f"label {c} outside 0..{n - 1}")
        degree[c] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for c in code:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, c))
        degree[c] -= 1
        if degree[c] == 1:
            heapq.heappush(leaves, c)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return Graph(n, edges)


def prufer_encode(t: Graph) -> list[int]:
    _require_tree(t)
    n = t.n
    if n < 2:
        raise ValueError("Pruefer codes need at least two vertices")
    degree = [len(a) for a in t.adj]
    removed = [False] * n
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    code = []
    for _ in range(n - 2):
        leaf = heapq.heappop(leaves)
        removed[leaf] = True
        nb = next(u for u in t.adj[leaf] if not removed[u])
        code.append(nb)
        degree[nb] -= 1
        if degree[nb] == 1:
            heapq.heappush(leaves, nb)
    return code


def random_tree(n: int, rng: random.Random | np.random.Generator | int | None = None) -> Graph:
    """Uniformly random labeled tree (via a random Pruefer code)."""
    if isinstance(rng, np.random.Generator):
        code = [int(x) for x in rng.integers(0, n, size=max(0, n - 2))]
    else:
        r = rng if isinstance(rng, random.Random) else random.Random(rng)
        code = [r.randrange(n) for _ in range(max(0, n - 2))]
    if n == 1:
        return Graph(1)
    return prufer_decode(code, n)


# ---------------------------------------------------------------------------
# tree polynomials
# ---------------------------------------------------------------------------


def _poly_add(a: list[int], b: list[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return out


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def matching_counts(t: Graph) -> list[int]:
    """``[N_0, N_1, ..., N_mu]``: number of matchings of each size in a tree."""
    _require_tree(t)
    n = t.n
    parent = [-1] * n
    order = []
    stack = [0]
    seen = [False] * n
    seen[0] = True
    while stack:
        v = stack.pop()
        order.append(v)
        for u in t.adj[v]:
            if not seen[u]:
                seen[u] = True
                parent[u] = v
                stack.append(u)
    # free[v]: generating polynomial of matchings in subtree(v) leaving v unmatched
    # total[v]: all matchings in subtree(v)
    free: list[list[int]] = [[1]] * n
    total: list[list[int]] = [[1]] * n
    for v in reversed(order):
        kids = [u for u in t.adj[v] if u != parent[v]]
        f = [1]
        for u in kids:
            f = _poly_mul(f, total[u])
        tot = list(f)
        for u in kids:
            # v matched to u: u's subtree with u free, other children arbitrary
            rest = [1]
            for w in kids:
                if w != u:
                    rest = _poly_mul(rest, total[w])
            tot = _poly_add(tot, [0] + _poly_mul(free[u], rest))
        free[v], total[v] = f, tot
    res = total[0]
    while len(res) > 1 and res[-1] == 0:
        res.pop()
    return res


def count_matchings(t: Graph, k: int) -> int:
    counts = matching_counts(t)
    return counts[k] if 0 <= k < len(counts) else 0


def adjacency_charpoly_tree(t: Graph) -> list[int]:
    """Coefficients (lowest degree first) of ``det(xI - A(t))`` from matching counts.

    For a forest, the coefficient of ``x^(n-2j)`` is ``(-1)^j N_j``; all other
    coefficients vanish.
    """
    counts = matching_counts(t)
    n = t.n
    coeffs = [0] * (n + 1)
    for j, nj in enumerate(counts):
        coeffs[n - 2 * j] = (-1) ** j * nj
    return coeffs


@dataclass(frozen=True)
class PeakProfile:
    adjacency_nonzero: tuple[tuple[int, int], ...]
    m: int
    p_A: int
    normalized_dist: tuple[Fraction, ...]
    n_terms: int
    p_D: int
    f: Fraction

    @property
    def adjacency_ratio(self) -> Fraction:
        return Fraction(self.p_A, self.m)

    @property
    def distance_ratio(self) -> Fraction:
        return Fraction(self.p_D, self.n_terms)


def _argmax_first(values: Sequence) -> int:
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def peak_profile(t: Graph) -> PeakProfile:
    """Peak positions of the adjacency and normalized distance coefficient sequences.

    ``p_A`` is 1-based over the non-zero adjacency coefficients ordered by
    increasing exponent; ``p_D`` is 0-based over ``d_0..d_{n-2}`` where
    ``d_k = 2^k |delta_k| / 2^(n-2)``. Ties go to the smallest position.
    """
    _require_tree(t)
    n = t.n
    if n < 3:
        raise ValueError("peak profile needs a tree on at least 3 vertices")
    cpa = adjacency_charpoly_tree(t)
    nonzero = tuple((k, c) for k, c in enumerate(cpa) if c != 0)
    m = len(nonzero)
    p_a = _argmax_first([abs(c) for _, c in nonzero]) + 1

    delta = charpoly_exact(distance_matrix(t))
    scale = 2 ** (n - 2)
    normalized = tuple(Fraction(2**k * abs(delta[k]), scale) for k in range(n - 1))
    p_d = _argmax_first(normalized)
    n_terms = n + 1
    f = abs(Fraction(p_a, m) - (1 - Fraction(p_d, n_terms)))
    return PeakProfile(nonzero, m, p_a, normalized, n_terms, p_d, f)


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------


def format_edge_list(g: Graph) -> str:
    edges = g.sorted_edges()
    lines = [f"{g.n} {len(edges)}"] + [f"{i} {j}" for i, j in edges]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    """Parse ``n m`` followed by ``m`` lines ``i j`` (i < j, lexicographic order)."""
    lines = text.splitlines()
    if not lines:
        raise ValueError("line 1: empty input")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"line 1: expected 'n m', got {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ValueError(f"line 1: expected integers, got {lines[0]!r}") from None
    edges = []
    prev = None
    for k in range(m):
        lineno = k + 2
        if lineno > len(lines):
            raise ValueError(f"line {lineno}: missing edge")
        parts = lines[lineno - 1].split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'i j'")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer vertex") from None
        if not 0 <= i < j < n:
            raise ValueError(f"line {lineno}: need 0 <= i < j < {n}, got {i} {j}")
        if prev is not None and (i, j) <= prev:
            raise ValueError(f"line {lineno}: edges not in strictly increasing order")
        prev = (i, j)
        edges.append((i, j))
    if any(ln.strip() for ln in lines[m + 1:]):
        raise ValueError(f"line {m + 2}: unexpected trailing content")
    return Graph(n, edges)
