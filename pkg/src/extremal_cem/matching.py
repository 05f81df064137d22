"""Maximum cardinality matching in general graphs (Edmonds' blossom algorithm)."""

from __future__ import annotations

from collections import deque
from typing import Sequence


def max_matching(n: int, adj: Sequence[Sequence[int]]) -> list[int]:
    """Return ``mate`` where ``mate[v]`` is v's partner or -1.

    Classic O(V^3) implementation: grow alternating trees by BFS from each
    free vertex, contracting odd cycles (blossoms) onto their base.
    """
    mate = [-1] * n
    # greedy start halves the number of augmentations in practice
    for v in range(n):
        if mate[v] == -1:
            for u in adj[v]:
                if mate[u] == -1:
                    mate[v], mate[u] = u, v
                    break

    for root in range(n):
        if mate[root] == -1:
            _augment_from(root, n, adj, mate)
    return mate


def _augment_from(root: int, n: int, adj, mate: list[int]) -> bool:
    parent = [-1] * n
    base = list(range(n))
    used = [False] * n
    used[root] = True
    queue = deque([root])

    def lca(a: int, b: int) -> int:
        seen = [False] * n
        while True:
            a = base[a]
            seen[a] = True
            if mate[a] == -1:
                break
            a = parent[mate[a]]
        while True:
            b = base[b]
            if seen[b]:
                return b
            b = parent[mate[b]]

    def mark_path(v: int, b: int, child: int, in_blossom: list[bool]) -> None:
        while base[v] != b:
            in_blossom[base[v]] = in_blossom[base[mate[v]]] = True
            parent[v] = child
            child = mate[v]
            v = parent[mate[v]]

    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if base[v] == base[u] or mate[v] == u:
                continue
            if u == root or (mate[u] != -1 and parent[mate[u]] != -1):
                cur = lca(v, u)
                in_blossom = [False] * n
                mark_path(v, cur, u, in_blossom)
                mark_path(u, cur, v, in_blossom)
                for i in range(n):
                    if in_blossom[base[i]]:
                        base[i] = cur
                        if not used[i]:
                            used[i] = True
                            queue.append(i)
            elif parent[u] == -1:
                parent[u] = v
                if mate[u] == -1:
                    # augment along the alternating path ending at u
                    while u != -1:
                        pv = parent[u]
                        nxt = mate[pv]
                        mate[u], mate[pv] = pv, u
                        u = nxt
                    return True
                used[mate[u]] = True
                queue.append(mate[u])
    return False


def matching_size(n: int, adj) -> int:
    mate = max_matching(n, adj)
    return sum(1 for v in range(n) if mate[v] > v)
