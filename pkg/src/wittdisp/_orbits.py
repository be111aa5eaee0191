"""Orbit enumeration for finite group actions given by generators."""
from collections import deque
from concurrent.futures import ThreadPoolExecutor

from .errors import ResourceError


def orbit_of(state, generators, act, cap=None):
    """Breadth-first closure of state under the generators; ResourceError above cap."""
    seen = {state}
    queue = deque([state])
    while queue:
        s = queue.popleft()
        for g in generators:
            t = act(g, s)
            if t not in seen:
                seen.add(t)
                if cap is not None and len(seen) > cap:
                    raise ResourceError(f"orbit exceeds cap {cap}")
                queue.append(t)
    return seen


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


def partition(states, generators, act, workers=1, key=None):
    """Orbits of a finite group (given by generators) on a closed list of states.

    Returns a list of orbits, each a sorted list, ordered by representative.
    The result does not depend on workers or on the order of states.
    """
    states = list(states)
    index = {s: i for i, s in enumerate(states)}
    uf = _UnionFind(len(states))

    def images(chunk):
        out = []
        for i in chunk:
            s = states[i]
            for g in generators:
                t = act(g, s)
                j = index.get(t)
                if j is None:
                    raise ValueError("state space is not closed under the action")
                out.append((i, j))
        return out

    idx = range(len(states))
    if workers and workers > 1 and len(states) > 1:
        size = max(1, len(states) // (4 * workers))
        chunks = [idx[k:k + size] for k in range(0, len(states), size)]
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(images, chunks))
    else:
        results = [images(idx)]
    for res in results:
        for i, j in res:
            uf.union(i, j)
    groups = {}
    for i in idx:
        groups.setdefault(uf.find(i), []).append(states[i])
    orbits = [sorted(g, key=key) for g in groups.values()]
    orbits.sort(key=lambda o: o[0] if key is None else key(o[0]))
    return orbits
