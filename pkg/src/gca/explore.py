"""Breadth-first exploration of the exchange graph, and the finite-type enumeration checks."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from . import matrix as mx
from .pattern import rerooted
from .poly import LaurentPoly
from .seed import MutationData, Seed, mutate_seed


class ExplorationBudgetExceeded(Exception):
    pass


@dataclass
class ExchangeGraph:
    md: MutationData
    Btilde0: object
    unlabeled: bool
    seeds: list[Seed] = field(default_factory=list)
    words: list[tuple[int, ...]] = field(default_factory=list)
    edges: list[tuple[int, int, int]] = field(default_factory=list)
    closed: bool = False

    @property
    def truncated(self) -> bool:
        return not self.closed

    def clusters(self) -> list[frozenset]:
        n = self.md.n
        seen, out = set(), []
        for s in self.seeds:
            c = frozenset(s.x[:n])
            if c not in seen:
                seen.add(c)
                out.append(c)
        return out

    def variables(self) -> list[LaurentPoly]:
        n = self.md.n
        seen, out = set(), []
        for s in self.seeds:
            for x in s.x[:n]:
                if x not in seen:
                    seen.add(x)
                    out.append(x)
        return out

    def occurrences(self) -> dict[LaurentPoly, list[tuple[tuple[int, ...], int]]]:
        """Each unfrozen variable mapped to the (vertex word, index) pairs where it sits."""
        occ: dict = {}
        for s, w in zip(self.seeds, self.words):
            for i, x in enumerate(s.x[: self.md.n]):
                occ.setdefault(x, []).append((w, i))
        return occ

    def find_cluster(self, polys: Sequence[LaurentPoly]) -> tuple[int, ...] | None:
        want = set(polys)
        for s, w in zip(self.seeds, self.words):
            if want <= set(s.x):
                return w
        return None

    def to_json(self, text: bool = False) -> dict:
        out = {
            "closed": self.closed,
            "truncated": self.truncated,
            "unlabeled": self.unlabeled,
            "num_seeds": len(self.seeds),
            "num_edges": len(self.edges),
            "num_clusters": len(self.clusters()),
            "variables": [x.text() for x in self.variables()],
            "clusters": sorted(sorted(x.text() for x in c) for c in self.clusters()),
            "seed_words": [[k + 1 for k in w] for w in self.words],
        }
        return out


def explore(md: MutationData, Btilde0, budget: int = 200, unlabeled: bool = False) -> ExchangeGraph:
    """BFS from the initial seed; stops (closed=False) once ``budget`` seeds are visited."""
    if budget < 1:
        raise ValueError("budget must be positive")
    root = Seed.initial(md, Btilde0)
    g = ExchangeGraph(md, mx.imat(Btilde0), unlabeled)
    index = {root.key(unlabeled): 0}
    g.seeds.append(root)
    g.words.append(())
    queue = deque([0])
    seen_edges = set()
    while queue:
        i = queue.popleft()
        s, w = g.seeds[i], g.words[i]
        for k in range(md.n):
            if w and w[-1] == k:
                # the parent; record the edge only once
                continue
            t = mutate_seed(s, k)
            key = t.key(unlabeled)
            j = index.get(key)
            if j is None:
                if len(g.seeds) >= budget:
                    return g
                j = len(g.seeds)
                index[key] = j
                g.seeds.append(t)
                g.words.append(w + (k,))
                queue.append(j)
            if frozenset((i, j)) not in seen_edges:
                seen_edges.add(frozenset((i, j)))
                g.edges.append((i, j, k))
    g.closed = True
    return g


def explore_or_raise(md: MutationData, Btilde0, budget: int, unlabeled: bool = False) -> ExchangeGraph:
    g = explore(md, Btilde0, budget, unlabeled)
    if not g.closed:
        raise ExplorationBudgetExceeded(f"exchange graph not closed within {budget} seeds")
    return g


def cluster_monomials(g: ExchangeGraph, bound: int) -> set[LaurentPoly]:
    """All unfrozen cluster monomials with exponents <= bound, as Laurent polynomials."""
    n = g.md.n
    out = set()
    for c in g.clusters():
        xs = sorted(c, key=lambda p: sorted(p.terms.items()))
        pows = [[x.ring.one()] for x in xs]
        for p, x in zip(pows, xs):
            for _ in range(bound):
                p.append(p[-1] * x)
        for h in product(range(bound + 1), repeat=n):
            mono = g.md.xring.one()
            for p, e in zip(pows, h):
                mono = mono * p[e]
            out.add(mono)
    return out


# -- f-vector theorems on a closed graph -------------------------------------


def _check(name, ok, witness=None):
    out = {"name": name, "pass": bool(ok)}
    if not ok and witness is not None:
        out["witness"] = witness
    return out


def check_fvector_theorems(g: ExchangeGraph, max_repeats: int = 200) -> list[dict]:
    """f-vector criteria for cluster membership and compatibility, and the repeats identity.

    Membership and compatibility are decided by polynomial equality within the
    enumerated graph, so both directions are only meaningful when ``g.closed``.
    """
    md, B0 = g.md, g.Btilde0
    n = md.n
    initial = set(Seed.initial(md, B0).x[:n])
    clusters = g.clusters()
    checks = []
    for s, w in zip(g.seeds, g.words):
        F = rerooted(md, B0, (), w).Fmat
        for i in range(n):
            x = s.x[i]
            zero_col = all(F[k, i] == 0 for k in range(n))
            member = x in initial
            if g.closed or member:
                checks.append(_check(f"f_{i + 1} at {[k + 1 for k in w]} is zero iff initial",
                                     zero_col == member, {"column": [int(v) for v in F[:, i]], "initial": member}))
            for k in range(n):
                xk = Seed.initial(md, B0).x[k]
                compatible = any(x in c and xk in c for c in clusters)
                if g.closed or compatible:
                    ok = (F[k, i] == 0) == compatible
                    checks.append(_check(f"f_{k + 1},{i + 1} at {[q + 1 for q in w]} zero iff compatible", ok,
                                         {"entry": int(F[k, i]), "compatible": compatible}))
    occ = g.occurrences()
    variables = list(occ)
    count = 0
    for X in variables:
        for Y in variables:
            ox, oy = occ[X][:2], occ[Y][:2]
            for (t, i), (s, k) in product(ox, ox):
                for (t2, j), (s2, l) in product(oy, oy):
                    if count >= max_repeats:
                        return checks
                    count += 1
                    a = int(rerooted(md, B0, t, t2).Fmat[i, j])
                    b = int(rerooted(md, B0, s, s2).Fmat[k, l])
                    ok = a * md.r[k] == b * md.r[i]
                    checks.append(_check("repeated variables give equal scaled f-entries", ok,
                                         {"t": [q + 1 for q in t], "i": i + 1, "t'": [q + 1 for q in t2], "j": j + 1,
                                          "s": [q + 1 for q in s], "k": k + 1, "s'": [q + 1 for q in s2], "l": l + 1,
                                          "f": a, "f'": b}))
    return checks
