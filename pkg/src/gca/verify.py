"""Randomized verification suites.

Every suite takes a ``random.Random`` and a list (or generator) of instances
and returns per-check tallies.  Polynomial-heavy checks cut their words at
the first vertex whose F-polynomial size bound exceeds ``size_budget``; the
number of cut words is reported as ``truncated_words``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import matrix as mx
from .invariant import ClusterMonomial, Context, f_invariant, pairing_at
from .pattern import (
    PatternState,
    SignCoherenceViolated,
    check_dualities,
    check_fpolys,
    f_matrix_rooted,
    fpoly_size_bound,
    initial_seed_mutation_f,
    rerooted,
    walk,
)
from .poly import NotDivisible, TermLimitExceeded, term_limit
from .seed import (
    CompatibilityBroken,
    CompatiblePair,
    MutationData,
    NotSkewSymmetrizable,
    Seed,
    YSeed,
    mutate_compatible_pair,
    mutate_seed,
    mutate_y_seed,
    reduce_word,
    skew_symmetrizer,
)
from .tropical import SquareCompletion, TropicalPointX, TropicalPointY, btilde_at, phi, psi, y_step

SUITES = ("involution", "epsilon", "laurent", "dualities", "symmetry", "sign-coherence",
          "initial-seed", "tropical", "invariant")


@dataclass
class Instance:
    md: MutationData
    Btilde: np.ndarray
    pair: CompatiblePair | None = None
    completion: SquareCompletion | None = None
    name: str = "random"

    @property
    def B(self) -> np.ndarray:
        return self.Btilde[: self.md.n]

    def describe(self) -> dict:
        return {"name": self.name, "r": list(self.md.r), "Btilde": mx.to_list(self.Btilde)}

    def principal(self) -> Instance:
        """Same principal part and r with principal coefficients and the standard Lambda."""
        md = MutationData(self.md.n, 2 * self.md.n, self.md.r)
        cp = CompatiblePair.principal(md, self.B)
        return Instance(md, cp.Btilde, cp, None, self.name + "/principal")


# -- random instances --------------------------------------------------------


def random_instance(rng: random.Random, max_n: int = 4, principal: bool = False) -> Instance:
    """n in [1,max_n], m in [n,n+2], entries in [-2,2], r_i in [1,3].

    Proposal: pick d_i in {1,2}, draw b_ij for i<j and set b_ji = -d_i b_ij / d_j;
    proposals that are non-integral or leave [-2,2] are redrawn, and the
    result is re-validated by the skew-symmetrizer search.
    """
    while True:
        n = rng.randint(1, max_n)
        d = [rng.choice((1, 2)) for _ in range(n)]
        B = mx.zeros(n, n)
        ok = True
        for i in range(n):
            for j in range(i + 1, n):
                b = rng.randint(-2, 2)
                other = -d[i] * b
                if other % d[j] or abs(other // d[j]) > 2:
                    ok = False
                B[i, j] = b
                B[j, i] = other // d[j] if ok else 0
        if not ok:
            continue
        try:
            skew_symmetrizer(B)
        except NotSkewSymmetrizable:
            continue
        r = tuple(rng.randint(1, 3) for _ in range(n))
        if principal:
            return Instance(MutationData(n, n, r), B).principal()
        m = rng.randint(n, n + 2)
        P = mx.imat([[rng.randint(-2, 2) for _ in range(n)] for _ in range(m - n)]).reshape(m - n, n)
        return Instance(MutationData(n, m, r), np.vstack([B, P]) if m > n else B)


def random_word(rng: random.Random, n: int, depth: int, min_len: int = 0) -> tuple[int, ...]:
    return tuple(rng.randrange(n) for _ in range(rng.randint(min_len, depth)))


def feasible_prefix(inst: Instance, word, budget: int, extra=()) -> tuple[int, ...]:
    """Longest prefix p of ``word`` whose polynomial walk along p + extra stays under the size budget."""
    word, extra = tuple(word), tuple(extra)
    for cut in range(len(word), -1, -1):
        if fpoly_size_bound(inst.md, inst.Btilde, (), word[:cut] + extra) <= budget:
            return word[:cut]
    return ()


# -- tallies -----------------------------------------------------------------


@dataclass
class Tally:
    counts: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    first: dict = field(default_factory=dict)
    truncated_words: int = 0

    def record(self, name: str, ok: bool, witness: Callable[[], object] | object = None):
        self.counts[name] = self.counts.get(name, 0) + 1
        if not ok:
            self.failures[name] = self.failures.get(name, 0) + 1
            if name not in self.first:
                self.first[name] = witness() if callable(witness) else witness

    def merge(self, other: "Tally") -> None:
        for name, c in other.counts.items():
            self.counts[name] = self.counts.get(name, 0) + c
        for name, c in other.failures.items():
            self.failures[name] = self.failures.get(name, 0) + c
            self.first.setdefault(name, other.first[name])
        self.truncated_words += other.truncated_words

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        checks = {}
        for name in sorted(self.counts):
            entry = {"count": self.counts[name], "failures": self.failures.get(name, 0)}
            if name in self.first:
                entry["first_failure"] = self.first[name]
            checks[name] = entry
        return {"pass": self.passed, "checks": checks, "truncated_words": self.truncated_words}


def _w(word) -> list[int]:
    return [k + 1 for k in word]


def _cut(tally: Tally, inst: Instance, word, budget: int, extra=()) -> tuple[int, ...]:
    cut = feasible_prefix(inst, word, budget, extra)
    if len(cut) < len(word):
        tally.truncated_words += 1
    return cut


# -- suites ------------------------------------------------------------------


def suite_involution(rng, instances, depth, tally, budget):
    for inst in instances:
        md = inst.md
        word = random_word(rng, md.n, depth)
        k = rng.randrange(md.n)
        word = _cut(tally, inst, word, budget, (k,))
        s = Seed.initial(md, inst.Btilde)
        ys = YSeed.langlands_dual(md, inst.Btilde)
        for j in word:
            s = mutate_seed(s, j)
            ys = mutate_y_seed(ys, j)
        back = mutate_seed(mutate_seed(s, k), k)
        tally.record("seed mutation is an involution", back == s,
                     lambda: {"instance": inst.describe(), "word": _w(word), "k": k + 1})
        yback = mutate_y_seed(mutate_y_seed(ys, k), k)
        tally.record("Y-seed mutation is an involution", yback == ys,
                     lambda: {"instance": inst.describe(), "word": _w(word), "k": k + 1})
        tally.record("Y-seed matrix stays -Btilde^T", mx.equal(ys.Bhat, -s.Btilde.T),
                     lambda: {"instance": inst.describe(), "word": _w(word)})
        cp = inst.pair if inst.pair is not None else inst.principal().pair
        for j in word:
            cp = mutate_compatible_pair(cp, j)
        tally.record("compatible-pair mutation is an involution",
                     mutate_compatible_pair(mutate_compatible_pair(cp, k), k) == cp,
                     lambda: {"instance": inst.describe(), "word": _w(word), "k": k + 1})


def suite_epsilon(rng, instances, depth, tally, budget):
    for inst in instances:
        md = inst.md
        *pre, k = random_word(rng, md.n, depth, 1)
        pre = _cut(tally, inst, pre, budget, (k,))
        word = tuple(pre) + (k,)
        s = Seed.initial(md, inst.Btilde)
        ys = YSeed.langlands_dual(md, inst.Btilde)
        cp = inst.pair if inst.pair is not None else inst.principal().pair
        st = PatternState.root(md, inst.Btilde)
        for j in pre:
            s, ys, cp, st = mutate_seed(s, j), mutate_y_seed(ys, j), mutate_compatible_pair(cp, j), st.step(j)
        wit = lambda: {"instance": inst.describe(), "word": _w(word)}  # noqa: E731
        tally.record("seed mutation independent of eps", mutate_seed(s, k, 1) == mutate_seed(s, k, -1), wit)
        tally.record("Y-seed mutation independent of eps", mutate_y_seed(ys, k, 1) == mutate_y_seed(ys, k, -1), wit)
        tally.record("compatible-pair mutation independent of eps",
                     mutate_compatible_pair(cp, k, 1) == mutate_compatible_pair(cp, k, -1), wit)
        a, b = st.step(k, 1), st.step(k, -1)
        same = all(mx.equal(getattr(a, f), getattr(b, f)) for f in ("C_plus", "C_minus", "G", "Gext", "Fmat"))
        tally.record("pattern step independent of eps", same and a.Fpolys == b.Fpolys, wit)


def suite_laurent(rng, instances, depth, tally, budget):
    for inst in instances:
        md = inst.md
        word = _cut(tally, inst, random_word(rng, md.n, depth, depth), budget)
        s = Seed.initial(md, inst.Btilde)
        for i, k in enumerate(word):
            try:
                s = mutate_seed(s, k)
                ok, wit = True, None
            except TermLimitExceeded:
                tally.truncated_words += 1
                break
            except NotDivisible as e:
                ok, wit = False, {"instance": inst.describe(), "word": _w(word[: i + 1]),
                                  "remainder": e.remainder.text(max_terms=10), "reason": e.reason}
            tally.record("cluster variable is a Laurent polynomial", ok, wit)
            if not ok:
                break


def suite_dualities(rng, instances, depth, tally, budget):
    for inst in instances:
        md = inst.md
        word = random_word(rng, md.n, depth)
        state = walk(md, inst.Btilde, word, polys=False)
        for c in check_dualities(state):
            tally.record(f"[{c['family']}] {c['name']}", c["pass"],
                         lambda c=c: {"instance": inst.describe(), "word": _w(word), "witness": c.get("witness")})
        # F-matrix recursion against the maximal monomials at every visited vertex
        pword = _cut(tally, inst, word, budget)
        st = PatternState.root(md, inst.Btilde)
        for k in pword:
            st = st.step(k)
            for c in check_fpolys(st):
                tally.record(f"[fpoly] {c['name'].split(' ', 1)[1]}", c["pass"],
                             lambda c=c, st=st: {"instance": inst.describe(), "word": _w(st.word),
                                                 "witness": c.get("witness")})


def suite_symmetry(rng, instances, depth, tally, budget, pairs_per_instance=50):
    for inst in instances:
        md = inst.md
        D = skew_symmetrizer(inst.B)
        for _ in range(pairs_per_instance):
            t, t2 = random_word(rng, md.n, depth), random_word(rng, md.n, depth)
            F1 = f_matrix_rooted(md, inst.Btilde, t, t2)
            F2 = f_matrix_rooted(md, inst.Btilde, t2, t)
            tally.record("D F_t'^t = (F_t^t')^T D", mx.equal(D.dot(F1), F2.T.dot(D)),
                         lambda: {"instance": inst.describe(), "t": _w(t), "t'": _w(t2),
                                  "F_t'^t": mx.to_list(F1), "F_t^t'": mx.to_list(F2)})
        # the same identity read off the F-invariant of two cluster variables
        pr = inst.principal()
        ctx = Context(pr.md, pr.Btilde, pr.pair)
        for _ in range(3):
            t, t2 = random_word(rng, md.n, depth), random_word(rng, md.n, depth)
            if max(fpoly_size_bound(pr.md, pr.Btilde, a, b) for a, b in ((t, t2), (t2, t))) > budget:
                tally.truncated_words += 1
                continue
            F1 = f_matrix_rooted(md, inst.Btilde, t, t2)
            i, j = rng.randrange(md.n), rng.randrange(md.n)
            val = f_invariant(ctx, ctx.variable(t, i), ctx.variable(t2, j), t)
            ok = val == int(D[i, i]) * int(F1[i, j])
            tally.record("F-invariant recovers d_i f_ij", ok,
                         lambda: {"instance": inst.describe(), "t": _w(t), "t'": _w(t2), "i": i + 1, "j": j + 1,
                                  "f_invariant": val, "d_i f_ij": int(D[i, i]) * int(F1[i, j])})


def suite_sign_coherence(rng, instances, depth, tally, budget):
    for inst in instances:
        md = inst.md
        word = random_word(rng, md.n, depth)
        st = PatternState.root(md, inst.Btilde, polys=False)
        for k in word:
            try:
                st = st.step(k)
                ok, wit = True, None
            except SignCoherenceViolated as e:
                ok, wit = False, {"instance": inst.describe(), "word": _w(e.word), "column": list(e.column)}
            tally.record("c-vectors sign-coherent", ok, wit)
            if not ok:
                break
            for j in range(md.n):
                cols = (st.C_plus[:, j], st.C_minus[:, j])
                tally.record("c-vectors sign-coherent", all(mx.sign_coherent(c) is not None for c in cols),
                             lambda: {"instance": inst.describe(), "word": _w(st.word), "column": j + 1})


def suite_initial_seed(rng, instances, depth, tally, budget):
    for inst in instances:
        md = inst.md
        t = reduce_word(random_word(rng, md.n, depth))
        k = rng.randrange(md.n)
        direct = f_matrix_rooted(md, inst.Btilde, t + (k,), ())
        for eps in (1, -1):
            got = initial_seed_mutation_f(md, inst.Btilde, t, k, eps)
            tally.record("initial-seed mutation formula", mx.equal(got, direct),
                         lambda: {"instance": inst.describe(), "t": _w(t), "k": k + 1, "eps": eps,
                                  "formula": mx.to_list(got), "recomputed": mx.to_list(direct)})


def suite_tropical(rng, instances, depth, tally, budget, points=4):
    for inst in instances:
        md = inst.md
        sq = inst.completion or SquareCompletion.default(md, inst.Btilde)
        pr = inst if inst.pair is not None else inst.principal()
        for _ in range(points):
            base = random_word(rng, md.n, depth)
            k = rng.randrange(md.n)
            a = TropicalPointX(md, inst.Btilde, base, [rng.randint(-3, 3) for _ in range(md.m)])
            lhs, rhs = phi(a.transport(k), sq), phi(a, sq).transport(k)
            tally.record("Phi commutes with mutation", lhs.vector == rhs.vector,
                         lambda: {"instance": inst.describe(), "base": _w(base), "k": k + 1,
                                  "a": list(a.vector), "phi_then_mu": list(rhs.vector), "mu_then_phi": list(lhs.vector)})
            g = TropicalPointY(pr.md, pr.Btilde, base, [rng.randint(-3, 3) for _ in range(pr.md.m)])
            lhs, rhs = psi(g.transport(k), pr.pair), psi(g, pr.pair).transport(k)
            tally.record("Psi commutes with mutation", lhs.vector == rhs.vector,
                         lambda: {"instance": pr.describe(), "base": _w(base), "k": k + 1,
                                  "g": list(g.vector), "psi_then_mu": list(rhs.vector), "mu_then_psi": list(lhs.vector)})
            back = a.transport(k).transport(k)
            tally.record("tropical transport round trip", back.vector == a.vector, None)
            # extended g-vectors of a cluster variable form a tropical Y-point
            target = random_word(rng, md.n, depth)
            i = rng.randrange(md.n)
            g0 = rerooted(md, inst.Btilde, base, target).Gext[:, i]
            g1 = rerooted(md, inst.Btilde, reduce_word(base + (k,)), target).Gext[:, i]
            want = y_step(md, btilde_at(md, inst.Btilde, base), [int(v) for v in g0], k)
            tally.record("extended g-vectors satisfy the Y-recurrence", tuple(int(v) for v in g1) == want,
                         lambda: {"instance": inst.describe(), "base": _w(base), "target": _w(target),
                                  "i": i + 1, "k": k + 1})


def suite_invariant(rng, instances, depth, tally, budget, vertices=4):
    for inst in instances:
        pr = inst if inst.pair is not None else inst.principal()
        md = pr.md
        n = md.n
        ctx = Context(md, pr.Btilde, pr.pair)
        wu, wv = random_word(rng, n, depth), random_word(rng, n, depth)
        verts = [random_word(rng, n, depth) for _ in range(vertices)]
        if max(fpoly_size_bound(md, pr.Btilde, t, w) for t in verts for w in (wu, wv)) > budget:
            tally.truncated_words += 1
            continue
        hu = [rng.randint(0, 3) for _ in range(md.m)]
        hv = [rng.randint(0, 3) for _ in range(md.m)]
        u, v = ClusterMonomial(ctx, wu, hu), ClusterMonomial(ctx, wv, hv)
        wit = lambda: {"instance": pr.describe(), "u": u.describe(), "v": v.describe(),  # noqa: E731
                       "vertices": [_w(t) for t in verts]}
        vals = [pairing_at(ctx, u, v, t) for t in verts]
        tally.record("pairing independent of vertex", len(set(vals)) == 1, lambda: {**wit(), "values": vals})
        fvals = [f_invariant(ctx, u, v, t) for t in verts]
        tally.record("F-invariant independent of vertex", len(set(fvals)) == 1, lambda: {**wit(), "values": fvals})
        tally.record("F-invariant symmetric", f_invariant(ctx, u, v) == f_invariant(ctx, v, u), wit)
        t = verts[0]
        Fm = rerooted(md, pr.Btilde, t, wu).Fmat
        for i in range(md.m):
            got = f_invariant(ctx, ctx.variable(t, i), u, t)
            want = ctx.d[i] * sum(int(Fm[i, j]) * hu[j] for j in range(n)) if i < n else 0
            tally.record("(x_i || u)_F = d_i f_i", got == want, lambda: {**wit(), "i": i + 1, "got": got, "want": want})
        lin = sum(hu[j] * f_invariant(ctx, v, ctx.variable(wu, j), t) for j in range(md.m))
        tally.record("F-invariant linear in exponents", f_invariant(ctx, v, u, t) == lin, wit)
        tally.record("(x || x)_F = 0 in one cluster",
                     f_invariant(ctx, ClusterMonomial(ctx, wu, hv), u, t) == 0, wit)


RUNNERS = {
    "involution": suite_involution,
    "epsilon": suite_epsilon,
    "laurent": suite_laurent,
    "dualities": suite_dualities,
    "symmetry": suite_symmetry,
    "sign-coherence": suite_sign_coherence,
    "initial-seed": suite_initial_seed,
    "tropical": suite_tropical,
    "invariant": suite_invariant,
}

# suites whose Lambda/Phi checks need principal-coefficient instances
_PRINCIPAL = {"invariant"}


def run_suite(name: str, trials: int, depth: int, rand_seed: int, instances: Iterable[Instance] | None = None,
              size_budget: int = 400, max_n: int = 4, term_cap: int = 4000) -> dict:
    """Run one suite.  Instances whose polynomials outgrow ``term_cap`` terms are
    abandoned (counted in ``oversize_instances``) rather than allowed to stall the run."""
    if name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    rng = random.Random(f"{name}:{rand_seed}")
    if instances is None:
        inst_rng = random.Random(f"instances:{name}:{rand_seed}")
        insts = [random_instance(inst_rng, max_n, principal=name in _PRINCIPAL) for _ in range(trials)]
    else:
        insts = [inst for inst in instances for _ in range(trials)]
    tally = Tally()
    oversize = 0
    for inst in insts:
        try:
            part = _run_shrinking(RUNNERS[name], rng, inst, depth, size_budget, term_cap)
            if part is None:
                oversize += 1
            else:
                tally.merge(part)
        except CompatibilityBroken as e:
            tally.record("compatible pair stays compatible", False,
                         {"instance": inst.describe(), "error": str(e), "witness": e.witness})
        except SignCoherenceViolated as e:
            tally.record("c-vectors sign-coherent", False,
                         {"instance": inst.describe(), "word": _w(e.word), "column": list(e.column)})
    out = {"suite": name, "trials": len(insts), "depth": depth, "rand_seed": rand_seed, "oversize_instances": oversize}
    out.update(tally.to_json())
    return out


def _run_shrinking(runner, rng, inst, depth, size_budget, term_cap):
    """Run one instance; if a polynomial outgrows ``term_cap``, replay the same
    random draws with a smaller size budget (hence shorter words).  Returns the
    instance's tally, or None if even the smallest budget overflows."""
    state = rng.getstate()
    budget = size_budget
    while True:
        rng.setstate(state)
        part = Tally()
        try:
            with term_limit(term_cap):
                runner(rng, [inst], depth, part, budget)
            if budget < size_budget:
                part.truncated_words = max(part.truncated_words, 1)
            return part
        except TermLimitExceeded:
            if budget <= 1:
                return None
            budget = max(1, budget // 8)


def run(suite: str, trials: int, depth: int, rand_seed: int, instances=None, size_budget: int = 400) -> dict:
    names = SUITES if suite == "all" else (suite,)
    reports = [run_suite(s, trials, depth, rand_seed, instances, size_budget) for s in names]
    return {"pass": all(r["pass"] for r in reports), "suites": reports}
