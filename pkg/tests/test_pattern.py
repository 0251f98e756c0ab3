import random

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings, strategies as st

from gca import matrix as mx
from gca.pattern import (
    HypothesisUnmet,
    PatternState,
    c_step,
    check_dualities,
    check_fpolys,
    f_matrix_rooted,
    f_pattern_scale_invariance,
    fpoly_size_bound,
    g_step,
    g_step_general,
    initial_seed_mutation_f,
    rerooted,
    walk,
)
from gca.poly import TermLimitExceeded, ZSymbol, term_limit
from gca.seed import MutationData, Seed, mutate_seed_along, skew_symmetrizer
from gca.verify import random_instance

from conftest import to_sympy

seeds = st.integers(0, 10 ** 6)
words = st.lists(st.integers(0, 3), max_size=6)


def inst_and_word(s, word, max_n=3, principal=False):
    inst = random_instance(random.Random(s), max_n, principal)
    return inst, tuple(k % inst.md.n for k in word)


def test_root_state(rank2_r12):
    md, B = rank2_r12
    s = PatternState.root(md, B)
    assert mx.equal(s.C_plus, mx.eye(2)) and mx.equal(s.G, mx.eye(2))
    assert mx.equal(s.Gext, mx.eye(2)) and mx.equal(s.Fmat, mx.zeros(2, 2))
    assert all(F.is_one() for F in s.Fpolys)
    assert all(c["pass"] for c in check_dualities(s))


def test_rank2_hand_values(rank2_r12):
    md, B = rank2_r12
    s1 = walk(md, B, [0])
    assert mx.to_list(s1.C_plus) == [[-1, 0], [0, 1]]
    s2 = walk(md, B, [1])
    # [-b_12]_+ = 1, so the g-vector picks up r_2 * g_1 = (2, 0)
    assert [int(v) for v in s2.G[:, 1]] == [2, -1]
    y = md.yhat_ring
    assert s2.Fpolys[1] == y.one() + y.z(ZSymbol(2, 1)) * y.var(1) + y.var(1) ** 2
    assert [int(v) for v in s2.Fmat[:, 1]] == [0, 2]


def test_g_vector_is_degree_of_cluster_variable(rank2_r12):
    md, B = rank2_r12
    x = mutate_seed_along(Seed.initial(md, B), [1]).x[1]
    # x'_2 = x2^-1 (x1^2 + z x1 + 1): leading x-degree in the dominance sense is (2, -1)
    assert (2, -1) in x.support()
    assert walk(md, B, [1]).G[:, 1].tolist() == [2, -1]


@settings(max_examples=40)
@given(seeds, words)
def test_separation_formula(s, word):
    """x_{i;t} = x^{g~_i} F_i(yhat -> x^{b~_j}) with frozen rows."""
    inst, word = inst_and_word(s, word)
    md = inst.md
    assume(fpoly_size_bound(md, inst.Btilde, (), word) <= 200)
    with term_limit(3000):
        try:
            st_ = walk(md, inst.Btilde, word)
            seed = mutate_seed_along(Seed.initial(md, inst.Btilde), word)
        except TermLimitExceeded:
            assume(False)
    images = [[int(v) for v in inst.Btilde[:, j]] for j in range(md.n)]
    for i in range(md.m):
        g = [int(v) for v in st_.Gext[:, i]]
        F = st_.Fpolys[i].substitute_monomials(md.xring, images) if i < md.n else md.xring.one()
        assert seed.x[i] == md.xring.monomial(g) * F


@given(seeds, words)
def test_dualities_hold(s, word):
    inst, word = inst_and_word(s, word, 4)
    bad = [c for c in check_dualities(walk(inst.md, inst.Btilde, word, polys=False)) if not c["pass"]]
    assert not bad, bad


@settings(max_examples=40)
@given(seeds, words)
def test_fpolys_consistent_with_fmatrix(s, word):
    inst, word = inst_and_word(s, word)
    assume(fpoly_size_bound(inst.md, inst.Btilde, (), word) <= 200)
    st_ = PatternState.root(inst.md, inst.Btilde)
    with term_limit(3000):
        try:
            for k in word:
                st_ = st_.step(k)
                assert all(c["pass"] for c in check_fpolys(st_))
                assert np.all(st_.Fmat >= 0)
        except TermLimitExceeded:
            assume(False)


@settings(max_examples=40)
@given(seeds, words)
def test_size_bound_dominates_support(s, word):
    inst, word = inst_and_word(s, word)
    bound = fpoly_size_bound(inst.md, inst.Btilde, (), word)
    assume(bound <= 200)
    st_ = walk(inst.md, inst.Btilde, word)
    assert all(len(F.support()) <= bound for F in st_.Fpolys)


@given(seeds, words, st.integers(0, 3))
def test_eps_independence_and_g_formulas(s, word, k):
    inst, word = inst_and_word(s, word, 4)
    md = inst.md
    k %= md.n
    st_ = walk(md, inst.Btilde, word, polys=False)
    Bt = st_.Bt
    for eps in (1, -1):
        assert mx.equal(c_step(md, Bt, st_.C_plus, k, eps), c_step(md, Bt, st_.C_plus, k))
        assert mx.equal(g_step_general(md, Bt, st_.C_plus, st_.G, st_.B0, k, eps),
                        g_step(md, Bt, st_.C_plus, st_.G, k))
    a, b = st_.step(k, 1), st_.step(k, -1)
    for f in ("C_plus", "C_minus", "G", "Gext", "Fmat"):
        assert mx.equal(getattr(a, f), getattr(b, f))


@given(seeds, words)
def test_gext_block_shape_and_sign_coherence(s, word):
    inst, word = inst_and_word(s, word, 4)
    md = inst.md
    st_ = PatternState.root(md, inst.Btilde, polys=False)
    for k in word:
        st_ = st_.step(k)
        n = md.n
        assert mx.equal(st_.Gext[:n, :n], st_.G)
        assert np.all(st_.Gext[:n, n:] == 0)
        assert mx.equal(st_.Gext[n:, n:], mx.eye(md.m - n))
        for j in range(n):
            assert mx.sign_coherent(st_.C_plus[:, j]) is not None


@given(seeds, words, words)
def test_f_symmetry_rerooted(s, w1, w2):
    inst, w1 = inst_and_word(s, w1, 4)
    w2 = tuple(k % inst.md.n for k in w2)
    D = skew_symmetrizer(inst.B)
    F1 = f_matrix_rooted(inst.md, inst.Btilde, w1, w2)
    F2 = f_matrix_rooted(inst.md, inst.Btilde, w2, w1)
    assert mx.equal(D.dot(F1), F2.T.dot(D))


@given(seeds, words, st.integers(0, 3))
def test_initial_seed_mutation(s, word, k):
    inst, word = inst_and_word(s, word, 4)
    k %= inst.md.n
    direct = f_matrix_rooted(inst.md, inst.Btilde, word + (k,), ())
    for eps in (1, -1):
        assert mx.equal(initial_seed_mutation_f(inst.md, inst.Btilde, word, k, eps), direct)


def test_initial_seed_mutation_at_root(rank2_r12):
    md, B = rank2_r12
    for k in range(2):
        assert mx.equal(initial_seed_mutation_f(md, B, (), k), f_matrix_rooted(md, B, (k,), ()))


def test_scale_invariance():
    mdA = MutationData(2, 2, (1, 2))
    mdB = MutationData(2, 2, (1, 1))
    words = [tuple(random.Random(i).randrange(2) for _ in range(i % 7)) for i in range(20)]
    out = f_pattern_scale_invariance(mdA, [[0, -1], [1, 0]], mdB, [[0, -2], [1, 0]], words)
    assert all(c["pass"] for c in out)
    one = [f_pattern_scale_invariance(MutationData(1, 1, (2,)), [[0]], MutationData(1, 1, (1,)), [[0]], [(0,), ()])]
    assert all(c["pass"] for c in one[0])
    with pytest.raises(HypothesisUnmet):
        f_pattern_scale_invariance(mdA, [[0, -1], [1, 0]], mdB, [[0, -1], [1, 0]], words)


def test_rerooted_round_trip(a2):
    md, B = a2
    st_ = rerooted(md, B, (0, 1), (0, 1))
    assert mx.equal(st_.C_plus, mx.eye(2))
    assert mx.equal(rerooted(md, B, (), (0, 1)).Btilde, walk(md, B, (0, 1)).Btilde)


def test_to_json(rank2_r12):
    md, B = rank2_r12
    js = walk(md, B, [1]).to_json()
    assert js["vertex_word"] == [2]
    assert js["fpolys"] == ["1", "1 + z[2,1]*y2 + y2^2"] or js["fpolys"][1].startswith("y2^2")
    assert set(js["matrices"]) == {"Btilde", "C_plus", "C_minus", "G", "Gext", "F"}
