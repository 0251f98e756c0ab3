import random
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gca import matrix as mx
from gca.pattern import rerooted
from gca.poly import PositiveFraction, ZSymbol
from gca.seed import CompatiblePair, MutationData, mutate_matrix, skew_symmetrizer
from gca.seedfile import load_seed
from gca.tropical import (
    PointedElement,
    RankDeficient,
    SquareCompletion,
    TropicalPointX,
    TropicalPointY,
    btilde_at,
    dominance_leq,
    fvec_of_pointed,
    is_bipointed,
    phi,
    psi,
    x_step,
    y_step,
)
from gca.verify import random_instance, random_word

seeds = st.integers(0, 10 ** 6)


def trop_y_oracle(r, Bt, g, k):
    # y'_i = y_i y_k^[r_k bhat_ki]_+ (sum_s z y_k^s)^(-bhat_ki), bhat_ki = -b_ik; max-plus
    out = []
    for i in range(len(g)):
        if i == k:
            out.append(-g[k])
            continue
        bhat = -int(Bt[i][k])
        zsum = max(s * g[k] for s in range(r[k] + 1))
        out.append(g[i] + max(r[k] * bhat, 0) * g[k] - bhat * zsum)
    return tuple(out)


def trop_x_oracle(r, Bt, a, k):
    # x'_k = x_k^-1 sum_s z up^s down^(r_k - s)
    up = sum(max(int(Bt[j][k]), 0) * a[j] for j in range(len(a)))
    down = sum(max(-int(Bt[j][k]), 0) * a[j] for j in range(len(a)))
    out = list(a)
    out[k] = -a[k] + max(s * up + (r[k] - s) * down for s in range(r[k] + 1))
    return tuple(out)


@given(seeds, st.lists(st.integers(-4, 4), min_size=6, max_size=6), st.integers(0, 3))
def test_steps_match_tropicalized_exchange(s, vec, k):
    inst = random_instance(random.Random(s), 4)
    md = inst.md
    k %= md.n
    v = vec[: md.m] + [0] * (md.m - len(vec))
    assert y_step(md, inst.Btilde, v, k) == trop_y_oracle(md.r, inst.Btilde, v, k)
    assert x_step(md, inst.Btilde, v, k) == trop_x_oracle(md.r, inst.Btilde, v, k)


@given(seeds, st.lists(st.integers(0, 3), max_size=6), st.integers(0, 3))
def test_transport_round_trip_and_at(s, word, k):
    inst = random_instance(random.Random(s), 4)
    md = inst.md
    base = tuple(j % md.n for j in word)
    k %= md.n
    rng = random.Random(s + 1)
    for cls in (TropicalPointX, TropicalPointY):
        p = cls(md, inst.Btilde, base, [rng.randint(-3, 3) for _ in range(md.m)])
        assert p.transport(k).transport(k) == p
        assert p.at(()).at(base) == p
        assert p.at(()).base == ()


@given(seeds, st.lists(st.integers(0, 3), max_size=6), st.integers(0, 3))
def test_phi_commutes_with_mutation(s, word, k):
    inst = random_instance(random.Random(s), 4)
    md = inst.md
    sq = SquareCompletion.default(md, inst.Btilde)
    assert mx.equal(sq.Btilde0, inst.Btilde)
    Bsq = sq.Bsq.dot(sq.Dtilde)
    assert mx.equal(Bsq, -Bsq.T)
    base = tuple(j % md.n for j in word)
    k %= md.n
    rng = random.Random(s)
    a = TropicalPointX(md, inst.Btilde, base, [rng.randint(-3, 3) for _ in range(md.m)])
    assert phi(a.transport(k), sq).vector == phi(a, sq).transport(k).vector


@given(seeds, st.lists(st.integers(0, 2), max_size=6), st.integers(0, 2))
def test_psi_commutes_with_mutation(s, word, k):
    inst = random_instance(random.Random(s), 3, principal=True)
    md = inst.md
    base = tuple(j % md.n for j in word)
    k %= md.n
    rng = random.Random(s)
    g = TropicalPointY(md, inst.Btilde, base, [rng.randint(-3, 3) for _ in range(md.m)])
    assert psi(g.transport(k), inst.pair).vector == psi(g, inst.pair).transport(k).vector


def test_left_symmetrizer_breaks_naturality():
    # D B skew needs D = diag(2, 1); B D skew needs diag(1, 2).  Only the latter commutes.
    md = MutationData(2, 2, (1, 1))
    B = mx.imat([[0, -1], [2, 0]])
    left = mx.diag([2, 1])
    assert mx.equal(left.dot(B), -(left.dot(B)).T)
    with pytest.raises(ValueError):
        SquareCompletion(md, B, left)
    sq = SquareCompletion(md, B)
    assert [int(v) for v in np.diag(sq.Dtilde)] == [1, 2]

    def phi_left(a):
        Bt = btilde_at(md, B, a.base)
        return tuple(int(v) for v in left.dot(Bt.T).dot(mx.imat(list(a.vector))))

    failures = 0
    for vec in product(range(-2, 3), repeat=2):
        a = TropicalPointX(md, B, (), vec)
        for k in range(2):
            want = y_step(md, B, phi_left(a), k)
            failures += phi_left(a.transport(k)) != want
            assert phi(a.transport(k), sq).vector == phi(a, sq).transport(k).vector
    assert failures > 0


def test_sample_completion():
    sf = load_seed("rank3-r123")
    sq = sf.completion
    assert [int(v) for v in np.diag(sq.Dtilde)] == [1, 2, 2, 1]
    B = sq.at((0, 2, 1))
    assert mx.equal(B.dot(sq.Dtilde), -(B.dot(sq.Dtilde)).T)
    assert mx.equal(B[:, :3], btilde_at(sf.md, sf.Btilde, (0, 2, 1)))


def test_completion_shape_errors():
    md = MutationData(2, 3, (1, 1))
    Bt = mx.imat([[0, 1], [-1, 0], [1, 1]])
    with pytest.raises(ValueError):
        SquareCompletion.from_block(md, Bt)
    with pytest.raises(ValueError):
        SquareCompletion(md, Bt)


def _brute_dominance(g1, g2, B, box=6):
    diff = np.array(g1) - np.array(g2)
    return any(np.array_equal(B.dot(np.array(nu)), diff) for nu in product(range(box + 1), repeat=B.shape[1]))


@given(seeds, st.lists(st.integers(0, 3), min_size=2, max_size=2), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_dominance_against_enumeration(s, nu, noise):
    inst = random_instance(random.Random(s), 2, principal=True)
    md = inst.md
    B = btilde_at(md, inst.Btilde, random_word(random.Random(s), md.n, 4))
    g2 = [v for v in noise[: md.m]]
    g1 = [int(a + b) for a, b in zip(g2, B.dot(mx.imat(nu[: md.n])))]
    assert dominance_leq(g1, g2, B)
    assert dominance_leq(g2, g2, B)
    other = [int(a) for a in mx.imat(noise[: md.m])[::-1]]
    assert dominance_leq(other, g2, B) == _brute_dominance(other, g2, B)


@given(seeds, st.lists(st.integers(0, 2), min_size=6, max_size=6), st.lists(st.integers(-2, 2), min_size=3, max_size=3))
def test_dominance_partial_order(s, nus, g):
    inst = random_instance(random.Random(s), 3, principal=True)
    md = inst.md
    B = inst.Btilde
    n = md.n
    g3 = list(g[:n]) * 2
    g2 = [int(v) for v in mx.imat(g3) + B.dot(mx.imat(nus[:n]))]
    g1 = [int(v) for v in mx.imat(g2) + B.dot(mx.imat(nus[3:3 + n]))]
    assert dominance_leq(g1, g2, B) and dominance_leq(g2, g3, B) and dominance_leq(g1, g3, B)
    if g1 != g2:
        assert not dominance_leq(g2, g1, B)


def test_dominance_needs_full_rank():
    with pytest.raises(RankDeficient):
        dominance_leq([0, 0], [0, 0], mx.imat([[0, 0], [0, 0]]))


def test_cluster_g_vectors_are_tropical_y_points(rank2_r12):
    md, B = rank2_r12
    rng = random.Random(3)
    for _ in range(20):
        base, target = random_word(rng, 2, 5), random_word(rng, 2, 5)
        k = rng.randrange(2)
        g0 = rerooted(md, B, base, target).Gext
        g1 = rerooted(md, B, base + (k,), target).Gext
        for i in range(2):
            p = TropicalPointY(md, B, base, [int(v) for v in g0[:, i]])
            assert p.transport(k).vector == tuple(int(v) for v in g1[:, i])


def test_pointed_elements(a2):
    md, Bt = a2
    y = md.yhat_ring
    u = PointedElement(md, Bt, {(): ((1, 0, 0, 0), y.one() + 2 * y.var(0))})
    assert fvec_of_pointed(u, ()) == (1, 0)
    assert not is_bipointed(u, ())
    w = PointedElement(md, Bt, {(): ((0, 1, 0, 0), y.one() + y.var(0) * y.var(1))})
    assert is_bipointed(w, ()) and fvec_of_pointed(w, ()) == (1, 1)
    assert w.degrees(()).vector == (0, 1, 0, 0)
    with pytest.raises(KeyError):
        w.at((0,))
    with pytest.raises(ValueError):
        PointedElement(md, Bt, {(): ((0, 0, 0, 0), 2 * y.one())})
    with pytest.raises(ValueError):
        PointedElement(md, Bt, {(): ((0, 0, 0, 0), y.one() + y.var(0), PositiveFraction(y.one() + y.var(1)))})


def test_generalized_variables_are_bipointed(rank2_r12):
    from gca.invariant import Context

    md, B = rank2_r12
    Bt = np.vstack([B, mx.eye(2)])
    md4 = MutationData(2, 4, md.r)
    ctx = Context(md4, Bt, CompatiblePair.principal(md4, B))
    u = ctx.variable((1,), 1)
    F = u.at(()).F
    assert F.coefficient((0, 1)) == {(1,): 1}  # z[2,1]
    assert is_bipointed(u, ()) and fvec_of_pointed(u, ()) == (0, 2)
