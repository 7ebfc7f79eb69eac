import itertools
import math
import random

import pytest

from bnnbdd import oracle
from bnnbdd.bdd import BddManager
from bnnbdd.encoder import (
    CardinalityConstraint,
    FixedIndices,
    HammingBall,
    Literal,
    VariableLayout,
    cc_to_bdd,
    internal_block_to_ccs,
    output_block_to_ccs,
    region_size,
    region_to_bdd,
)
from bnnbdd.model import InputSample, InternalBlock, OutputBlock, generate_random

from conftest import all_points, random_sample


def random_literals(rng, n):
    return [Literal(i, rng.random() < 0.5) for i in range(n)]


def test_cc_mixed_polarity_count():
    mgr = BddManager(5)
    lits = [Literal(0), Literal(1), Literal(2), Literal(3, False), Literal(4, False)]
    g = cc_to_bdd(CardinalityConstraint.at_least(lits, 3), mgr)
    assert mgr.sat_count(g, range(5)) == 16


def test_cc_clamps():
    mgr = BddManager(4)
    lits = [Literal(i) for i in range(4)]
    assert cc_to_bdd(CardinalityConstraint.at_least(lits, 0), mgr).is_true
    assert cc_to_bdd(CardinalityConstraint.at_least(lits, -3), mgr).is_true
    assert cc_to_bdd(CardinalityConstraint.at_least(lits, 5), mgr).is_false
    assert CardinalityConstraint.at_least([], 0).const is True
    assert CardinalityConstraint.at_least([], 1).const is False
    with pytest.raises(ValueError):
        CardinalityConstraint.at_least([Literal(0), Literal(0, False)], 1)


def test_cc_three_choose_two():
    mgr = BddManager(3)
    g = cc_to_bdd(CardinalityConstraint.at_least([Literal(i) for i in range(3)], 2), mgr)
    assert mgr.sat_count(g, range(3)) == 4
    assert mgr.node_count(g) <= 2 * 2


def test_cc_unsorted_literals():
    mgr = BddManager(4)
    a = cc_to_bdd(CardinalityConstraint.at_least([Literal(3), Literal(0, False), Literal(1)], 2), mgr)
    b = cc_to_bdd(CardinalityConstraint.at_least([Literal(0, False), Literal(1), Literal(3)], 2), mgr)
    assert a == b


def test_cc_matches_brute_force_exhaustively():
    rng = random.Random(3)
    for n in range(1, 13):
        mgr = BddManager(n)
        pts = all_points(n)
        for k in range(0, n + 2):
            lits = random_literals(rng, n)
            cc = CardinalityConstraint.at_least(lits, k)
            g = cc_to_bdd(cc, mgr)
            expected = {x for x in pts
                        if sum(bool(x[l.var]) == l.positive for l in lits) >= k}
            assert set(mgr.sat_all(g, range(n))) == expected
    mgr.check_invariants()


def test_cc_on_sparse_variables():
    mgr = BddManager(20)
    lits = [Literal(3), Literal(7, False), Literal(15)]
    g = cc_to_bdd(CardinalityConstraint.at_least(lits, 2), mgr)
    assert mgr.support(g) == {3, 7, 15}
    assert mgr.sat_count(g, [3, 7, 15]) == 4


def test_cc_node_bound_up_to_16():
    rng = random.Random(4)
    for n in range(1, 17):
        mgr = BddManager(n)
        for k in range(1, n + 1):
            g = cc_to_bdd(CardinalityConstraint.at_least(random_literals(rng, n), k), mgr)
            assert mgr.node_count(g) <= k * (n - k + 1)
            assert mgr.sat_count(g, range(n)) == sum(math.comb(n, i) for i in range(k, n + 1))


# ----------------------------------------------------------------------
# internal blocks


def test_internal_example():
    blk = InternalBlock(weights=((1, -1, 1),), bias=(0.0,), bn_alpha=(1.0,),
                        bn_gamma=(0.0,), bn_mu=(0.0,), bn_sigma=(1.0,))
    (cc,) = internal_block_to_ccs(blk, [0, 1, 2])
    assert cc.literals == (Literal(0), Literal(1, False), Literal(2))
    assert cc.k == 2
    for x in all_points(3):
        out = oracle.block_forward(blk, [2 * b - 1 for b in x])[0]
        assert cc.holds(x) == (out == 1)


@pytest.mark.parametrize("gamma,expected", [(0.0, True), (0.5, True), (-1.0, False)])
def test_internal_zero_alpha(gamma, expected):
    blk = InternalBlock(weights=((1, 1),), bias=(3.0,), bn_alpha=(0.0,),
                        bn_gamma=(gamma,), bn_mu=(0.0,), bn_sigma=(0.0,))
    (cc,) = internal_block_to_ccs(blk, [0, 1])
    assert cc.const is expected


def test_internal_negative_alpha():
    blk = InternalBlock(weights=((1, -1, -1, 1),), bias=(0.3,), bn_alpha=(-0.8,),
                        bn_gamma=(0.2,), bn_mu=(-0.4,), bn_sigma=(1.3,))
    (cc,) = internal_block_to_ccs(blk, [0, 1, 2, 3])
    assert [l.positive for l in cc.literals] == [False, True, True, False]
    for x in all_points(4):
        assert cc.holds(x) == (oracle.block_forward(blk, [2 * b - 1 for b in x])[0] == 1)


def test_internal_integer_boundary():
    # pre-activation exactly 0 at sum = 0 must give +1
    blk = InternalBlock(weights=((1, 1, 1, 1),), bias=(0.0,), bn_alpha=(0.5,),
                        bn_gamma=(0.0,), bn_mu=(0.0,), bn_sigma=(1.0,))
    (cc,) = internal_block_to_ccs(blk, range(4))
    assert cc.k == 2
    assert cc.holds((1, 1, 0, 0))


def test_internal_blocks_match_oracle_randomly():
    rng = random.Random(21)
    for seed in range(200):
        n, m = rng.randint(1, 12), rng.randint(1, 6)
        blk = generate_random(f"{n}:{m}:2", seed, zero_alpha_prob=0.25).blocks[0]
        ccs = internal_block_to_ccs(blk, range(n))
        for x in all_points(n):
            out = oracle.block_forward(blk, [2 * b - 1 for b in x])
            assert [cc.holds(x) for cc in ccs] == [o == 1 for o in out]


# ----------------------------------------------------------------------
# output block


def _check_output_block(blk, n):
    s = blk.num_classes
    per_class = [output_block_to_ccs(blk, j, range(n)) for j in range(s)]
    assert all(len(ccs) == s - 1 for ccs in per_class)
    for x in all_points(n):
        want = oracle.argmax_first(oracle.output_scores(blk, [2 * b - 1 for b in x]))
        for j, ccs in enumerate(per_class):
            assert all(cc.holds(x) for cc in ccs) == (want == j), (x, j)


def test_output_example():
    blk = OutputBlock(weights=((1, 1), (1, -1)), bias=(0.0, 0.0))
    (cc,) = output_block_to_ccs(blk, 0, [0, 1])
    assert cc.literals == (Literal(1),) and cc.k == 1
    _check_output_block(blk, 2)


def test_output_identical_rows_first_wins():
    blk = OutputBlock(weights=((1, -1, 1), (1, -1, 1)), bias=(0.5, 0.5))
    (c1,) = output_block_to_ccs(blk, 0, range(3))
    (c2,) = output_block_to_ccs(blk, 1, range(3))
    assert c1.const is True
    assert c2.const is False


def test_output_tie_through_bias():
    # class 1 row differs, biases make integer thresholds so ties occur
    blk = OutputBlock(weights=((1, 1, -1), (-1, 1, 1), (1, -1, 1)), bias=(0.0, 2.0, 0.0))
    _check_output_block(blk, 3)


def test_output_blocks_match_oracle_randomly():
    rng = random.Random(22)
    n_ties = 0
    for trial in range(200):
        n, s = rng.randint(1, 12), rng.randint(2, 5)
        rows = [tuple(rng.choice((-1, 1)) for _ in range(n)) for _ in range(s)]
        if trial % 4 == 0:
            rows[rng.randrange(s)] = rows[0]
        if trial % 2 == 0:
            bias = tuple(float(rng.randint(-2, 2)) for _ in range(s))
        else:
            bias = tuple(rng.uniform(-2, 2) for _ in range(s))
        blk = OutputBlock(tuple(rows), bias)
        for x in all_points(n):
            sc = oracle.output_scores(blk, [2 * b - 1 for b in x])
            if len(set(sc)) < s:
                n_ties += 1
        _check_output_block(blk, n)
    assert n_ties > 0


# ----------------------------------------------------------------------
# regions


def test_region_ball_count():
    mgr = BddManager(5)
    reg = HammingBall(InputSample((1, 1, 1, 0, 0)), 2)
    assert mgr.sat_count(region_to_bdd(reg, mgr), range(5)) == 16
    assert region_size(reg) == 16


def test_region_full_and_point():
    mgr = BddManager(6)
    u = InputSample((1, 0, 1, 1, 0, 0))
    assert region_to_bdd(HammingBall(u, 6), mgr).is_true
    g = region_to_bdd(FixedIndices(u, set()), mgr)
    assert list(mgr.sat_all(g, range(6))) == [u.bits]
    assert region_to_bdd(FixedIndices(u, set(range(6))), mgr).is_true


def test_region_size():
    u5 = InputSample((0,) * 5)
    assert region_size(HammingBall(u5, 2)) == 16
    assert region_size(HammingBall(u5, 0)) == 1
    assert region_size(FixedIndices(InputSample((0,) * 12), set(range(10)))) == 1024


def test_region_bad_params():
    with pytest.raises(ValueError):
        HammingBall(InputSample((0, 1)), 3)
    with pytest.raises(ValueError):
        FixedIndices(InputSample((0, 1)), {2})


def test_regions_match_predicate():
    rng = random.Random(31)
    for n in range(1, 13):
        mgr = BddManager(n)
        u = random_sample(rng, n)
        for r in range(n + 1):
            reg = HammingBall(u, r)
            g = region_to_bdd(reg, mgr)
            assert mgr.node_count(g) <= max(1, (n - r) * (r + 1))
            members = {x for x in all_points(n) if oracle.hamming(x, u.bits) <= r}
            assert set(mgr.sat_all(g, range(n))) == members
            assert mgr.sat_count(g, range(n)) == region_size(reg) == len(members)
            assert set(oracle.enumerate_region(reg)) == members
        for _ in range(4):
            free = {i for i in range(n) if rng.random() < 0.5}
            reg = FixedIndices(u, free)
            g = region_to_bdd(reg, mgr)
            assert mgr.node_count(g) == n - len(free)
            members = {x for x in all_points(n)
                       if all(x[i] == u.bits[i] for i in range(n) if i not in free)}
            assert set(mgr.sat_all(g, range(n))) == members
            assert mgr.sat_count(g, range(n)) == region_size(reg)


def test_layout():
    lay = VariableLayout.for_model(generate_random("5:4:3:2", 0))
    assert lay.num_vars == 12
    assert list(lay.layer(0)) == [0, 1, 2, 3, 4]
    assert list(lay.layer(1)) == [5, 6, 7, 8]
    assert list(lay.layer(2)) == [9, 10, 11]
    assert lay.inputs == range(5)
