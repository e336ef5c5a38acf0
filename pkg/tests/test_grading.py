import itertools
import random
from fractions import Fraction

import pytest

from corpus import (
    alternative_coeffs,
    dp_plus,
    family_1a,
    no_2_01,
    no_2_06,
    positive_six,
    random_admissible_ops,
    with_free_column,
)
from fanocpx.geometry import Cone
from fanocpx.intlinalg import KElement, determinant
from fanocpx.pairs import DefiningPair, apply_ops, validate
from fanocpx.grading import (
    BoundReport,
    ClassificationStats,
    GradingData,
    bound_predicates,
    exceptional_weights,
    gale_split,
    grading_of,
    grading_signature,
    is_combinatorially_minimal,
    is_fano,
    mu_in_eff_interior,
    stats_of,
)


def boundary_mu_pair():
    """Two antipodal free columns put the relation degree on the
    boundary of the effective cone."""
    dp = DefiningPair(
        ((1, 1), (1, 1)),
        ((0, 1, 0, -1), (0, 0, 1, -1)),
        ((0, 0), (1, -1)),
    )
    assert validate(dp).ok
    return dp


def test_weights_match_worked_example():
    g = grading_of(no_2_01())
    assert g.presentation.invariants() == (2, ())
    frees = [w.free for w in g.weights]
    # two weight vectors alternating over the columns, spanning the
    # class lattice
    assert frees[0] == frees[2] == frees[4]
    assert frees[1] == frees[3] == frees[5]
    assert abs(determinant([frees[0], frees[1]])) == 1
    # relation degree is their sum, anticanonical class twice that
    assert g.relation_degree == g.weights[0] + g.weights[1]
    assert (g.anticanonical - g.relation_degree * 2).is_zero()
    assert g.moving.same_cone(g.effective)
    rays = g.effective.extremal_rays()
    assert len(rays) == 2


def test_torsion_appears_in_class_group():
    g = grading_of(family_1a(1, 3))
    assert g.presentation.invariants() == (2, (3,))
    # the worked examples without torsion
    assert grading_of(no_2_01()).presentation.invariants() == (2, ())


def test_kappa_formula_consistency():
    for dp in positive_six():
        g = grading_of(dp)
        total = g.presentation.zero()
        for w in g.weights:
            total = total + w
        assert g.anticanonical == total - g.relation_degree * (dp.r - 1)


def test_is_fano_on_worked_examples():
    for dp in positive_six():
        assert is_fano(grading_of(dp)), dp


def test_is_fano_rejects_boundary_class():
    g = grading_of(no_2_01())
    # a class on an extremal ray of Mov sits on the boundary
    ray = g.effective.extremal_rays()[0]
    forced = GradingData(
        g.presentation,
        g.weights,
        g.relation_degree,
        KElement(ray, (), ()),
        g.effective,
        g.moving,
    )
    assert not is_fano(forced)


def test_exceptional_weights():
    assert exceptional_weights(no_2_01()) == set()
    # appending the free column (0,0,1,0) makes that column removable,
    # and with it the block column (-1,-1,1,0), which becomes the sum
    # of (-1,-1,0,0) and the new column
    plus = dp_plus()
    assert exceptional_weights(plus) == {1, 6}


def test_combinatorial_minimality():
    assert is_combinatorially_minimal(no_2_01())
    assert is_combinatorially_minimal(no_2_06())
    assert not is_combinatorially_minimal(dp_plus())
    for dp in positive_six():
        assert is_combinatorially_minimal(dp)


def test_mu_in_eff_interior():
    assert mu_in_eff_interior(no_2_01())
    for dp in positive_six():
        assert mu_in_eff_interior(dp)
    assert not mu_in_eff_interior(boundary_mu_pair())


def test_stats_worked_example():
    stats = stats_of(no_2_01())
    assert stats == ClassificationStats(
        class_rank=2,
        surplus_rays=0,
        extremal_variables=6,
        interior_variables=0,
    )


def test_gale_split_example():
    vectors = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, -1)]
    split = gale_split(vectors)
    assert split.scalars == (1, 1, -1, -1)
    assert split.positive == (0, 1)
    assert split.negative == (2, 3)
    assert split.zero == ()
    total = [0, 0, 0]
    for w, v in zip(split.scalars, vectors):
        for i in range(3):
            total[i] += w * v[i]
    assert total == [0, 0, 0]
    assert split.sigma_plus.same_cone(
        Cone.from_generators([vectors[0], vectors[1]], dim=3)
    )
    assert split.sigma_minus.same_cone(
        Cone.from_generators([vectors[2], vectors[3]], dim=3)
    )


def test_gale_split_tie_normalization():
    vectors = [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)]
    split = gale_split(vectors)
    assert 0 in split.positive
    assert len(split.positive) == len(split.negative) == 2


def test_gale_split_errors():
    with pytest.raises(ValueError):
        gale_split([(1, 0), (0, 1)])  # simplicial
    with pytest.raises(ValueError):
        gale_split([(1, 0), (0, 1), (1, 1)])  # pointed but kernel trivial?
    with pytest.raises(ValueError):
        gale_split([(1, 0, 0), (0, 1, 0), (1, 1, 0), (2, 1, 0)])
    with pytest.raises(ValueError):
        gale_split([(1, 0), (0, 1), (-1, -1)])  # not pointed


def test_gale_split_partition_sizes_random():
    rng = random.Random(8)
    base = [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)]
    from corpus import random_unimodular

    for _ in range(40):
        u = random_unimodular(rng, 3)
        vecs = [
            tuple(sum(u[i][k] * v[k] for k in range(3)) for i in range(3))
            for v in base
        ]
        rng.shuffle(vecs)
        split = gale_split(vecs)
        assert len(split.positive) >= 2
        assert len(split.negative) >= 2
        assert len(split.positive) >= len(split.negative)
        total = [0, 0, 0]
        for w, v in zip(split.scalars, vecs):
            for i in range(3):
                total[i] += w * v[i]
        assert total == [0, 0, 0]


def test_bound_predicates_worked_example():
    report = bound_predicates(
        no_2_01(), log_terminal=True, q_factorial=True, big_cone=True
    )
    assert report.stats.class_rank == 2
    assert report.stats.surplus_rays == 0
    assert report.stats.extremal_variables == 6
    assert report.stats.interior_variables == 0
    assert report.dim == 3
    assert report.free_count == 0
    for name in [
        "dimension_or_free_column_bound",
        "rank_bound_from_extremal_count",
        "big_cone_exists_when_few_free",
        "column_count_bound_when_few_free",
        "simplicial_bound",
    ]:
        check = report.check(name)
        assert check.hypotheses_met, name
        assert check.holds is True, name
    near = report.check("near_simplicial_bound")
    assert not near.hypotheses_met
    assert near.holds is None
    assert report.violations() == ()


def test_bound_predicates_hypotheses_unmet():
    # three extra free columns push m to the dimension: the few-free
    # checks must report unmet hypotheses rather than a verdict
    dp = with_free_column(
        with_free_column(with_free_column(no_2_01(), (1, 0)), (0, 1)), (1, 1)
    )
    assert validate(dp).ok
    report = bound_predicates(
        dp,
        fano=True,
        log_terminal=True,
        q_factorial=True,
        big_cone=True,
        mu_interior=True,
    )
    assert dp.m == 3 and report.dim == 3
    for name in [
        "big_cone_exists_when_few_free",
        "column_count_bound_when_few_free",
        "simplicial_bound",
    ]:
        check = report.check(name)
        assert not check.hypotheses_met
        assert check.holds is None
    # a toric-like pair (single relation block pair) meets nothing
    toric = boundary_mu_pair()
    report = bound_predicates(
        toric,
        log_terminal=True,
        q_factorial=True,
        big_cone=True,
        mu_interior=False,
    )
    for check in report.checks:
        assert not check.hypotheses_met
        assert check.holds is None


def test_grading_invariance_under_ops_and_coeffs():
    rng = random.Random(414)
    for dp in [no_2_01(), no_2_06()]:
        g = grading_of(dp)
        base = (
            is_fano(g),
            is_combinatorially_minimal(dp, grading=g),
            mu_in_eff_interior(dp, grading=g),
            stats_of(dp, grading=g),
            grading_signature(dp, grading=g),
        )
        for _ in range(10):
            ops = random_admissible_ops(rng, dp, 5)
            moved = apply_ops(dp, ops)
            h = grading_of(moved)
            assert (
                is_fano(h),
                is_combinatorially_minimal(moved, grading=h),
                mu_in_eff_interior(moved, grading=h),
                stats_of(moved, grading=h),
                grading_signature(moved, grading=h),
            ) == base
        recoeffed = DefiningPair(
            dp.exponents, dp.d_rows, dp.free_rows, alternative_coeffs(dp.r)
        )
        h = grading_of(recoeffed)
        assert (
            is_fano(h),
            is_combinatorially_minimal(recoeffed, grading=h),
            mu_in_eff_interior(recoeffed, grading=h),
            stats_of(recoeffed, grading=h),
            grading_signature(recoeffed, grading=h),
        ) == base


def test_grading_signature_distinguishes_torsion():
    assert grading_signature(family_1a(0, 1)) != grading_signature(
        family_1a(1, 3)
    )


def test_moving_cone_inside_effective():
    for dp in positive_six() + [dp_plus(), boundary_mu_pair()]:
        g = grading_of(dp)
        assert g.effective.contains_cone(g.moving)
