"""Face combinatorics, relevant collections, fan assembly, and the
stratum-level factoriality and smoothness tests."""

import random
from fractions import Fraction
from itertools import combinations

import pytest

from corpus import (
    candidate_4b_like,
    dp_plus,
    no_2_01,
    no_2_02,
    no_2_06,
    non_fano_pair,
    nonsimplicial_fano,
    positive_six,
    random_admissible_ops,
)
from fanocpx.geometry import Cone
from fanocpx.grading import bound_predicates, grading_of, is_fano
from fanocpx.intlinalg import determinant
from fanocpx.pairs import apply_ops, validate
from fanocpx.strata import (
    RelevantData,
    degenerate_blocks,
    enumerate_f_faces,
    face_indices,
    face_mask,
    full_blocks,
    has_big_cone,
    is_big_cone,
    is_f_face,
    is_q_factorial,
    is_smooth,
    leaf_cone,
    meets_leaf_interior,
    nongenerating_faces,
    positive_strata_factorial,
    relevant_and_covering,
    stratum_dimension,
    stratum_jacobian_full,
)


def corpus_pairs():
    return positive_six() + [
        dp_plus(),
        nonsimplicial_fano(),
        non_fano_pair(),
        candidate_4b_like(),
    ]


# -- independent oracles -------------------------------------------------


def phi_oracle(dp, mask):
    """Existence of a linear form on the coefficient plane vanishing on
    exactly the monomials outside the face; decided from the actual
    coefficient columns, not the block counts."""
    a = dp.coeffs
    cols = [(a[0][i], a[1][i]) for i in range(dp.r + 1)]
    full = set(full_blocks(dp, mask))
    comp = [i for i in range(dp.r + 1) if i not in full]
    if not full:
        return True
    constraints = [(-cols[i][1], cols[i][0]) for i in comp]
    if not constraints:
        for p in range(1, 9):
            for q in range(9):
                if all(p * c[0] + q * c[1] != 0 for c in cols):
                    return True
        return False
    phi = constraints[0]
    for other in constraints[1:]:
        if phi[0] * other[1] - phi[1] * other[0] != 0:
            return False
    return all(phi[0] * cols[i][0] + phi[1] * cols[i][1] != 0 for i in full)


def jacobian_oracle(dp, mask, rng):
    """Exact symbolic rank of the relation Jacobian at sample points of
    the stratum: variables off the face are zero, variables on it get
    positive rationals, so no accidental vanishing can occur."""
    sympy = pytest.importorskip("sympy")
    if dp.r < 2:
        return True
    syms = sympy.symbols(f"t0:{dp.total_columns}")
    monos = []
    for i, (a, b) in enumerate(dp.block_spans()):
        mono = sympy.Integer(1)
        for j in range(a, b):
            mono *= syms[j] ** int(dp.exponents[i][j - a])
        monos.append(mono)

    def coeff_col(i):
        return (
            sympy.Rational(dp.coeffs[0][i].numerator, dp.coeffs[0][i].denominator),
            sympy.Rational(dp.coeffs[1][i].numerator, dp.coeffs[1][i].denominator),
        )

    def det2(u, v):
        return u[0] * v[1] - u[1] * v[0]

    relations = []
    for t in range(dp.r - 1):
        c0, c1, c2 = coeff_col(t), coeff_col(t + 1), coeff_col(t + 2)
        relations.append(
            det2(c1, c2) * monos[t]
            - det2(c0, c2) * monos[t + 1]
            + det2(c0, c1) * monos[t + 2]
        )
    jac = sympy.Matrix([[sympy.diff(g, v) for v in syms] for g in relations])
    best = 0
    for _ in range(3):
        subs = {
            v: (
                sympy.Rational(rng.randint(1, 40), rng.choice([1, 2, 3, 5]))
                if mask >> j & 1
                else sympy.Integer(0)
            )
            for j, v in enumerate(syms)
        }
        best = max(best, jac.subs(subs).rank())
    return best == dp.r - 1


# -- face test -----------------------------------------------------------


def test_face_mask_roundtrip():
    rng = random.Random(7)
    for _ in range(50):
        mask = rng.randrange(1 << 10)
        assert face_mask(face_indices(mask)) == mask
    assert face_indices(0) == ()
    assert face_mask([]) == 0


def test_is_f_face_examples():
    dp = no_2_01()
    assert is_f_face(dp, (1 << 6) - 1)
    # one full block, the two others empty
    assert not is_f_face(dp, face_mask([0, 1]))
    # one variable from each block
    assert is_f_face(dp, face_mask([0, 2, 4]))
    # the empty face and pure-free faces qualify
    assert is_f_face(dp, 0)
    assert is_f_face(dp_plus(), face_mask([6]))
    with pytest.raises(ValueError):
        is_f_face(dp, 1 << 6)
    with pytest.raises(ValueError):
        is_f_face(dp, -1)


def test_f_face_rule_matches_coefficient_oracle():
    for dp in corpus_pairs():
        for mask in range(1 << dp.total_columns):
            assert is_f_face(dp, mask) == phi_oracle(dp, mask), (
                dp,
                face_indices(mask),
            )


def test_f_face_count_no_2_01():
    # per block: 3 proper subsets.  27 faces with no complete block,
    # 9 with exactly one incomplete block, 1 with all blocks complete.
    faces = enumerate_f_faces(no_2_01())
    assert len(faces) == 37
    assert list(faces) == sorted(faces)


def test_face_enumeration_guard():
    import dataclasses

    dp = no_2_01()
    wide = dataclasses.replace(
        dp,
        free_rows=(tuple(range(1, 10)), tuple(9 * [0])),
    )
    assert wide.total_columns == 15
    with pytest.raises(RuntimeError):
        enumerate_f_faces(wide)


# -- relevant and covering collections ------------------------------------


def test_relevant_and_covering_no_2_01():
    dp = no_2_01()
    rd = relevant_and_covering(dp)
    assert rd.pair is dp
    assert len(rd.f_faces) == 37
    # faces carrying only one of the two weights are irrelevant; those
    # are the 15 subsets of a single parity class
    assert len(rd.relevant) == 22
    assert face_mask([0, 3, 4]) in rd.relevant
    assert face_mask([0, 2, 4]) not in rd.relevant
    assert 0 not in rd.relevant
    assert sorted(rd.covering) == [6, 9, 18, 24, 33, 36]
    assert set(rd.covering) <= set(rd.relevant) <= set(rd.f_faces)


def test_relevant_upward_closed():
    for dp in positive_six():
        rd = relevant_and_covering(dp)
        relevant = set(rd.relevant)
        for small in rd.relevant:
            for big in rd.f_faces:
                if small & big == small:
                    assert big in relevant


def test_relevant_requires_fano():
    dp = non_fano_pair()
    assert validate(dp).ok
    assert not is_fano(grading_of(dp))
    with pytest.raises(ValueError):
        relevant_and_covering(dp)


def test_fan_of_no_2_01():
    rd = relevant_and_covering(no_2_01())
    cones = rd.maximal_cones()
    assert len(cones) == 6
    assert all(c.dimension() == 4 for c in cones)
    rays = set()
    for c in cones:
        rays.update(c.extremal_rays())
    assert rays == set(no_2_01().columns())


def test_fan_rays_are_columns_corpus_wide():
    for dp in positive_six():
        rd = relevant_and_covering(dp)
        cols = set(dp.columns())
        rays = set()
        for c in rd.maximal_cones():
            rays.update(c.extremal_rays())
        assert rays == cols


# -- Q-factoriality -------------------------------------------------------


def test_q_factorial_positive_cases():
    for dp in positive_six():
        assert is_q_factorial(dp)


def test_q_factorial_negative_case():
    dp = nonsimplicial_fano()
    assert validate(dp).ok
    rd = relevant_and_covering(dp)
    assert not is_q_factorial(rd)
    # the block-1 singleton is a covering face with one-dimensional image
    singleton = face_mask([2])
    assert singleton in rd.covering
    assert rd.weight_cone(singleton).dimension() == 1


# -- stratum dimensions ----------------------------------------------------


def test_stratum_dimension_no_2_01():
    rd = relevant_and_covering(no_2_01())
    assert stratum_dimension(rd, (1 << 6) - 1) == 3
    for mask in rd.covering:
        assert stratum_dimension(rd, mask) == 0
    assert stratum_dimension(rd, face_mask([0, 3, 4])) == 1
    assert stratum_dimension(rd, face_mask([2, 3, 4, 5])) == 1
    assert stratum_dimension(rd, face_mask([1, 2, 3, 4, 5])) == 2
    with pytest.raises(ValueError):
        stratum_dimension(rd, face_mask([0, 2, 4]))


def test_stratum_dimension_monotone():
    rd = relevant_and_covering(no_2_02())
    for small in rd.relevant:
        for big in rd.relevant:
            if small != big and small & big == small:
                assert stratum_dimension(rd, small) < stratum_dimension(rd, big)


# -- factoriality of positive strata ---------------------------------------


def test_positive_strata_factorial_positive_cases():
    for dp in positive_six():
        assert positive_strata_factorial(dp)


def test_positive_strata_factorial_negative_case():
    dp = candidate_4b_like()
    assert validate(dp).ok
    g = grading_of(dp)
    assert is_fano(g)
    assert g.presentation.invariants() == (2, ())
    rd = relevant_and_covering(dp, g)
    bad = nongenerating_faces(rd)
    target = face_mask([1, 2, 4])
    assert target in bad
    assert not positive_strata_factorial(rd)
    # the face is relevant with positive stratum dimension, and its
    # three weights span an index-two sublattice: all two-by-two minors
    # share the factor 2 in any basis
    assert stratum_dimension(rd, target) >= 1
    ws = [g.weights[j].free for j in face_indices(target)]
    minors = [
        abs(determinant([list(u), list(v)])) for u, v in combinations(ws, 2)
    ]
    assert minors
    from math import gcd

    assert gcd(*minors) == 2


def test_nongenerating_faces_scope():
    rd = relevant_and_covering(candidate_4b_like())
    wide = nongenerating_faces(rd, positive_only=False)
    assert set(nongenerating_faces(rd)) <= set(wide)


# -- smoothness -------------------------------------------------------------


def test_degenerate_blocks_rule():
    dp = no_2_02()
    # exponent pattern (1,2): dropping the exponent-1 variable kills the
    # block derivative unless the squared one stays in the face
    assert degenerate_blocks(dp, face_mask([0, 3, 4])) == (0, 2)
    assert stratum_jacobian_full(dp, face_mask([0, 3, 4]))
    assert degenerate_blocks(dp, face_mask([0, 2, 4])) == (0, 1, 2)
    assert not stratum_jacobian_full(dp, face_mask([0, 2, 4]))
    assert degenerate_blocks(dp, (1 << 6) - 1) == ()
    assert degenerate_blocks(no_2_01(), face_mask([0, 3, 4])) == ()


def test_jacobian_rule_matches_symbolic_oracle():
    rng = random.Random(20260820)
    for dp in positive_six() + [dp_plus(), candidate_4b_like()]:
        for mask in enumerate_f_faces(dp):
            assert stratum_jacobian_full(dp, mask) == jacobian_oracle(
                dp, mask, rng
            ), (dp, face_indices(mask))


def test_smoothness_verdicts():
    assert [is_smooth(dp) for dp in positive_six()] == [
        True,
        True,
        False,
        False,
        False,
        False,
    ]


# -- tropical leaves and big cones ------------------------------------------


def test_leaf_cone_shapes():
    leaf = leaf_cone(2, 2, 0)
    assert leaf.contains((-3, -3, 5, -7))
    assert not leaf.contains((-3, -2, 0, 0))
    assert leaf_cone(2, 2, 1).contains((4, 0, 1, 1))
    with pytest.raises(ValueError):
        leaf_cone(2, 2, 3)


def test_meets_leaf_interior():
    dp = no_2_01()
    cols = dp.columns()
    ray0 = Cone.from_generators([cols[0]], dim=4)
    assert meets_leaf_interior(ray0, 2, 2, 0)
    assert not meets_leaf_interior(ray0, 2, 2, 1)
    # a free column lies in the lineality part of every leaf
    plus = dp_plus()
    free_ray = Cone.from_generators([plus.columns()[6]], dim=4)
    for i in range(3):
        assert not meets_leaf_interior(free_ray, 2, 2, i)


def test_big_cone_classification():
    dp = no_2_01()
    cols = dp.columns()
    assert is_big_cone(dp, Cone.from_generators([cols[0], cols[2], cols[4]], dim=4))
    assert not is_big_cone(dp, Cone.from_generators([cols[4], cols[5]], dim=4))
    assert not is_big_cone(dp, Cone.zero(4))


def test_has_big_cone_corpus():
    for dp in positive_six():
        assert has_big_cone(dp)


def test_bound_report_computes_big_cone_lazily():
    rep = bound_predicates(
        no_2_01(), fano=True, comb_minimal=True, log_terminal=True
    )
    check = rep.check("big_cone_exists_when_few_free")
    assert check.hypotheses_met and check.holds


# -- invariance under admissible operations ---------------------------------


def test_strata_invariants_under_ops():
    rng = random.Random(1123)
    for base in [no_2_01(), no_2_06(), nonsimplicial_fano()]:
        rd0 = relevant_and_covering(base)
        reference = (
            is_q_factorial(rd0),
            positive_strata_factorial(rd0),
            is_smooth(rd0),
            len(rd0.relevant),
            len(rd0.covering),
            sorted(rd0.stratum_depths().values()),
        )
        for _ in range(5):
            moved = apply_ops(base, random_admissible_ops(rng, base, 6))
            rd = relevant_and_covering(moved)
            assert (
                is_q_factorial(rd),
                positive_strata_factorial(rd),
                is_smooth(rd),
                len(rd.relevant),
                len(rd.covering),
                sorted(rd.stratum_depths().values()),
            ) == reference


def test_relevant_data_is_plain_container():
    rd = relevant_and_covering(no_2_01())
    assert isinstance(rd, RelevantData)
    again = rd.maximal_cones()
    assert again is rd.maximal_cones()
