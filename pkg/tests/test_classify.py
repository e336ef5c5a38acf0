"""Search-space enumeration, budgets, and table matching."""

import random

import pytest

from fanocpx.classify import (
    SearchBudget,
    SearchStats,
    _candidate_strata_factorial,
    class_representative,
    constellation,
    constellations,
    enumerate_constellation,
    match_table_row,
    reproduce_table,
)
from fanocpx.complexes import is_log_terminal, is_terminal
from fanocpx.grading import grading_of, is_combinatorially_minimal, is_fano
from fanocpx.pairs import DefiningPair, apply_op, canonical_form, validate
from fanocpx.strata import (
    is_q_factorial,
    positive_strata_factorial,
    relevant_and_covering,
)

from corpus import (
    alternative_coeffs,
    candidate_4b_like,
    dp_plus,
    no_2_01,
    no_2_02,
    no_2_03,
    no_2_04,
    no_2_05,
    no_2_06,
    non_log_terminal_pair,
    nonsimplicial_fano,
    positive_six,
    random_admissible_ops,
)

SIX = (no_2_01, no_2_02, no_2_03, no_2_04, no_2_05, no_2_06)
SIX_ROWS = ("2.01", "2.02", "2.03", "2.04", "2.05", "2.06")


# -- constellation listing --------------------------------------------------


def test_fifteen_cells():
    cells = constellations()
    assert len(cells) == 15
    assert len({c.label for c in cells}) == 15
    ranks = {c.label[0] for c in cells}
    assert ranks == {"1", "2"}


def test_cell_shape_identity():
    for c in constellations():
        assert c.class_rank in (2, 3)
        assert all(size >= 1 for size in c.block_sizes)
        assert c.free_count >= 0
        # dimension three forces the slot count
        assert c.total_slots == c.r + 2 + c.class_rank
        assert c.r >= 1


def test_lookup():
    c = constellation("2a")
    assert c.block_sizes == (2, 2, 2)
    assert c.free_count == 0
    assert c.class_rank == 2
    with pytest.raises(KeyError, match="2z"):
        constellation("2z")


# -- budgets ----------------------------------------------------------------


def test_budget_defaults():
    b = SearchBudget()
    assert b.d_cap == 20
    assert b.exponent_cap == 5
    assert b.weight_cap == 8
    assert b.fallback_cap == 40
    assert b.volume_cap is None
    assert b.work_cap is None
    assert not b.degenerate


def test_budget_validation():
    with pytest.raises(ValueError, match="d_cap"):
        SearchBudget(d_cap=-1)
    with pytest.raises(ValueError, match="exponent_cap"):
        SearchBudget(exponent_cap=2.5)
    with pytest.raises(ValueError, match="volume_cap"):
        SearchBudget(volume_cap=-3)


def test_degenerate_budget_is_exhausted_immediately():
    sv = enumerate_constellation("2a", SearchBudget(d_cap=0))
    assert sv.classes == ()
    assert sv.frontier == ()
    assert sv.exhausted
    assert sv.stats == SearchStats()


# -- structural emptiness ---------------------------------------------------


@pytest.mark.parametrize("label", ["1c", "1d", "1e"])
def test_rank_three_many_block_cells_are_empty(label):
    # every admissible relation degree needs each block to cover all
    # class-group coordinates, which these shapes cannot do
    sv = enumerate_constellation(label)
    assert sv.classes == ()
    assert sv.stats.frames == 0
    assert not sv.exhausted


# -- restricted searches ----------------------------------------------------


def restricted_survey(jobs=1):
    return enumerate_constellation(
        "2a", disposition=1, configuration="A", jobs=jobs
    )


def test_first_disposition_finds_the_two_classical_classes():
    sv = restricted_survey()
    want = {class_representative(no_2_01()), class_representative(no_2_03())}
    assert set(sv.classes) == want
    assert sv.exhausted
    caps = {f.cap for f in sv.frontier}
    assert "d_cap" in caps


def test_restricted_survey_statistics():
    sv = restricted_survey()
    st = sv.stats
    assert st.frames > 0
    assert st.systems >= st.graded_survivors
    assert st.lattice_candidates >= st.pipeline_runs
    assert st.pipeline_runs >= len(sv.classes)


def test_worker_split_does_not_change_the_survey():
    one = restricted_survey(jobs=1)
    two = restricted_survey(jobs=2)
    assert one.classes == two.classes
    assert one.frontier == two.frontier
    assert one.stats == two.stats
    assert one.exhausted == two.exhausted


def test_restriction_validation():
    with pytest.raises(ValueError, match="disposition"):
        enumerate_constellation("2a", disposition=0)
    with pytest.raises(ValueError, match="configuration"):
        enumerate_constellation("2a", configuration="B")
    with pytest.raises(ValueError, match="disposition 5"):
        enumerate_constellation("2a", disposition=2, chamber="a1")
    with pytest.raises(ValueError, match="chamber"):
        enumerate_constellation("2a", disposition=5, chamber="a9")
    with pytest.raises(ValueError, match="rank two"):
        enumerate_constellation("1a", disposition=1)
    with pytest.raises(ValueError, match="jobs"):
        enumerate_constellation("2a", jobs=0)


def test_survey_classes_pass_every_predicate_from_scratch():
    sv = restricted_survey()
    assert sv.classes
    for dp in sv.classes:
        rep = validate(dp)
        assert rep.ok and not rep.redundant_blocks()
        g = grading_of(dp)
        assert is_fano(g)
        rd = relevant_and_covering(dp)
        assert is_q_factorial(rd)
        assert positive_strata_factorial(rd)
        assert is_log_terminal(rd)
        assert is_terminal(rd)
        assert is_combinatorially_minimal(dp, g)
        assert dp.r >= 2
        assert canonical_form(dp) == dp
        assert class_representative(dp) == dp


# -- class representatives --------------------------------------------------


def test_representative_ignores_coefficient_choice():
    for factory in SIX:
        dp = factory()
        alt = DefiningPair(
            dp.exponents, dp.d_rows, dp.free_rows, alternative_coeffs(dp.r)
        )
        assert class_representative(alt) == class_representative(dp)


def test_representative_is_op_invariant():
    rng = random.Random(20260818)
    for factory in SIX:
        dp = factory()
        want = class_representative(dp)
        moved = dp
        for op in random_admissible_ops(rng, dp, 12):
            moved = apply_op(moved, op)
        assert class_representative(moved) == want


def test_representative_is_idempotent():
    for factory in SIX:
        rep = class_representative(factory())
        assert class_representative(rep) == rep
        assert canonical_form(rep) == rep


# -- table matching ---------------------------------------------------------


def test_corpus_matches_its_rows():
    for factory, ident in zip(SIX, SIX_ROWS):
        assert match_table_row(factory()) == ident
        assert match_table_row(class_representative(factory())) == ident


def test_non_members_do_not_match():
    assert match_table_row(dp_plus()) is None
    assert match_table_row(non_log_terminal_pair()) is None
    assert match_table_row(positive_six()) is None


def test_reproduce_table_on_empty_cells():
    cmp = reproduce_table(labels=("1c", "1d", "1e"))
    assert cmp.matched == ()
    assert len(cmp.missing) == 12
    assert cmp.extra == ()
    assert cmp.exhausted == ()
    assert len(cmp.surveys) == 3


def test_reproduce_table_restricted_budget():
    # tight budget still reports honestly: everything it finds matches,
    # everything clipped lands in the exhaustion report
    budget = SearchBudget(d_cap=1, weight_cap=4, fallback_cap=4)
    cmp = reproduce_table(budget=budget, labels=("2a",))
    assert cmp.extra == ()
    assert set(cmp.matched) <= set(SIX_ROWS)
    assert "2a" in cmp.exhausted
    for ident in cmp.matched:
        assert ident not in cmp.missing


# -- the candidate-level factoriality shortcut ------------------------------


def test_candidate_factoriality_agrees_with_the_stratum_test():
    probes = [f() for f in SIX]
    probes += [positive_six(), candidate_4b_like(), dp_plus(),
               nonsimplicial_fano()]
    for dp in probes:
        rd = relevant_and_covering(dp)
        rows = list(zip(*dp.columns()))
        total = dp.n + dp.m
        fast = _candidate_strata_factorial(
            rows, total, rd.relevant, set(rd.covering)
        )
        assert fast == positive_strata_factorial(rd)
