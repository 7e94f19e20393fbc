import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats as sps

from krv.stats import (
    CHI2_CRITICAL,
    build_rank_report,
    chi2_critical,
    fisher_f,
    friedman_chi2,
    friedman_decision,
    group_by_cd,
    nemenyi_cd,
    paired_t_statistic,
    paired_t_test,
    rank_matrix,
    rank_row,
)

import oracles
from reference_tables import DATASETS, GAUSSIAN_ACCURACY, LEARNERS

acc_matrices = st.integers(2, 12).flatmap(
    lambda s: st.integers(2, 8).flatmap(
        lambda g: arrays(np.float64, (s, g), elements=st.sampled_from([0.5, 0.6, 0.7, 0.8, 0.9, 0.95]))
    )
)


# -------------------------------------------------------------------- ranks


def test_rank_row_examples():
    np.testing.assert_array_equal(rank_row([0.9, 0.8, 0.7]), [1, 2, 3])
    np.testing.assert_array_equal(rank_row([0.9, 0.9, 0.7]), [1.5, 1.5, 3])
    np.testing.assert_array_equal(rank_row(GAUSSIAN_ACCURACY[0]), [5, 3, 4, 2, 6, 1])


@given(acc_matrices)
def test_rank_rows_sum(acc):
    S, G = acc.shape
    ranks = rank_matrix(acc)
    np.testing.assert_array_equal(ranks.sum(axis=1), G * (G + 1) / 2)
    assert np.all((ranks >= 1) & (ranks <= G))


@given(acc_matrices, st.sampled_from([np.sqrt, np.exp, lambda x: 3 * x - 7, lambda x: x**3]))
def test_friedman_invariant_under_monotone_transform(acc, f):
    assert friedman_chi2(rank_matrix(acc)) == friedman_chi2(rank_matrix(f(acc)))


@given(acc_matrices)
def test_friedman_matches_oracle(acc):
    ranks = rank_matrix(acc)
    assert friedman_chi2(ranks) == pytest.approx(oracles.friedman(ranks), abs=1e-9)


# ------------------------------------------------------------------ Friedman


def test_friedman_examples():
    assert friedman_chi2(np.full((5, 4), 2.5)) == pytest.approx(0.0, abs=1e-12)
    assert friedman_chi2(np.tile([1.0, 2.0], (4, 1))) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        friedman_chi2(np.array([[1.0, 2.0]]))
    with pytest.raises(ValueError):
        friedman_chi2(np.ones((3, 1)))


def test_friedman_on_reference_table():
    chi2 = friedman_chi2(rank_matrix(GAUSSIAN_ACCURACY))
    assert abs(chi2 - 19.6571) <= 0.5
    assert chi2 == pytest.approx(19.721428571428568, abs=1e-9)
    # scipy's Friedman test without tie correction agrees on untied rows
    untied = [i for i, row in enumerate(GAUSSIAN_ACCURACY) if len(set(row)) == row.size]
    sub = GAUSSIAN_ACCURACY[untied]
    assert friedman_chi2(rank_matrix(sub)) == pytest.approx(sps.friedmanchisquare(*(-sub).T).statistic)


def test_fisher_examples():
    assert fisher_f(0.0, 20, 6) == 0.0
    assert fisher_f(19.6571, 20, 6) == pytest.approx(19 * 19.6571 / (100 - 19.6571), abs=1e-12)
    assert abs(fisher_f(19.6571, 20, 6) - 4.6487) < 1e-3
    assert fisher_f(99.999, 20, 6) > 1e5
    with pytest.raises(ValueError):
        fisher_f(100.0, 20, 6)
    with pytest.raises(ValueError):
        fisher_f(100.001, 20, 6)


@given(st.integers(2, 50), st.integers(2, 10), st.floats(0, 1))
def test_fisher_and_cd_formulas(S, G, frac):
    chi2 = frac * S * (G - 1) * 0.999
    assert fisher_f(chi2, S, G) == pytest.approx((S - 1) * chi2 / (S * (G - 1) - chi2), rel=1e-9, abs=1e-12)
    q = 1.0 + frac * 3
    assert nemenyi_cd(G, S, q) == pytest.approx(q * math.sqrt(G * (G + 1) / (6.0 * S)), rel=1e-9)


def test_nemenyi_examples():
    assert nemenyi_cd(6, 20, 0.0) == 0.0
    assert abs(nemenyi_cd(6, 20, 2.850) - 1.6861) < 1e-3
    assert nemenyi_cd(6, 20) == nemenyi_cd(6, 20, 2.850)
    assert nemenyi_cd(2, 9, 1.96) == pytest.approx(1.96 / 3)
    with pytest.raises(ValueError):
        nemenyi_cd(11, 20)


def test_decision_examples():
    assert friedman_decision(19.6571, 6, 20)
    assert chi2_critical(6) == 11.0705
    assert not friedman_decision(0.0, 6, 20)
    assert not friedman_decision(11.0705, 6, 20)
    assert friedman_decision(15.1, 6, 20, alpha=0.01)
    with pytest.raises(ValueError):
        friedman_decision(5.0, 12, 20)
    with pytest.raises(ValueError):
        friedman_decision(5.0, 6, 20, alpha=0.1)


@pytest.mark.parametrize("alpha", [0.05, 0.01])
def test_chi2_table_matches_scipy(alpha):
    expect = sps.chi2.ppf(1 - alpha, np.arange(1, 11))
    np.testing.assert_allclose(CHI2_CRITICAL[alpha], expect, atol=1e-4)


# ---------------------------------------------------------------- grouping


def test_group_examples():
    assert group_by_cd([2.0, 2.0, 2.0], 0.5) == [(0, 1, 2)]
    assert group_by_cd([1.0, 2.0, 3.0], 0.0) == [(0,), (1,), (2,)]
    ranks = [2.0, 3.45, 3.45, 4.3, 4.6, 5.2]  # krv, rvm_gauss, rvm_bern, then the neighbor family
    groups = group_by_cd(ranks, 1.6861)
    assert groups[0] == (0, 1, 2)
    assert all(0 not in g for g in groups[1:])
    assert any({3, 4, 5} <= set(g) for g in groups)


@given(arrays(np.float64, st.integers(1, 8), elements=st.floats(1, 8)), st.floats(0, 5))
def test_group_properties(ranks, cd):
    groups = group_by_cd(ranks, cd)
    covered = set()
    for g in groups:
        covered |= set(g)
        r = ranks[list(g)]
        assert len(g) == 1 or r.max() - r.min() < cd
    assert covered == set(range(ranks.size))
    for a in groups:
        for b in groups:
            assert a == b or not set(a) <= set(b)


# ----------------------------------------------------------------- t-test


def test_ttest_examples():
    a = np.linspace(0.8, 0.9, 10)
    assert paired_t_test(a, a) == 0
    assert paired_t_test(np.full(100, 0.81), np.full(100, 0.80)) == 1
    with pytest.raises(ValueError):
        paired_t_test([1.0, 2.0], [1.0])


def test_ttest_against_oracle_and_scipy():
    rng = np.random.default_rng(0)
    b = rng.uniform(0.7, 0.9, size=100)
    a = b + rng.normal(0.05, 0.05, size=100)
    t, p = paired_t_statistic(a, b)
    assert t == pytest.approx(oracles.paired_t(a, b), abs=1e-9)
    ref = sps.ttest_rel(a, b)
    assert t == pytest.approx(ref.statistic, rel=1e-12)
    assert p == pytest.approx(ref.pvalue, rel=1e-9)
    assert paired_t_test(a, b) == 1


@given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=40), st.integers(0, 1000))
def test_ttest_pvalue_matches_scipy(diffs, seed):
    d = np.array(diffs) / 1000.0
    if len(set(diffs)) == 1:
        return
    b = np.random.default_rng(seed).uniform(size=d.size)
    _, p = paired_t_statistic(b + d, b)
    ref = sps.ttest_rel(b + d, b).pvalue
    assert p == pytest.approx(ref, rel=1e-6, abs=1e-12)


# ---------------------------------------------------------------- report


def test_rank_report_on_reference_table():
    rr = build_rank_report(LEARNERS, DATASETS, GAUSSIAN_ACCURACY)
    np.testing.assert_allclose(rr.avg_ranks, [4.575, 3.6, 3.625, 2.0, 3.6, 3.6])
    assert rr.rejected and rr.critical == 11.0705
    assert rr.fisher_f == pytest.approx(fisher_f(rr.chi2_F, 20, 6))
    assert rr.cd == pytest.approx(1.6861, abs=1e-3)
    assert len(rr.groups) == 2
    assert "krv" in rr.groups[0] and "krv" not in rr.groups[1]
    assert "knn" in rr.groups[1] and "knn" not in rr.groups[0]
    text = rr.to_csv()
    assert text.startswith("section,accuracies\n")
    assert "rejected,true" in text and text.count("group,") == 2
