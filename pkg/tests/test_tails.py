import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowkit import moments as mo
from shadowkit import tails as tl
from shadowkit.ensembles import EnsembleSpec


def test_moment_formula_small_cases():
    assert tl.clifford_moment(2, 1) == Fraction(3, 4)
    assert tl.clifford_moment(2, 2) == Fraction(25, 16)
    for n in range(1, 9):
        assert tl.clifford_moment(n, 0) == 1
        assert tl.clifford_moment(n, 1) == 1 - Fraction(1, 2 ** n)


def test_second_moment_equals_variance_plus_mean_sq():
    for n in range(1, 9):
        mean = 1 - Fraction(1, 2 ** n)
        assert tl.clifford_moment(n, 2) == mo.stabilizer_pair_variance(n) + mean ** 2


def test_limiting_values_and_convergence():
    assert [int(tl.limiting_moment(m)) for m in range(1, 5)] == [1, 3, 17, 179]
    for m in range(1, 9):
        lim = tl.limiting_moment(m)
        for n in (20, 30):
            gap = abs(tl.clifford_moment(n, m) - lim)
            assert gap < Fraction(1, 2 ** (n - 11)) * abs(lim)


def test_growth_bounds():
    for m in range(6, 13):
        assert tl.limiting_moment(m) >= 2 ** (m * (m - 1) // 2)
    for n in range(7, 13):
        assert tl.clifford_moment(n, n) ** 4 >= 2 ** (n * n)


def test_moment_tables():
    table = tl.MomentTable.clifford(3, 4)
    assert table.n == 3 and table.moments[0] == 1
    assert table.moments[1] == Fraction(7, 8)
    lim = tl.MomentTable.limiting(4)
    assert lim.n is None and lim.moments[4] == 179


def test_mgf_bound_examples():
    assert tl.mgf_bound_haar(0.0, 0.3, 1.0) == 1.0
    assert tl.mgf_bound_haar(0.5, 0.0, 1.0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        tl.mgf_bound_haar(1.0, 0.0, 1.0)


def test_mgf_bound_dominates_empirical_haar():
    rng = np.random.default_rng(0)
    n = 4
    xs = tl.sample_pair_xvalues(EnsembleSpec("haar", n), rng, 100_000)
    t = 0.3
    o_hs = math.sqrt(1 - 2.0 ** -n)
    emp = np.exp(t * xs)
    bound = tl.mgf_bound_haar(t, float(np.mean(xs)), o_hs)
    se = emp.std(ddof=1) / math.sqrt(len(xs))
    assert emp.mean() <= bound + 3 * se


def test_bernstein_examples():
    assert tl.bernstein_tail(12.0, 7, 1.0) == pytest.approx(2 * math.exp(-21))
    assert tl.bernstein_tail(12.0 + 1e-12, 7, 1.0) == pytest.approx(2 * math.exp(-21))
    assert tl.bernstein_tail(1e-9, 5, 1.0) == pytest.approx(2.0)
    assert tl.bernstein_tail(1.0, 100, 1.0) == pytest.approx(2 * math.exp(-100 / 48))
    with pytest.raises(ValueError):
        tl.bernstein_tail(0.0, 5, 1.0)


def test_empirical_exceedance_below_bernstein_haar():
    rng = np.random.default_rng(1)
    n = 4
    xs = tl.sample_pair_xvalues(EnsembleSpec("haar", n), rng, 50_000)
    o_hs = math.sqrt(1 - 2.0 ** -n)
    mean = 1 - 2.0 ** -n
    eps = 12.5 * o_hs
    emp = float(np.mean(np.abs(xs - mean) >= eps))
    assert emp <= tl.bernstein_tail(eps, 1, o_hs)


def test_fast_sampler_matches_exact_moments():
    rng = np.random.default_rng(2)
    for n in (2, 4):
        xs = tl.sample_pair_xvalues(EnsembleSpec("clifford", n), rng, 60_000)
        for m in (1, 2):
            emp = float(np.mean(xs ** m))
            want = float(tl.clifford_moment(n, m))
            se = np.std(xs ** m, ddof=1) / math.sqrt(len(xs))
            assert abs(emp - want) < 3 * se + 1e-12, (n, m)


def test_pair_conditional_means_match_exact_variance():
    """V* for the Clifford pair equals V1 exactly in expectation."""
    rng = np.random.default_rng(3)
    n = 3
    vals = tl.pair_conditional_means(EnsembleSpec("clifford", n), rng, 30_000)
    vstar, se = tl.variance_of_sample_variance(vals)
    assert abs(vstar - float(mo.stabilizer_pair_variance(n))) < 3 * se


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=60),
       st.lists(st.floats(-50, 50), min_size=2, max_size=60))
@settings(max_examples=50, deadline=None)
def test_moment_accumulator_merge(a, b):
    merged = tl.MomentAccumulator().add(a).merge(tl.MomentAccumulator().add(b))
    direct = tl.MomentAccumulator().add(list(a) + list(b))
    assert merged.count == direct.count
    for m in (1, 2, 3, 4):
        assert merged.raw_moment(m) == pytest.approx(direct.raw_moment(m), rel=1e-9, abs=1e-9)


def test_variance_of_sample_variance_formula():
    rng = np.random.default_rng(4)
    xs = rng.normal(size=5000)
    s2, se = tl.variance_of_sample_variance(xs)
    assert s2 == pytest.approx(np.var(xs, ddof=1))
    # for a normal sample, Var(s^2) ~ 2 sigma^4 / m
    assert se == pytest.approx(math.sqrt(2 / 5000), rel=0.2)


def test_tail_experiment_identity_is_degenerate():
    rng = np.random.default_rng(5)
    out = tl.tail_experiment(EnsembleSpec("identity", 3), 4000, rng,
                             budget=1000, batches=10)
    assert out["moments"]["2"] == pytest.approx(out["moments"]["1"] ** 2)
    assert out["mse_mean"] == pytest.approx(out["mse_median_of_means"])
    x = (2 ** 3 + 1) * (1 - 2.0 ** -3)
    assert out["moments"]["1"] == pytest.approx(x)


def test_tail_experiment_summary_fields():
    rng = np.random.default_rng(6)
    out = tl.tail_experiment(EnsembleSpec("clifford", 4), 20_000, rng,
                             budget=2000, batches=10)
    assert out["replications"] == 10
    assert set(out["moments"]) == {"1", "2", "3", "4"}
    assert len(out["exceedance"]) == 3
    assert [e["threshold"] for e in out["exceedance"]] == [2.0, 4.0, 4.0]
    emp = out["moments"]["2"]
    want = float(tl.clifford_moment(4, 2))
    assert abs(emp - want) < 5 * out["moment_se"]["2"] + 1e-9


def test_cost_model_validation():
    with pytest.raises(ValueError):
        tl.CostModel(alpha=0.5)
    with pytest.raises(ValueError):
        tl.CostModel(alpha=2.0, budget=0.0)


def test_optimal_reuse_examples():
    assert tl.optimal_reuse(tl.CostModel(alpha=1.0, v1=3.0, max_reuse=200), 0.5) == 1
    assert tl.optimal_reuse(tl.CostModel(alpha=4.0, v1=3.0, max_reuse=64), 0.0) == 64
    model = tl.CostModel(alpha=100.0, v1=3.0, max_reuse=1000)
    best = tl.optimal_reuse(model, 0.1)
    cont = tl.continuous_reuse_heuristic(100.0, 3.0, 0.1)
    assert cont == pytest.approx(math.sqrt(99 * 2.9 / 0.1))
    assert abs(best - cont) <= 1.0
    with pytest.raises(ValueError):
        tl.optimal_reuse(model, 5.0)


def test_optimal_reuse_tie_breaks_small():
    # flat objective (alpha=1, vstar=0) ties at every R: pick R=1
    assert tl.optimal_reuse(tl.CostModel(alpha=1.0, v1=2.0, max_reuse=50), 0.0) == 1
