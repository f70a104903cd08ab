import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as scipy_stats

from ddr.evaluation import (
    DatasetManifest,
    ManifestRecord,
    average_ranks,
    load_manifest,
    srcc,
)
from ddr.exceptions import (
    DataError,
    DimensionMismatchError,
    UndefinedCorrelationError,
)

from helpers import oracle_ranks, oracle_srcc


# ---------------------------------------------------------------------------
# ranks
# ---------------------------------------------------------------------------

def test_average_ranks_simple():
    assert np.array_equal(average_ranks([10.0, 30.0, 20.0]), [1.0, 3.0, 2.0])


def test_average_ranks_with_ties():
    # two values tied for ranks 2 and 3 share 2.5
    assert np.array_equal(average_ranks([1.0, 2.0, 2.0, 5.0]), [1.0, 2.5, 2.5, 4.0])


@given(st.lists(st.integers(min_value=0, max_value=5), min_size=2, max_size=12))
def test_average_ranks_match_counting_oracle(values):
    ours = average_ranks(values)
    ref = oracle_ranks(values)
    assert np.array_equal(ours, np.asarray(ref))


# ---------------------------------------------------------------------------
# srcc
# ---------------------------------------------------------------------------

def test_srcc_perfect_monotone():
    xs = [3.0, 1.0, 4.0, 1.5, 9.0]
    assert srcc(xs, xs) == 1.0
    assert srcc(xs, [-v for v in xs]) == -1.0


def test_srcc_hand_case():
    # ranks equal values; deviations (-1.5,-.5,.5,1.5) vs (-1.5,.5,-.5,1.5)
    # -> 4 / sqrt(5*5) = 0.8
    assert srcc([1.0, 2.0, 3.0, 4.0], [1.0, 3.0, 2.0, 4.0]) == pytest.approx(0.8, abs=0)


def test_srcc_rejects_bad_inputs():
    with pytest.raises(DimensionMismatchError):
        srcc([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(UndefinedCorrelationError):
        srcc([1.0], [2.0])
    with pytest.raises(UndefinedCorrelationError):
        srcc([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(UndefinedCorrelationError):
        srcc([1.0, 2.0], [5.0, 5.0])
    with pytest.raises(UndefinedCorrelationError):
        srcc([1.0, math.nan], [1.0, 2.0])


@given(
    st.lists(st.integers(min_value=1, max_value=4), min_size=2, max_size=8),
    st.integers(0, 2**31 - 1),
)
@settings(max_examples=300)
def test_srcc_matches_oracle_exactly_on_small_ints(xs, seed):
    rng = np.random.default_rng(seed)
    ys = rng.integers(1, 5, size=len(xs)).tolist()
    if min(xs) == max(xs) or min(ys) == max(ys):
        return
    assert srcc(xs, ys) == oracle_srcc(xs, ys)


def test_srcc_invariant_under_increasing_transform():
    rng = np.random.default_rng(0)
    xs = rng.standard_normal(40)
    ys = rng.standard_normal(40)
    base = srcc(xs, ys)
    assert srcc(np.exp(xs), ys) == pytest.approx(base, abs=1e-14)
    assert srcc(xs, 3.0 * ys + 7.0) == pytest.approx(base, abs=1e-14)
    assert srcc(xs ** 3, np.tanh(ys)) == pytest.approx(base, abs=1e-14)


def test_srcc_order_invariance():
    rng = np.random.default_rng(1)
    xs = rng.standard_normal(25)
    ys = rng.standard_normal(25)
    base = srcc(xs, ys)
    perm = rng.permutation(25)
    assert srcc(xs[perm], ys[perm]) == pytest.approx(base, abs=1e-14)


def test_srcc_matches_scipy():
    rng = np.random.default_rng(2)
    for n in (5, 10, 50):
        xs = rng.integers(0, 6, size=n).astype(float)
        ys = rng.standard_normal(n)
        if xs.min() == xs.max():
            continue
        ref = scipy_stats.spearmanr(xs, ys).statistic
        assert srcc(xs, ys) == pytest.approx(ref, abs=1e-12)


def test_srcc_exhaustive_ties_small_domain():
    # all pairs of length-3 lists over {1,2}, excluding constant lists
    lists = [
        list(t)
        for t in itertools.product([1, 2], repeat=3)
        if len(set(t)) > 1
    ]
    for xs in lists:
        for ys in lists:
            assert srcc(xs, ys) == oracle_srcc(xs, ys)


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

def test_load_manifest_and_relative_paths(tmp_path):
    csv_path = tmp_path / "set.csv"
    csv_path.write_text("path,mos\nimgs/a.png,3.5\nimgs/b.png,1.25\n", encoding="utf-8")
    manifest = load_manifest(csv_path)
    assert manifest.dataset_id == "set"
    assert [r.path for r in manifest.records] == ["imgs/a.png", "imgs/b.png"]
    assert [r.mos for r in manifest.records] == [3.5, 1.25]
    assert manifest.root == tmp_path


def test_load_manifest_rejects_bad_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("file,score\nx.png,1\n", encoding="utf-8")
    with pytest.raises(DataError, match="header"):
        load_manifest(bad)


def test_load_manifest_rejects_bad_mos(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("path,mos\nx.png,abc\n", encoding="utf-8")
    with pytest.raises(DataError, match="mos"):
        load_manifest(bad)


def test_load_manifest_rejects_duplicates(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("path,mos\nx.png,1\nx.png,2\n", encoding="utf-8")
    with pytest.raises(DataError, match="duplicate"):
        load_manifest(bad)


def test_load_manifest_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_manifest(tmp_path / "nope.csv")


def test_manifest_rejects_non_finite_mos():
    with pytest.raises(DataError):
        DatasetManifest(
            dataset_id="x",
            records=(ManifestRecord("a.png", math.inf),),
        )
