import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldep.errors import InvalidArgument
from ldep.metrics import ConfusionMatrix, DegenerateF1Warning, accuracy, aggregate, confusion, f1

from oracles import tally

signs = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=60)


def test_confusion_examples():
    assert confusion([1, -1], [1, -1]) == ConfusionMatrix(tp=1, fp=0, fn=0, tn=1)
    with pytest.raises(InvalidArgument):
        confusion([1, -1], [1])
    with pytest.raises(InvalidArgument):
        confusion([], [])


def test_confusion_matches_tally_oracle():
    rng = np.random.default_rng(50)
    for _ in range(20):
        t, p = rng.choice([-1, 1], 50), rng.choice([-1, 1], 50)
        cm = confusion(t, p)
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == tally(t, p)


@given(st.integers(1, 60).flatmap(lambda n: st.tuples(
    st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
    st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))))
def test_flipping_predictions_swaps_counts(tp_):
    t, p = tp_
    a = confusion(t, p)
    b = confusion(t, [-v for v in p])
    assert (a.tp, a.tn) == (b.fn, b.fp) and a.total == len(t)


def test_f1_examples():
    assert f1(ConfusionMatrix(1, 0, 0, 0)) == 1.0
    assert f1(ConfusionMatrix(1, 1, 1, 0)) == 0.5
    assert f1(ConfusionMatrix(0, 3, 2, 0)) == 0.0


def test_f1_degenerate_warns():
    with pytest.warns(DegenerateF1Warning):
        assert f1(ConfusionMatrix(0, 0, 0, 7)) == 0.0


@given(signs, st.data())
def test_f1_range_and_perfect_iff(t, data):
    p = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(t), max_size=len(t)))
    cm = confusion(t, p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateF1Warning)
        v = f1(cm)
    assert 0.0 <= v <= 1.0
    assert (v == 1.0) == (cm.fp == 0 and cm.fn == 0 and cm.tp >= 1)
    assert accuracy(cm) == 1 - (cm.fp + cm.fn) / cm.total
    assert accuracy(cm) == pytest.approx((cm.tp + cm.tn) / cm.total, abs=1e-15)


def test_aggregate_examples():
    assert aggregate([1, 1, 1]) == (1, 0, 1, 0)
    mean, _, med, mad = aggregate([0, 1])
    assert (mean, med, mad) == (0.5, 0.5, 0.5)
    mean, std, med, mad = aggregate([2, 4, 4, 4, 5, 5, 7, 9])
    # deviations from the median 4.5 are (2.5, .5, .5, .5, .5, .5, 2.5, 4.5): their median is 0.5
    assert mean == 5 and med == 4.5 and mad == 0.5
    assert std == pytest.approx(np.sqrt(32 / 7), abs=1e-12)  # 2.138...
    assert aggregate([3.5]) == (3.5, 0.0, 3.5, 0.0)
    with pytest.raises(InvalidArgument):
        aggregate([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30), st.randoms())
def test_aggregate_permutation_invariant(scores, rnd):
    shuffled = list(scores)
    rnd.shuffle(shuffled)
    assert aggregate(scores) == aggregate(shuffled)
