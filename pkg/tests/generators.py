"""Random problem generators and reusable invariant checks shared by several test files."""

import numpy as np

from ldep import data as dp
from ldep.ccp import LabeledData


def _num(name, vals):
    return dp.Column(name, dp.NUMERIC, np.asarray(vals, dtype=float))


def _cat(name, vals):
    arr = np.empty(len(vals), dtype=object)
    arr[:] = vals
    return dp.Column(name, dp.CATEGORICAL, arr)


def random_dataset(rng, k):
    """Mixed numeric/categorical table with gaps; each class has at least ``k`` rows."""
    m_pos = int(rng.integers(k, 30))
    m_neg = int(rng.integers(k, 30))
    m = m_pos + m_neg
    y = np.array(["pos"] * m_pos + ["neg"] * m_neg)
    rng.shuffle(y)
    cols = []
    for j in range(int(rng.integers(1, 5))):
        if rng.random() < 0.6:
            v = rng.normal(size=m) * rng.uniform(0.1, 100)
            if rng.random() < 0.3:
                v[:] = v[0]
            gaps = rng.random(m) < 0.2
            gaps[: -(-m // k) + 1] = False  # more observed values than any fold holds
            v[gaps] = np.nan
            cols.append(_num(f"n{j}", v))
        else:
            vocab = [f"v{i}" for i in range(int(rng.integers(1, 5)))]
            cols.append(_cat(f"c{j}", [None if rng.random() < 0.2 else str(rng.choice(vocab)) for _ in range(m)]))
    return dp.Dataset(tuple(cols), tuple(y))


def check_pipeline_invariants(ds, k, seed):
    """Partition, stratification, totality, purity and no-leakage for one dataset."""
    split = dp.stratified_kfold(ds.y, k, seed)
    assert sorted(i for f in split.folds for i in f) == list(range(ds.m))
    for cls in ds.classes:
        sizes = [sum(ds.y[i] == cls for i in f) for f in split.folds]
        assert max(sizes) - min(sizes) <= 1
    for fold in range(split.k):
        tr, te = split.train_test(fold)
        train = ds.subset(tr)
        p = dp.fit_preprocessor(train)
        X_tr = dp.transform(p, train)
        assert np.all(np.isfinite(X_tr)) and np.all(np.isfinite(dp.transform(p, ds.subset(te))))
        assert np.array_equal(X_tr, dp.transform(p, train))
        # scrambling held-out rows changes nothing fitted on the training part
        rng = np.random.default_rng([seed, fold])
        scrambled = []
        for c in ds.columns:
            v = c.values.copy()
            if c.kind == dp.NUMERIC:
                v[te] = rng.normal(size=len(te)) * 1e6
            else:
                v[te] = "leak"
            scrambled.append(dp.Column(c.name, c.kind, v))
        ds2 = dp.Dataset(tuple(scrambled), ds.y)
        p2 = dp.fit_preprocessor(ds2.subset(tr))
        assert p2.to_dict() == p.to_dict()
        assert np.array_equal(dp.transform(p2, ds2.subset(tr)), X_tr)
        j = 0
        for st in p.columns:
            if st.kind == dp.NUMERIC:
                col = X_tr[:, j]
                assert abs(col.mean()) <= 1e-9
                assert abs(col.std() - 1) <= 1e-9 or np.all(col == 0)
            j += st.width


def random_training_set(rng, m_max=20, n_max=4):
    """Gaussian points with random +-1 labels; both classes present."""
    m = int(rng.integers(4, m_max + 1))
    n = int(rng.integers(1, n_max + 1))
    X = rng.normal(size=(m, n))
    y = np.where(rng.random(m) < 0.5, 1, -1)
    y[0], y[1] = 1, -1
    return LabeledData(X, y)
