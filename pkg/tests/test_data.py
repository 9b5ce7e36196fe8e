import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rffsgm.data import (
    Dataset,
    SplitSpec,
    load_csv,
    load_dataset,
    load_libsvm,
    load_benchmark,
    split,
    split_indices,
    standardize,
    write_libsvm,
)
from rffsgm.errors import DataFormatError, DomainError


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_libsvm_example(tmp_path):
    ds = load_libsvm(_write(tmp_path, "a.svm", "1 1:0.5\n-1 2:1.0\n"))
    assert (ds.n, ds.d) == (2, 2)
    np.testing.assert_array_equal(ds.features, [[0.5, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(ds.labels, [1.0, -1.0])


def test_libsvm_comments_and_blank_lines(tmp_path):
    ds = load_libsvm(_write(tmp_path, "a.svm", "# header\n\n1 1:2 # note\n0 3:1\n"))
    assert (ds.n, ds.d) == (2, 3)
    np.testing.assert_array_equal(ds.labels, [1.0, -1.0])


@pytest.mark.parametrize("raw, expected", [((0, 1), (-1, 1)), ((1, 2), (-1, 1)), ((2, 1), (1, -1)), ((-1, 1), (-1, 1))])
def test_libsvm_label_remap(tmp_path, raw, expected):
    text = f"{raw[0]} 1:1\n{raw[1]} 1:2\n"
    ds = load_libsvm(_write(tmp_path, "a.svm", text))
    np.testing.assert_array_equal(ds.labels, expected)


@pytest.mark.parametrize(
    "text, line",
    [
        ("1 1:0.5\n-1 2-1.0\n", 2),
        ("1 1:0.5\nx 1:1\n", 2),
        ("1 2:0.5 1:1\n-1 1:1\n", 1),
        ("1 0:0.5\n-1 1:1\n", 1),
        ("1 1:abc\n-1 1:1\n", 1),
    ],
)
def test_libsvm_malformed_reports_line(tmp_path, text, line):
    with pytest.raises(DataFormatError) as info:
        load_libsvm(_write(tmp_path, "bad.svm", text))
    assert info.value.line == line
    assert f":{line}" in str(info.value) or f"line {line}" in str(info.value)


def test_libsvm_non_binary(tmp_path):
    with pytest.raises(DomainError):
        load_libsvm(_write(tmp_path, "a.svm", "1 1:1\n2 1:2\n3 1:3\n"))
    with pytest.raises(DomainError):
        load_libsvm(_write(tmp_path, "b.svm", "1 1:1\n1 1:2\n"))


def test_libsvm_extra_paths_share_label_map(tmp_path):
    a = _write(tmp_path, "a", "1 1:1\n1 1:2\n")
    b = _write(tmp_path, "a.t", "0 1:3\n1 2:4\n")
    ds = load_libsvm(a, extra_paths=[b])
    np.testing.assert_array_equal(ds.labels, [1, 1, -1, 1])
    assert ds.d == 2


def test_libsvm_round_trip(tmp_path, rng):
    X = rng.normal(size=(30, 6)) * rng.integers(0, 2, size=(30, 6))
    X[0, 0] = 1.0  # keep every column index reachable
    X[:, -1] = rng.normal(size=30)
    y = np.where(rng.random(30) < 0.5, -1.0, 1.0)
    y[:2] = [-1.0, 1.0]
    ds = Dataset(X, y, name="r")
    p = tmp_path / "r.svm"
    write_libsvm(ds, p)
    back = load_libsvm(p)
    assert np.max(np.abs(back.features - X)) <= 1e-9
    np.testing.assert_array_equal(back.labels, y)


def test_label_mapping_idempotent(tmp_path):
    ds = load_libsvm(_write(tmp_path, "a.svm", "-1 1:1\n1 1:2\n1 1:0.5\n"))
    p = tmp_path / "b.svm"
    write_libsvm(ds, p)
    np.testing.assert_array_equal(load_libsvm(p).labels, [-1, 1, 1])


def test_csv_example(tmp_path):
    ds = load_csv(_write(tmp_path, "a.csv", "1,2,0\n3,4,1\n5,6,0\n"), label_column=-1)
    np.testing.assert_array_equal(ds.labels, [-1, 1, -1])
    np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4], [5, 6]])


def test_csv_header_and_label_column(tmp_path):
    ds = load_csv(_write(tmp_path, "a.csv", "cls,a,b\n1,2,3\n2,4,5\n"), label_column=0)
    np.testing.assert_array_equal(ds.labels, [-1, 1])
    np.testing.assert_array_equal(ds.features, [[2, 3], [4, 5]])


def test_csv_errors(tmp_path):
    with pytest.raises(DataFormatError) as info:
        load_csv(_write(tmp_path, "r.csv", "1,2,0\n3,1\n"))
    assert info.value.line == 2
    with pytest.raises(DomainError):
        load_csv(_write(tmp_path, "c.csv", "1,2,0\n3,4,1\n5,6,2\n"))
    with pytest.raises(DataFormatError):
        load_csv(_write(tmp_path, "n.csv", "1,2,0\n3,x,1\n"))


def test_load_dataset_dispatch(tmp_path):
    assert load_dataset(_write(tmp_path, "a.csv", "1,0\n2,1\n")).d == 1
    assert load_dataset(_write(tmp_path, "a.txt", "1 1:1\n0 1:2\n"), fmt="libsvm").n == 2
    with pytest.raises(DomainError):
        load_dataset(tmp_path / "a.csv", fmt="arff")


def test_dataset_invariants():
    with pytest.raises(DomainError):
        Dataset(np.array([[np.nan], [1.0]]), np.array([1.0, -1.0]))
    with pytest.raises(DomainError):
        Dataset(np.ones((2, 1)), np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        Dataset(np.ones((2, 0)), np.array([1.0, -1.0]))
    ds = Dataset(np.ones((2, 1)), np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        ds.features[0, 0] = 5.0


def test_standardize_examples():
    ds = Dataset(np.array([[1.0, 5.0], [3.0, 5.0]]), np.array([1.0, -1.0]))
    out, scaling = standardize(ds)
    np.testing.assert_array_equal(out.features[:, 0], [-1.0, 1.0])
    np.testing.assert_array_equal(out.features[:, 1], [0.0, 0.0])
    assert scaling.mean[0] == 2.0 and scaling.std[0] == 1.0
    const = Dataset(np.full((3, 1), 5.0), np.array([1.0, -1.0, 1.0]))
    np.testing.assert_array_equal(standardize(const)[0].features[:, 0], [0, 0, 0])


def test_standardize_moments(rng):
    X = rng.normal(loc=3.0, scale=7.0, size=(100, 5))
    y = np.where(rng.random(100) < 0.5, -1.0, 1.0)
    out, _ = standardize(Dataset(X, y))
    assert np.max(np.abs(out.features.mean(axis=0))) <= 1e-12
    assert np.max(np.abs(out.features.std(axis=0) - 1.0)) <= 1e-12


def test_standardize_reuses_train_stats(rng):
    X = rng.normal(size=(20, 3))
    y = np.where(np.arange(20) % 2 == 0, 1.0, -1.0)
    ds = Dataset(X, y)
    _, scaling = standardize(ds.subset(np.arange(10)))
    held = scaling.apply(ds.subset(np.arange(10, 20)))
    np.testing.assert_allclose(held.features, (X[10:] - scaling.mean) / scaling.std)


def test_split_examples():
    tr1, te1 = split_indices(10, SplitSpec(0.2, seed=3))
    tr2, te2 = split_indices(10, SplitSpec(0.2, seed=3))
    assert (len(tr1), len(te1)) == (8, 2)
    np.testing.assert_array_equal(tr1, tr2)
    np.testing.assert_array_equal(te1, te2)
    tr3, te3 = split_indices(10, SplitSpec(0.2, seed=4))
    assert len(te3) == 2
    assert set(tr1) | set(te1) == set(range(10))
    assert not set(tr1) & set(te1)


def test_split_seeds_differ():
    sets = {tuple(split_indices(50, SplitSpec(0.2, seed=s))[1]) for s in range(5)}
    assert len(sets) > 1


def test_split_without_shuffle():
    tr, te = split_indices(10, SplitSpec(0.3, shuffle=False))
    np.testing.assert_array_equal(tr, np.arange(7))
    np.testing.assert_array_equal(te, [7, 8, 9])


@pytest.mark.parametrize("f, n", [(0.0, 10), (1.0, 10), (0.05, 10), (0.95, 10), (-0.1, 10)])
def test_split_degenerate(f, n):
    with pytest.raises(DomainError):
        split_indices(n, SplitSpec(f))


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 500), f=st.floats(0.01, 0.99), seed=st.integers(0, 2**32 - 1))
def test_split_partition_property(n, f, seed):
    spec = SplitSpec(f, seed=seed)
    n_test = int(np.floor(f * n + 1e-9))
    if f * n < 1 - 1e-9 or (1 - f) * n < 1 - 1e-9:
        with pytest.raises(DomainError):
            split_indices(n, spec)
        return
    tr, te = split_indices(n, spec)
    assert len(te) == n_test
    assert np.array_equal(np.sort(np.concatenate([tr, te])), np.arange(n))


def test_split_datasets_byte_equal(rng):
    X = rng.normal(size=(12, 2))
    y = np.where(np.arange(12) % 3 == 0, 1.0, -1.0)
    ds = Dataset(X, y, name="s")
    a_tr, a_te = split(ds, SplitSpec(0.25, seed=8))
    b_tr, b_te = split(ds, SplitSpec(0.25, seed=8))
    assert a_tr.features.tobytes() == b_tr.features.tobytes()
    assert a_te.labels.tobytes() == b_te.labels.tobytes()
    assert a_tr.name == "s-train"


def test_load_benchmark_errors(tmp_path):
    with pytest.raises(DomainError):
        load_benchmark("mnist")
    with pytest.raises(FileNotFoundError):
        load_benchmark("pima", data_dir=tmp_path)


def test_load_benchmark_svmguide3_halves(tmp_path):
    _write(tmp_path, "svmguide3", "1 1:1\n1 2:2\n")
    _write(tmp_path, "svmguide3.t", "0 1:3\n")
    ds = load_benchmark("svmguide3", data_dir=tmp_path)
    assert ds.n == 3
    np.testing.assert_array_equal(ds.labels, [1, 1, -1])
