import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from subnmf.data import (
    Dataset,
    DatasetError,
    EmptyDatasetError,
    NonNumericFeatureError,
    PGMFormatError,
    RaggedRowsError,
    TooFewSamplesError,
    corrupt_block,
    load_csv_dataset,
    load_iris,
    load_pgm_directory,
    make_low_rank,
    normalize_samples,
    parse_shape,
    read_matrix_csv,
    read_pgm,
    write_pgm,
)


def test_iris_bundle():
    ds = load_iris()
    assert ds.n_features == 4 and ds.n_samples == 150 and ds.n_classes == 3
    assert ds.class_names == ["Iris-setosa", "Iris-versicolor", "Iris-virginica"]
    assert np.bincount(ds.labels).tolist() == [50, 50, 50]


def test_csv_categorical_and_integer_labels(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,2,b\n3,4,a\n5,6,b\n")
    ds = load_csv_dataset(f)
    assert ds.x.tolist() == [[1, 3, 5], [2, 4, 6]]
    assert ds.labels.tolist() == [0, 1, 0] and ds.class_names == ["b", "a"]
    f.write_text("y,f1\n3,0.5\n1,0.25\n")
    ds = load_csv_dataset(f, label_column=0)
    assert ds.labels.tolist() == [1, 0] and ds.x.tolist() == [[0.5, 0.25]]


@pytest.mark.parametrize(
    "text,error",
    [
        ("", EmptyDatasetError),
        ("1,2,a\n", TooFewSamplesError),
        ("1,2,a\n3,a\n", RaggedRowsError),
        ("1,2,a\n3,x,b\n", NonNumericFeatureError),
    ],
)
def test_csv_errors(tmp_path, text, error):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(error):
        load_csv_dataset(f, header=False)


def test_csv_errors_are_distinct():
    kinds = {EmptyDatasetError, TooFewSamplesError, RaggedRowsError, NonNumericFeatureError}
    assert len(kinds) == 4 and all(issubclass(k, DatasetError) for k in kinds)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv_dataset(tmp_path / "nope.csv")


def test_read_matrix_csv(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("a,b\n1,2\n3,4\n")
    assert read_matrix_csv(f, header=True).tolist() == [[1, 2], [3, 4]]


def test_normalize_examples():
    x = np.array([[2.0, 5.0, 0.0], [4.0, 5.0, 0.5], [6.0, 5.0, 1.0]])
    out = normalize_samples(x)
    np.testing.assert_allclose(out[:, 0], [0, 0.5, 1])
    assert out[:, 1].tolist() == [0, 0, 0]
    np.testing.assert_array_equal(out[:, 2], x[:, 2])


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (5, 4), elements=st.floats(-1e6, 1e6)))
def test_normalize_range(x):
    out = normalize_samples(x)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_corruption_block_size():
    ds = make_low_rank(np.random.default_rng(0))
    bad, idx = corrupt_block(ds, 12, 12, "center", np.random.default_rng(1))
    assert idx.size == 144 and len(set(idx.tolist())) == 144
    clean = np.setdiff1d(np.arange(1024), idx)
    np.testing.assert_array_equal(bad.x[clean], ds.x[clean])
    assert bad.x[idx].min() >= 0 and bad.x[idx].max() < 1
    _, one = corrupt_block(ds, 1, 1, "random", np.random.default_rng(1))
    assert one.size == 1


def test_corruption_center_position():
    ds = make_low_rank(np.random.default_rng(0))
    _, idx = corrupt_block(ds, 12, 12, "center", np.random.default_rng(1))
    rows, cols = np.divmod(idx, 32)
    assert rows.min() == 10 and rows.max() == 21 and cols.min() == 10 and cols.max() == 21


def test_corruption_deterministic():
    ds = make_low_rank(np.random.default_rng(0))
    a, ia = corrupt_block(ds, 12, 12, "random", np.random.default_rng(9))
    b, ib = corrupt_block(ds, 12, 12, "random", np.random.default_rng(9))
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(ia, ib)


def test_corruption_errors():
    ds = make_low_rank(np.random.default_rng(0), image_shape=(8, 8), n_samples=10)
    with pytest.raises(DatasetError):
        corrupt_block(ds, 9, 2, "center", np.random.default_rng(0))
    flat = Dataset(x=np.ones((4, 3)), labels=[0, 1, 0])
    with pytest.raises(DatasetError):
        corrupt_block(flat, 1, 1, "center", np.random.default_rng(0))


def test_low_rank_generator():
    ds = make_low_rank(np.random.default_rng(0), rank=5)
    assert ds.x.shape == (1024, 200) and ds.x.min() > 0
    assert np.linalg.matrix_rank(ds.x) == 5
    assert ds.n_classes == 5


def test_dataset_invariants():
    with pytest.raises(DatasetError):
        Dataset(x=np.ones((4, 3)), labels=[0, 1])
    with pytest.raises(DatasetError):
        Dataset(x=np.ones((4, 3)), labels=[0, 1, 2], feature_shape=(3, 3))


def test_pgm_round_trip(tmp_path):
    img = np.arange(12, dtype=float).reshape(3, 4)
    write_pgm(tmp_path / "a.pgm", img)
    back = read_pgm(tmp_path / "a.pgm")
    np.testing.assert_allclose(back, np.round(img / 11 * 255) / 255)
    (tmp_path / "b.pgm").write_text("P2\n# comment\n2 2\n10\n0 5\n10 2\n")
    np.testing.assert_allclose(read_pgm(tmp_path / "b.pgm"), [[0, 0.5], [1, 0.2]])
    (tmp_path / "c.pgm").write_text("P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(PGMFormatError):
        read_pgm(tmp_path / "c.pgm")


def test_pgm_directory(tmp_path):
    for cls in ("a", "b"):
        (tmp_path / cls).mkdir()
        for j in range(2):
            write_pgm(tmp_path / cls / f"{j}.pgm", np.random.default_rng(j).random((4, 5)))
    ds = load_pgm_directory(tmp_path)
    assert ds.x.shape == (20, 4) and ds.feature_shape == (4, 5)
    assert ds.labels.tolist() == [0, 0, 1, 1]


def test_parse_shape():
    assert parse_shape("12x12") == (12, 12)
    with pytest.raises(ValueError):
        parse_shape("12")
