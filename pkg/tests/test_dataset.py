import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fdlsr.dataset import (
    Dataset,
    DatasetError,
    build_label_matrix,
    load_csv,
    normalize_columns,
    random_projection,
    save_csv,
    split_per_class,
    synth_blobs,
)
from fdlsr.classify import ProjectedGallery, accuracy, nn_predict

from conftest import EQ4_H, EQ4_LABELS


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_string_labels(tmp_path):
    ds = load_csv(write(tmp_path, "a,1,2\na,3,4\nb,5,6\nb,7,8\n"))
    assert ds.n_features == 2
    assert ds.n_samples == 4
    assert ds.n_classes == 2
    assert ds.class_counts.tolist() == [2, 2]
    assert ds.class_names == ("a", "b")
    np.testing.assert_array_equal(ds.features[:, 2], [5.0, 6.0])


def test_load_csv_first_appearance_order(tmp_path):
    ds = load_csv(write(tmp_path, "z,1\ny,2\nz,3\n"))
    assert ds.class_names == ("z", "y")
    assert ds.labels.tolist() == [0, 1, 0]


def test_load_csv_single_row(tmp_path):
    ds = load_csv(write(tmp_path, "7,0.5,0.25\n"))
    assert ds.n_samples == 1
    assert ds.n_classes == 1


def test_load_csv_header(tmp_path):
    ds = load_csv(write(tmp_path, "label,f1\nx,1\n"), skip_header=True)
    assert ds.n_samples == 1


def test_load_csv_missing_cell_names_row(tmp_path):
    with pytest.raises(DatasetError, match="row 2"):
        load_csv(write(tmp_path, "a,1,2\na,3,\n"))


@pytest.mark.parametrize(
    "text, match",
    [
        ("a,1,2\nb,3\n", "row 2 has 2 fields"),
        ("a,1\nb,x\n", "row 2 has non-numeric"),
        ("", "empty"),
    ],
)
def test_load_csv_errors(tmp_path, text, match):
    with pytest.raises(DatasetError, match=match):
        load_csv(write(tmp_path, text))


def test_save_load_round_trip(tmp_path):
    ds = synth_blobs(3, 4, 5, 0.7, seed=1)
    save_csv(ds, tmp_path / "s.csv")
    back = load_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.labels, ds.labels)


def test_normalize_examples():
    ds = Dataset(np.array([[3.0, 0.0], [4.0, 0.0]]), [0, 0])
    out = normalize_columns(ds).features
    np.testing.assert_allclose(out[:, 0], [0.6, 0.8], atol=1e-15)
    np.testing.assert_array_equal(out[:, 1], [0.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(arrays(float, (4, 6), elements=st.floats(-1e3, 1e3)))
def test_normalize_unit_norm_and_idempotent(X):
    ds = Dataset(X, np.zeros(6, dtype=int))
    once = normalize_columns(ds)
    norms = np.linalg.norm(once.features, axis=0)
    assert np.all((np.abs(norms - 1.0) <= 1e-12) | (norms == 0.0))
    np.testing.assert_allclose(normalize_columns(once).features, once.features, atol=1e-15)


def test_label_matrix_matches_four_sample_example():
    ds = Dataset(np.zeros((2, 4)), EQ4_LABELS)
    np.testing.assert_array_equal(build_label_matrix(ds), EQ4_H)


def test_label_matrix_inter_class_distance_sqrt2():
    H = EQ4_H
    for a in range(4):
        for b in range(4):
            if EQ4_LABELS[a] != EQ4_LABELS[b]:
                assert np.linalg.norm(H[:, a] - H[:, b]) == pytest.approx(np.sqrt(2), abs=1e-15)


def test_label_matrix_single():
    np.testing.assert_array_equal(build_label_matrix(Dataset(np.ones((1, 1)), [0])), [[1.0]])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=30))
def test_label_matrix_columns_sum_to_one(labels):
    labels = np.array(labels)
    # compact the label set so every class is populated
    _, labels = np.unique(labels, return_inverse=True)
    H = build_label_matrix(Dataset(np.zeros((1, labels.size)), labels))
    np.testing.assert_array_equal(H.sum(axis=0), np.ones(labels.size))
    assert set(np.unique(H)) <= {0.0, 1.0}


def test_split_counts_and_determinism():
    ds = Dataset(np.arange(20.0).reshape(2, 10), [0] * 5 + [1] * 5)
    train, test = split_per_class(ds, 3, seed=11)
    assert train.n_samples == 6 and test.n_samples == 4
    assert train.class_counts.tolist() == [3, 3]
    train2, test2 = split_per_class(ds, 3, seed=11)
    np.testing.assert_array_equal(train.features, train2.features)
    np.testing.assert_array_equal(test.features, test2.features)
    # disjoint: each original column lands in exactly one side
    cols = sorted(train.features[0].tolist() + test.features[0].tolist())
    assert cols == ds.features[0].tolist()


def test_split_infeasible():
    ds = Dataset(np.zeros((1, 9)), [0] * 5 + [1] * 4)
    with pytest.raises(DatasetError, match="exceeds"):
        split_per_class(ds, 5, seed=0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=5), st.integers(0, 2**32 - 1), st.data())
def test_split_preserves_label_multiset(counts, seed, data):
    labels = np.repeat(np.arange(len(counts)), counts)
    ds = Dataset(np.zeros((1, labels.size)), labels)
    k = data.draw(st.integers(1, min(counts)))
    train, test = split_per_class(ds, k, seed)
    merged = np.sort(np.concatenate([train.labels, test.labels]))
    np.testing.assert_array_equal(merged, np.sort(labels))


def test_random_projection_shape_and_determinism():
    ds = synth_blobs(2, 3, 1024, 1.0, seed=0)
    a = random_projection(ds, 540, seed=5)
    b = random_projection(ds, 540, seed=5)
    assert a.n_features == 540
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, ds.labels)


def test_random_projection_identity_hook():
    ds = synth_blobs(2, 3, 4, 1.0, seed=0)
    out = random_projection(ds, 4, seed=0, matrix=np.eye(4))
    np.testing.assert_array_equal(out.features, ds.features)


def test_synth_counts_and_seed():
    ds = synth_blobs(3, 10, 4, 0.5, seed=3)
    assert ds.n_samples == 30
    assert ds.class_counts.tolist() == [10, 10, 10]
    np.testing.assert_array_equal(ds.features, synth_blobs(3, 10, 4, 0.5, seed=3).features)


def test_synth_tiny_spread_collapses_to_centers():
    ds = synth_blobs(3, 5, 4, 1e-12, seed=2)
    for cls in range(3):
        cols = ds.features[:, ds.labels == cls]
        assert np.max(np.abs(cols - cols[:, :1])) < 1e-10


@pytest.mark.parametrize("kwargs", [dict(spread=0.0), dict(c=0)])
def test_synth_rejects_bad_params(kwargs):
    params = dict(c=2, per_class=2, d=2, spread=1.0, seed=0) | kwargs
    with pytest.raises(DatasetError):
        synth_blobs(**params)


def test_synth_huge_spread_is_chance_level():
    # Monte-Carlo over 100 seeds: raw-feature NN accuracy should sit at 1/c
    c = 4
    accs = []
    for seed in range(100):
        ds = synth_blobs(c, 10, 5, 1e3, seed)
        train, test = split_per_class(ds, 3, seed)
        pred = nn_predict(ProjectedGallery(train.features, train.labels), test.features)
        accs.append(accuracy(pred, test.labels))
    assert abs(np.mean(accs) - 1.0 / c) < 0.04
