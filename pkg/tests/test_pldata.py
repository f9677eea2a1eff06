import numpy as np
import pytest

from src.mgpll.errors import ConfigError, DatasetError, DatasetFormatError, ShapeError
from src.mgpll.pldata import (
    Coupling,
    FeatureScaler,
    NoiseMode,
    PLDataset,
    SynthConfig,
    coupled_label_map,
    from_labels,
    kfold_split,
    load_dataset,
    load_labeled_csv,
    normalize_features,
    standard_configurations,
    synthesize,
    write_dataset,
)

from toydata import three_class


def _clean(n: int, n_classes: int, seed: int = 0) -> PLDataset:
    rng = np.random.default_rng(seed)
    return from_labels(rng.normal(size=(n, 2)), np.arange(n) % n_classes, n_classes=n_classes)


# ==================== Dataset invariants ====================

def test_dataset_rejects_empty_candidate_set():
    with pytest.raises(DatasetError):
        PLDataset(np.zeros((2, 1)), [[1.0, 0.0], [0.0, 0.0]])


def test_dataset_rejects_true_label_outside_candidates():
    with pytest.raises(DatasetError):
        PLDataset(np.zeros((1, 1)), [[1.0, 0.0]], true_labels=[1])


def test_dataset_is_read_only():
    ds = three_class()
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0
    assert ds.mean_candidates == pytest.approx(1.5)


# ==================== Formats ====================

def test_plcsv_write_load_keeps_values_exact(tmp_path, three):
    path = write_dataset(three, tmp_path / "three.plcsv")
    loaded = load_dataset(path)
    np.testing.assert_array_equal(loaded.features, three.features)
    np.testing.assert_array_equal(loaded.candidates, three.candidates)
    np.testing.assert_array_equal(loaded.true_labels, three.true_labels)
    assert loaded.name == "three"


def test_plsparse_and_class_names(tmp_path):
    path = tmp_path / "small.plsparse"
    path.write_text(
        "# sparse example\n"
        "2 4 3\n"
        "@classes cat,dog,bird\n"
        "1:0.5 3:-2 | 0,2\n"
        "| 1\n"
    )
    ds = load_dataset(path)
    np.testing.assert_array_equal(ds.features, [[0.0, 0.5, 0.0, -2.0], [0.0, 0.0, 0.0, 0.0]])
    np.testing.assert_array_equal(ds.candidates, [[1, 0, 1], [0, 1, 0]])
    assert ds.class_names == ("cat", "dog", "bird")
    assert not ds.has_true_labels


@pytest.mark.parametrize("body,line", [
    ("2 2 2\n0.1,0.2 | 0\n0.3 | 1\n", 3),           # wrong feature count
    ("2 2 2\n0.1,0.2 | 0\n0.3,abc | 1\n", 3),       # not a number
    ("1 2 2\n\n0.1,0.2 | 2\n", 3),                   # candidate out of range
    ("1 2 2\n0.1,0.2 | 0 | 1\n", 2),                 # truth not a candidate
    ("1 2 2\n0.1,nan | 0\n", 2),                     # non-finite
    ("1 2\n", 1),                                    # bad header
])
def test_malformed_lines_are_reported(tmp_path, body, line):
    path = tmp_path / "bad.plcsv"
    path.write_text(body)
    with pytest.raises(DatasetFormatError) as excinfo:
        load_dataset(path)
    assert excinfo.value.line == line


def test_instance_count_must_match_header(tmp_path):
    path = tmp_path / "short.plcsv"
    path.write_text("3 1 2\n0.5 | 0\n")
    with pytest.raises(DatasetFormatError):
        load_dataset(path)


def test_unknown_suffix(tmp_path):
    path = tmp_path / "data.txt"
    path.write_text("1 1 1\n0 | 0\n")
    with pytest.raises(DatasetFormatError):
        load_dataset(path)


def test_mat_file(tmp_path):
    from scipy.io import savemat
    from scipy.sparse import csc_matrix

    partial = np.array([[1, 0, 1], [1, 1, 0]], dtype=float)    # L x n
    target = np.array([[1, 0, 1], [0, 1, 0]], dtype=float)
    path = tmp_path / "bench.mat"
    savemat(str(path), {
        "data": np.arange(6, dtype=float).reshape(3, 2),
        "partial_target": csc_matrix(partial),
        "target": target,
    })
    ds = load_dataset(path)
    assert (ds.n_instances, ds.n_features, ds.n_classes) == (3, 2, 2)
    np.testing.assert_array_equal(ds.candidates, partial.T)
    np.testing.assert_array_equal(ds.true_labels, [0, 1, 0])


def test_labeled_csv_maps_string_labels(tmp_path):
    path = tmp_path / "iris.csv"
    path.write_text("a,b,label\n1.0,2.0,setosa\n3.0,4.0,virginica\n5.0,6.0,setosa\n")
    ds = load_labeled_csv(path, has_header=True)
    assert ds.class_names == ("setosa", "virginica")
    np.testing.assert_array_equal(ds.true_labels, [0, 1, 0])
    assert ds.is_clean()


def test_labeled_csv_sorts_integer_labels_numerically(tmp_path):
    path = tmp_path / "ages.csv"
    path.write_text("10,0.1\n2,0.2\n33,0.3\n")
    ds = load_labeled_csv(path, label_column=0)
    assert ds.class_names == ("2", "10", "33")
    np.testing.assert_array_equal(ds.true_labels, [1, 0, 2])


# ==================== Scaling ====================

def test_scaler_maps_columns_to_unit_range():
    x = np.array([[0.0, 5.0, 1.0], [10.0, 5.0, 3.0], [5.0, 5.0, 2.0]])
    scaled = FeatureScaler.fit(x).transform(x)
    np.testing.assert_allclose(scaled[:, 0], [-1.0, 1.0, 0.0])
    np.testing.assert_array_equal(scaled[:, 1], 0.0)
    assert scaled.min() >= -1.0 and scaled.max() <= 1.0


def test_scaling_is_idempotent(three):
    once = normalize_features(three)
    twice = normalize_features(once)
    np.testing.assert_array_equal(once.features, twice.features)


def test_scaler_reuses_training_statistics():
    scaler = FeatureScaler.fit(np.array([[0.0], [2.0]]))
    np.testing.assert_allclose(scaler.transform([[1.0], [4.0]], clip=False), [[0.0], [3.0]])
    np.testing.assert_allclose(scaler.transform([[4.0]]), [[1.0]])
    with pytest.raises(ShapeError):
        scaler.transform([[1.0, 2.0]])


# ==================== Synthesis ====================

def test_random_noise_corrupts_exact_proportion():
    clean = _clean(2000, 3)
    ds = synthesize(clean, SynthConfig.random(p=0.5, r=2, seed=3))
    counts = ds.candidate_counts
    assert np.count_nonzero(counts == 3) == 1000
    assert np.count_nonzero(counts == 1) == 1000
    np.testing.assert_array_equal(ds.true_labels, clean.true_labels)
    np.testing.assert_array_equal(ds.features, clean.features)


def test_random_noise_rounds_half_to_even():
    ds = synthesize(_clean(5, 3), SynthConfig.random(p=0.5, r=1))
    assert np.count_nonzero(ds.candidate_counts == 2) == 2


def test_synthesis_is_seeded():
    clean = _clean(100, 4)
    a = synthesize(clean, SynthConfig.random(0.3, 1, seed=9))
    b = synthesize(clean, SynthConfig.random(0.3, 1, seed=9))
    c = synthesize(clean, SynthConfig.random(0.3, 1, seed=10))
    np.testing.assert_array_equal(a.candidates, b.candidates)
    assert not np.array_equal(a.candidates, c.candidates)


def test_coupled_noise_frequency():
    clean = _clean(2000, 3)
    partner = coupled_label_map(3)
    hits = 0
    for seed in range(20):
        ds = synthesize(clean, SynthConfig.coupled(epsilon=0.7, seed=seed))
        assert np.all(ds.candidate_counts == 2)
        hits += np.count_nonzero(ds.candidates[np.arange(2000), partner[clean.true_labels]] == 1.0)
    trials = 20 * 2000
    sigma = np.sqrt(0.7 * 0.3 / trials)
    assert abs(hits / trials - 0.7) < 3 * sigma


def test_coupled_label_map_has_no_fixed_points():
    for derangement in (False, True):
        mapping = coupled_label_map(7, seed=4, derangement=derangement)
        assert sorted(mapping) == list(range(7))
        assert not np.any(mapping == np.arange(7))
    ds = synthesize(_clean(50, 6), SynthConfig.coupled(0.5, coupling=Coupling.DERANGEMENT))
    assert np.all(ds.candidate_counts == 2)


def test_synthesis_rejects_bad_inputs(three):
    with pytest.raises(DatasetError):
        synthesize(three, SynthConfig.random(0.5, 1))          # already partial
    with pytest.raises(ConfigError):
        synthesize(_clean(10, 3), SynthConfig.random(0.5, 3))   # r > L - 1
    with pytest.raises(ConfigError):
        SynthConfig(p=0.5, mode=NoiseMode.COUPLED)


def test_standard_configurations():
    configs = standard_configurations()
    assert len(configs) == 28
    assert len({c.tag() for c in configs}) == 28


# ==================== Folds ====================

def test_folds_partition_instances():
    plan = kfold_split(23, k=5, seed=2)
    sizes = plan.fold_sizes()
    assert sum(sizes) == 23
    assert max(sizes) - min(sizes) <= 1
    seen = np.concatenate([plan.test_indices(f) for f in range(5)])
    assert sorted(seen) == list(range(23))
    assert set(plan.train_indices(0)).isdisjoint(plan.test_indices(0))


def test_folds_are_seeded():
    a = kfold_split(40, 10, seed=1).assignments
    b = kfold_split(40, 10, seed=1).assignments
    c = kfold_split(40, 10, seed=2).assignments
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_folds_need_enough_instances():
    with pytest.raises(DatasetError):
        kfold_split(3, 5)
    with pytest.raises(ConfigError):
        kfold_split(10, 1)
