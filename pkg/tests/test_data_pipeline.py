import math

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from ohcsvm.constants_config import FAILED, NON_FAILED
from ohcsvm.data_pipeline import (
    Dataset,
    FeatureScaler,
    HomogenizedIncrement,
    LabeledSample,
    LoadPath,
    PlateGeometry,
    RawIncrement,
    export_dataset,
    export_paths,
    homogenize_increment,
    homogenize_strains,
    homogenize_stresses,
    ingest_paths,
    label_samples,
    paths_from_raw,
    read_dataset,
    scale_features,
    split_dataset,
    stiffness_history,
)
from ohcsvm.errors import (
    DegeneratePathError,
    EmptyDatasetError,
    InvalidRecordError,
    ParameterError,
    ParseError,
    ShearSingularityError,
    StratificationError,
)


def linear_path(path_id, strains, moduli=(1000.0, 1000.0, 1000.0), softening=None):
    """Path with sigma = moduli * eps, optionally scaled per increment by `softening`."""
    strains = np.asarray(strains, dtype=float)
    factors = np.ones((len(strains), 3)) if softening is None else np.asarray(softening, dtype=float)
    increments = [
        HomogenizedIncrement(eps=e, sig=np.asarray(moduli) * e * f)
        for e, f in zip(strains, factors)
    ]
    return LoadPath(path_id=path_id, increments=increments)


def write_csv(tmp_path, text, name="paths.csv"):
    file = tmp_path / name
    file.write_text(text, encoding="utf-8")
    return file


HEADER = "path_id,increment,eps11,eps22,gam12,sig11,sig22,sig12\n"


# =====================================================================
# Homogenization
# =====================================================================

@pytest.mark.parametrize(
    "u, expected",
    [
        ([0.3, 0, 0, 0], [0.01, 0, 0]),
        ([0, 0, 0.3, 0.3], [0, 0, 0.02]),
        ([0.15, -0.3, 0, 0], [0.005, -0.01, 0]),
    ],
)
def test_homogenize_strains(geom, u, expected):
    assert_allclose(homogenize_strains(u, geom), expected, atol=1e-15)


def test_homogenize_strains_is_linear(geom, rng):
    u = rng.normal(size=4)
    assert_allclose(homogenize_strains(2 * u, geom), 2 * homogenize_strains(u, geom), rtol=0, atol=0)


def test_homogenize_strains_rejects_non_finite(geom):
    with pytest.raises(InvalidRecordError):
        homogenize_strains([math.nan, 0, 0, 0], geom)


def test_homogenize_axial_stress(geom):
    sig = homogenize_stresses([30, 0, 0, 0], [0, 0, 0, 0], 0.0, geom)
    assert sig[0] == pytest.approx(1.0)
    assert sig[2] == 0.0


def test_homogenize_shear_stress(geom):
    sig = homogenize_stresses([0, 0, 1, 0], [0, 0, 0.3, 0], 0.01, geom)
    assert sig[2] == pytest.approx(0.3 / 9)


def test_shear_singularity(geom):
    with pytest.raises(ShearSingularityError):
        homogenize_stresses([0, 0, 1, 0], [0, 0, 0, 0], 0.0, geom)


def test_homogenize_increment_substitutes_zero_shear(geom, caplog):
    raw = RawIncrement(u=np.array([0.3, 0, 0, 0]), f=np.array([30.0, 0, 1.0, 0]), time=0.5)
    inc = homogenize_increment(raw, geom)
    assert_allclose(inc.eps, [0.01, 0, 0])
    assert_allclose(inc.sig, [1.0, 0, 0])
    assert "sig12 set to 0" in caplog.text


def test_geometry_validation():
    with pytest.raises(ParameterError):
        PlateGeometry(d1=0.0)


# =====================================================================
# Stiffness degradation and labeling
# =====================================================================

def test_constant_secant_law_gives_unit_degradation():
    path = linear_path("p", [[0.001, 0.002, -0.001], [0.002, 0.004, -0.002], [0.004, 0.008, -0.004]])
    for state in stiffness_history(path):
        assert abs(state.d_s - 1.0) <= 1e-12


def test_halved_transverse_stiffness():
    strains = [[0.001, 0.001, 0.001], [0.002, 0.002, 0.002], [0.003, 0.003, 0.003]]
    softening = [[1, 1, 1], [1, 1, 1], [1, 0.5, 1]]
    states = stiffness_history(linear_path("p", strains, softening=softening))
    assert states[-1].d_s == pytest.approx(0.5)
    assert states[-1].e2 == pytest.approx(500.0)


def test_zero_components_are_excluded():
    strains = [[0.001, 0, 0], [0.002, 0, 0], [0.003, 0, 0]]
    softening = [[1, 1, 1], [1, 1, 1], [0.8, 1, 1]]
    states = stiffness_history(linear_path("p", strains, softening=softening))
    assert states[-1].d_s == pytest.approx(0.8)
    assert math.isnan(states[-1].e2)
    assert math.isnan(states[-1].g12)


def test_degenerate_path():
    path = linear_path("zero", [[0, 0, 0], [1e-10, 0, 0]])
    with pytest.raises(DegeneratePathError):
        stiffness_history(path)


def test_explicit_baseline_window():
    strains = [[0.001, 0, 0], [0.002, 0, 0], [0.003, 0, 0]]
    softening = [[1, 1, 1], [0.9, 1, 1], [0.45, 1, 1]]
    path = LoadPath("p", linear_path("p", strains, softening=softening).increments, baseline_window=(1, 2))
    assert stiffness_history(path)[-1].d_s == pytest.approx(0.5)


def test_load_path_needs_two_increments():
    with pytest.raises(ParameterError):
        LoadPath("p", [HomogenizedIncrement(eps=np.ones(3) * 1e-3, sig=np.ones(3))])


@pytest.mark.parametrize(
    "final_ratio, expected",
    [(0.85, FAILED), (0.95, NON_FAILED), (0.9, NON_FAILED)],
)
def test_label_threshold(final_ratio, expected):
    # powers of two keep the secant ratio exact at the 0.9 boundary
    strains = [[2.0 ** -10, 0, 0], [2.0 ** -9, 0, 0]]
    path = linear_path(
        "p", strains, moduli=(1024.0, 1024.0, 1024.0), softening=[[1, 1, 1], [final_ratio, 1, 1]]
    )
    samples = label_samples([path], threshold=0.9)
    assert [s.y for s in samples] == [NON_FAILED, expected]
    assert samples[-1].d_s == pytest.approx(final_ratio)


def test_label_is_monotone_in_threshold(synthetic_200):
    paths = synthetic_200.paths
    low = np.array([s.y for s in label_samples(paths, threshold=0.5)])
    high = np.array([s.y for s in label_samples(paths, threshold=0.95)])
    assert not np.any((low == FAILED) & (high == NON_FAILED))


def test_label_rejects_bad_threshold():
    with pytest.raises(ParameterError):
        label_samples([], threshold=1.0)


def test_terminal_only_keeps_last_increment(synthetic_200):
    samples = label_samples(synthetic_200.paths[:5], terminal_only=True)
    assert [s.increment for s in samples] == [1] * 5


# =====================================================================
# CSV ingestion and export
# =====================================================================

def test_ingest_two_paths(tmp_path):
    rows = [
        f"{pid},{k},{0.001 * (k + 1)},0,0,{(k + 1)},0,0"
        for pid in ("a", "b")
        for k in range(3)
    ]
    paths = ingest_paths(write_csv(tmp_path, HEADER + "\n".join(rows) + "\n"))
    assert [p.path_id for p in paths] == ["a", "b"]
    assert [len(p) for p in paths] == [3, 3]


def test_ingest_names_bad_row(tmp_path):
    text = HEADER + "a,0,0.001,0,0,1,0,0\na,1,oops,0,0,2,0,0\n"
    with pytest.raises(ParseError, match="row 2"):
        ingest_paths(write_csv(tmp_path, text))


def test_ingest_rejects_non_monotone_increment(tmp_path):
    text = HEADER + "a,0,0.001,0,0,1,0,0\na,2,0.002,0,0,2,0,0\na,1,0.003,0,0,3,0,0\n"
    with pytest.raises(ParseError) as excinfo:
        ingest_paths(write_csv(tmp_path, text))
    assert excinfo.value.row == 3


def test_ingest_rejects_missing_column(tmp_path):
    text = "path_id,increment,eps11,eps22,sig11,sig22,sig12\na,0,0.001,0,1,0,0\n"
    with pytest.raises(ParseError, match="gam12"):
        ingest_paths(write_csv(tmp_path, text))


def test_ingest_empty_file(tmp_path):
    with pytest.raises(EmptyDatasetError):
        ingest_paths(write_csv(tmp_path, ""))


def test_ingest_schema_mismatch(tmp_path):
    file = write_csv(tmp_path, HEADER + "a,0,0.001,0,0,1,0,0\na,1,0.002,0,0,2,0,0\n")
    with pytest.raises(ParseError, match="raw"):
        ingest_paths(file, schema="raw")


def test_export_then_ingest_is_identity(tmp_path, synthetic_200):
    paths = list(synthetic_200.paths[:20])
    again = ingest_paths(export_paths(paths, tmp_path / "out.csv"))
    assert [p.path_id for p in again] == [p.path_id for p in paths]
    for a, b in zip(paths, again):
        assert_allclose(b.strains, a.strains, rtol=0, atol=1e-12)
        assert_allclose(b.stresses, a.stresses, rtol=0, atol=1e-12)


def test_raw_rows_are_homogenized(geom):
    rows = pd.DataFrame(
        [
            ["r", 0, 0.5, 0.03, 0, 0.15, 0.15, 30.0, 0, 3.0, 3.0],
            ["r", 1, 1.0, 0.06, 0, 0.3, 0.3, 60.0, 0, 6.0, 6.0],
        ],
        columns=["path_id", "increment", "time", "U1", "U2", "U3", "U4", "F1", "F2", "F3", "F4"],
    )
    (path,) = paths_from_raw(rows, geom)
    assert_allclose(path.strains[1], [0.002, 0, 0.02])
    # sig12 = (F3 U3 + F4 U4) / (gam12 t D1 D2) = 3.6 / (0.02 * 900)
    assert_allclose(path.stresses[1], [2.0, 0, 0.2])


def test_raw_rows_need_increasing_time(geom):
    rows = pd.DataFrame(
        [
            ["r", 0, 1.0, 0.03, 0, 0, 0, 30.0, 0, 0, 0],
            ["r", 1, 1.0, 0.06, 0, 0, 0, 60.0, 0, 0, 0],
        ],
        columns=["path_id", "increment", "time", "U1", "U2", "U3", "U4", "F1", "F2", "F3", "F4"],
    )
    with pytest.raises(ParseError, match="time"):
        paths_from_raw(rows, geom)


def test_dataset_export_round_trip(tmp_path, synthetic_200):
    ds = Dataset(synthetic_200.samples[:10])
    split = ["train"] * 8 + ["test"] * 2
    samples, tags = read_dataset(export_dataset(ds, tmp_path / "labeled.csv", split))
    assert tags == split
    assert [s.y for s in samples] == [s.y for s in ds.samples]
    assert_allclose(np.vstack([s.eps for s in samples]), ds.X, rtol=0, atol=1e-15)
    assert samples[0].d_s == pytest.approx(ds.samples[0].d_s)


def test_invalid_label_rejected():
    with pytest.raises(ParameterError):
        LabeledSample(eps=np.zeros(3), y=0)


# =====================================================================
# Scaling and splitting
# =====================================================================

def test_scale_features_endpoints():
    X = np.array([[0.01, 0.0, -0.01]])
    classical, _ = scale_features(X, (-1.0, 1.0))
    quantum, _ = scale_features(X, (-math.pi / 2, math.pi / 2))
    assert_allclose(classical, [[1.0, 0.0, -1.0]], atol=1e-12)
    assert_allclose(quantum, [[math.pi / 2, 0.0, -math.pi / 2]], atol=1e-12)


def test_scaler_is_invertible(rng):
    scaler = FeatureScaler(target=(-math.pi / 2, math.pi / 2))
    x = rng.uniform(-0.01, 0.01, size=(50, 3))
    assert_allclose(scaler.inverse_transform(scaler.transform(x)), x, rtol=0, atol=1e-12)


def test_scaler_serialisation():
    scaler = FeatureScaler(target=(-2.0, 2.0))
    again = FeatureScaler.from_dict(scaler.to_dict())
    assert again == scaler
    assert again.fingerprint == scaler.fingerprint
    assert FeatureScaler().fingerprint != scaler.fingerprint


def test_degenerate_scaler():
    with pytest.raises(ParameterError):
        FeatureScaler(target=(1.0, 1.0))


def _balanced(n_fail, n_ok):
    samples = [LabeledSample(eps=np.full(3, 1e-3 * k), y=FAILED) for k in range(n_fail)]
    samples += [LabeledSample(eps=np.full(3, -1e-3 * k), y=NON_FAILED) for k in range(n_ok)]
    return Dataset(samples)


def test_split_sizes_1960():
    ds = _balanced(980, 980)
    train, test = split_dataset(ds, test_fraction=0.2, seed=0)
    assert (len(train), len(test)) == (1568, 392)


def test_split_small_balanced():
    train, test = split_dataset(_balanced(5, 5), test_fraction=0.2, seed=0)
    assert train.class_counts == (4, 4)
    assert test.class_counts == (1, 1)


def test_split_is_a_seeded_partition(synthetic_200):
    train_a, test_a = split_dataset(synthetic_200, 0.2, seed=11)
    train_b, test_b = split_dataset(synthetic_200, 0.2, seed=11)
    ids = lambda ds: [s.path_id for s in ds.samples]
    assert ids(train_a) == ids(train_b)
    assert ids(test_a) == ids(test_b)
    assert set(ids(train_a)).isdisjoint(ids(test_a))
    assert sorted(ids(train_a) + ids(test_a)) == sorted(ids(synthetic_200))


def test_split_is_stratified(synthetic_200):
    _, test = split_dataset(synthetic_200, 0.2, seed=5)
    n_fail, n_ok = synthetic_200.class_counts
    t_fail, t_ok = test.class_counts
    assert abs(t_fail - 0.2 * n_fail) <= 1
    assert abs(t_ok - 0.2 * n_ok) <= 1


def test_split_needs_two_per_class():
    with pytest.raises(StratificationError):
        split_dataset(_balanced(1, 9), test_fraction=0.2, seed=0)


def test_dataset_scaled_features_follow_scaler(synthetic_200):
    ds = synthetic_200.with_scaler(FeatureScaler(target=(0.0, 1.0)))
    assert_array_equal(ds.scaled_features(), ds.scaler.transform(ds.X))
    assert ds.scaled_features().min() >= 0.0
