"""
End-to-end accuracy checks. Both are marked slow; the published-data
check also needs OHCSVM_REFERENCE_DATA pointing at the FE dataset in the
homogenized (or raw) CSV schema.

pytest -m slow
"""

import numpy as np
import pandas as pd
import pytest

from ohcsvm.classical_kernels import ClassicalKernelSpec
from ohcsvm.config import RunConfig
from ohcsvm.data_pipeline import Dataset, FeatureScaler, ingest_paths, label_samples, split_dataset
from ohcsvm.kernel_alignment import KtaConfig, train_kta
from ohcsvm.kernels import default_target
from ohcsvm.model_eval import learning_curve
from ohcsvm.pipeline import run
from ohcsvm.quantum_kernels import QuantumKernelSpec, he2_embedding
from ohcsvm.settings import get_settings

REFERENCE_DATA = get_settings().reference_data


@pytest.mark.slow
def test_synthetic_end_to_end_accuracy(tmp_path):
    config = RunConfig.model_validate({
        "input": {"synthetic": {"n": 1000}},
        "kernels": [{"name": "rbf", "kind": "rbf", "gamma": 1.0, "train": True}],
        "kta": {"iterations": 40},
        "svm": {"c_grid": [1.0, 10.0, 100.0, 1000.0], "folds": 5},
        "curve": {"fractions": [1.0]},
        "seeds": {"split_seed": 0, "theta_seed": 0, "adam_seed": 0, "cv_seed": 0, "synth_seed": 0},
    })
    run(config, out_dir=tmp_path)
    predictions = pd.read_csv(tmp_path / "predictions" / "rbf.csv")
    assert len(predictions) == 200
    assert np.mean(predictions["y_true"] == predictions["y_pred"]) >= 0.9


def _reference_split():
    paths = ingest_paths(REFERENCE_DATA)
    samples = label_samples(paths)
    return split_dataset(Dataset(samples), test_fraction=0.2, seed=0)


def _accuracy_at_full_size(train, test, spec, C):
    scaler = FeatureScaler(target=default_target(spec))
    curve = learning_curve(
        train.with_scaler(scaler), test.with_scaler(scaler), spec, C, fractions=[1.0], seed=0
    )
    return curve.points[-1].n_train, curve.points[-1].metrics.accuracy


@pytest.mark.slow
@pytest.mark.skipif(REFERENCE_DATA is None, reason="OHCSVM_REFERENCE_DATA is not set")
def test_published_dataset_rbf():
    train, test = _reference_split()
    X = FeatureScaler().transform(train.X)
    spec, _ = train_kta(ClassicalKernelSpec(gamma=1.0), X, train.y, KtaConfig())
    n_train, accuracy = _accuracy_at_full_size(train, test, spec, C=1e7)
    assert n_train == 1568
    assert accuracy == pytest.approx(0.882, abs=0.02)


@pytest.mark.slow
@pytest.mark.skipif(REFERENCE_DATA is None, reason="OHCSVM_REFERENCE_DATA is not set")
def test_published_dataset_he2_w6d3():
    train, test = _reference_split()
    X = FeatureScaler(target=(-np.pi / 2, np.pi / 2)).transform(train.X)
    spec, _ = train_kta(QuantumKernelSpec(he2_embedding(6, 3, seed=0)), X, train.y, KtaConfig())
    n_train, accuracy = _accuracy_at_full_size(train, test, spec, C=1e4)
    assert n_train == 1568
    assert accuracy == pytest.approx(0.818, abs=0.03)
