import pytest
from fastapi.testclient import TestClient

from app.main import app
from ohcsvm.classical_kernels import ClassicalKernelSpec
from ohcsvm.constants_config import APP_NAME, FAILED, NON_FAILED
from ohcsvm.data_pipeline import FeatureScaler
from ohcsvm.settings import Settings, get_settings
from ohcsvm.svm_solver import decision_values, fit_svm, save_model


@pytest.fixture
def client():
    with TestClient(app) as test_client:
        yield test_client
    app.dependency_overrides.clear()


@pytest.fixture
def model_file(tmp_path, synthetic_split):
    train, _ = synthetic_split
    scaler = FeatureScaler()
    model, _ = fit_svm(ClassicalKernelSpec(gamma=1.0), scaler.transform(train.X), train.y, C=100.0, scaler=scaler)
    return save_model(model, tmp_path / "models" / "rbf.json"), model


def use_model(path):
    app.dependency_overrides[get_settings] = lambda: Settings(model_path=path)


def test_root_and_health(client):
    assert client.get("/health").json() == {"status": "healthy", "app": APP_NAME}
    assert "/score" in client.get("/").json()["routes"]


def test_check_without_model(client, tmp_path):
    use_model(tmp_path / "missing.json")
    body = client.get("/check").json()
    assert body["model_loaded"] is False
    assert "does not exist" in body["model_error"]
    assert body["cpu_count"] >= 1


def test_check_with_model(client, model_file):
    path, model = model_file
    use_model(path)
    body = client.get("/check").json()
    assert body["model_loaded"] is True
    assert body["kernel"] == "rbf"
    assert body["support_vectors"] == model.support_indices.size


def test_score_without_model_is_unavailable(client):
    app.dependency_overrides[get_settings] = lambda: Settings(model_path=None)
    response = client.post("/score", json={"strains": [[0.0, 0.0, 0.0]]})
    assert response.status_code == 503


def test_score_rejects_malformed_input(client, model_file):
    use_model(model_file[0])
    assert client.post("/score", json={"strains": []}).status_code == 422
    assert client.post("/score", json={"strains": [[0.001, 0.002]]}).status_code == 422
    assert client.post("/score", json={"rows": [[0.0, 0.0, 0.0]]}).status_code == 422


def test_score_strains(client, model_file):
    path, model = model_file
    use_model(path)
    strains = [[0.0, 0.0, 0.0], [0.01, -0.01, 0.01]]
    response = client.post("/score", json={"strains": strains})
    assert response.status_code == 200

    body = response.json()
    assert body["kernel"] == "rbf"
    assert body["labels"] == [NON_FAILED, FAILED]
    expected = decision_values(model, model.scaler.transform(strains))
    assert body["decision"] == pytest.approx(expected.tolist(), abs=1e-9)


def test_corrupt_model_file(client, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"C": 1.0}', encoding="utf-8")
    use_model(path)
    assert client.post("/score", json={"strains": [[0.0, 0.0, 0.0]]}).status_code == 503
