import json

import numpy as np
import pytest

import config
from errors import OracleScaleError, ValidationError
from model import (ModelConfig, draw_block, draw_sample, linspace_lambdas, load_model_config, make_model,
                   population_covariance, save_model_config, validate_lambdas)
from rng import make_rng


def test_make_model_structure():
    model = make_model(40, [1.0, 0.7, 0.3], 0.2, make_rng(1))
    assert model.r == 3
    np.testing.assert_allclose(model.U.T @ model.U, np.eye(3), atol=1e-12)
    # AAᵀ = U Λ² Uᵀ
    np.testing.assert_allclose(model.mixing @ model.mixing.T,
                               model.U @ np.diag([1.0, 0.49, 0.09]) @ model.U.T, atol=1e-12)


def test_make_model_deterministic():
    a = make_model(10, [1.0], 0.5, make_rng(3))
    b = make_model(10, [1.0], 0.5, make_rng(3))
    np.testing.assert_array_equal(a.U, b.U)


@pytest.mark.parametrize("lambdas", [[], [0.5], [1.0, 1.2], [1.0, 0.0], [1.0, float('nan')]])
def test_validate_lambdas_rejects(lambdas):
    with pytest.raises(ValidationError):
        validate_lambdas(lambdas)


def test_make_model_rejects_rank_above_p():
    with pytest.raises(ValidationError):
        make_model(2, [1.0, 0.9, 0.8], 0.1, make_rng(0))


def test_make_model_rejects_negative_sigma():
    with pytest.raises(ValidationError):
        make_model(5, [1.0], -0.1, make_rng(0))


def test_model_is_read_only(rank1_model):
    with pytest.raises(ValueError):
        rank1_model.mixing[0, 0] = 2.0


def test_noiseless_samples_lie_in_span(rank3_model):
    model = make_model(30, [1.0, 0.8, 0.6], 0.0, make_rng(11))
    x = draw_sample(model, make_rng(4))
    np.testing.assert_allclose(x - model.U @ (model.U.T @ x), 0.0, atol=1e-12)


def test_draw_sample_deterministic(rank1_model):
    np.testing.assert_array_equal(draw_sample(rank1_model, make_rng(9)), draw_sample(rank1_model, make_rng(9)))


def test_draw_block_shape(rank3_model):
    X = draw_block(rank3_model, make_rng(2), 17)
    assert X.shape == (17, 30)


def test_population_covariance_matches_empirical(rank3_model):
    M = population_covariance(rank3_model)
    np.testing.assert_allclose(M, M.T)
    assert np.linalg.eigvalsh(M)[0] == pytest.approx(0.01, abs=1e-12)
    X = draw_block(rank3_model, make_rng(5), 200_000)
    assert np.max(np.abs(X.T @ X / X.shape[0] - M)) < 0.02


def test_population_covariance_top_eigenvalue(rank1_model):
    M = population_covariance(rank1_model)
    assert np.linalg.eigvalsh(M)[-1] == pytest.approx(1.0 + 0.01, rel=1e-12)


def test_population_covariance_guard(monkeypatch):
    monkeypatch.setattr(config, 'ORACLE_MAX_DIM', 10)
    model = make_model(11, [1.0], 0.1, make_rng(0))
    with pytest.raises(OracleScaleError):
        population_covariance(model)


def test_model_config_roundtrip(tmp_path):
    cfg = ModelConfig(p=25, lambdas=[1.0, 0.5], sigma=0.3, seed=4)
    path = str(tmp_path / 'model.cfg')
    save_model_config(cfg, path)
    loaded = load_model_config(path)
    assert loaded == cfg
    np.testing.assert_array_equal(loaded.build().U, cfg.build().U)


def test_model_config_text_with_comments(tmp_path):
    path = tmp_path / 'model.txt'
    path.write_text("# Testmodell\np = 12\nlambdas = 1, 0.5  # zwei Spikes\nsigma = 0.1\n", encoding='utf-8')
    cfg = load_model_config(str(path))
    assert cfg.p == 12
    assert cfg.lambdas == [1.0, 0.5]
    assert cfg.seed == config.DEFAULT_SEED


def test_model_config_json(tmp_path):
    path = tmp_path / 'model.json'
    path.write_text(json.dumps({'p': 8, 'lambdas': [1.0], 'sigma': 0.5, 'seed': 3}), encoding='utf-8')
    assert load_model_config(str(path)) == ModelConfig(8, [1.0], 0.5, 3)


def test_model_config_missing_key(tmp_path):
    path = tmp_path / 'model.txt'
    path.write_text("p = 12\nsigma = 0.1\n", encoding='utf-8')
    with pytest.raises(ValidationError):
        load_model_config(str(path))


def test_linspace_lambdas():
    assert linspace_lambdas(1) == [1.0]
    np.testing.assert_allclose(linspace_lambdas(3), [1.0, 2 / 3, 1 / 3])
    validate_lambdas(linspace_lambdas(7))


def test_noise_energy_scales_with_dimension():
    p, n, sigma = 200, 10_000, 0.5
    noisy = make_model(p, [1.0], sigma, make_rng(3))
    clean = make_model(p, [1.0], 0.0, make_rng(3))
    signal = draw_block(clean, make_rng(6), n)
    noise = draw_block(noisy, make_rng(6), n) - signal
    assert np.mean(np.sum(signal ** 2, axis=1)) == pytest.approx(1.0, rel=0.05)
    assert np.mean(np.sum(noise ** 2, axis=1)) == pytest.approx(sigma ** 2 * p, rel=0.05)
