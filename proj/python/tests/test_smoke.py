import math

import numpy as np
import pytest

import softnet


def unit_ball(rng, d):
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    return v * rng.uniform() ** (1.0 / d)


@pytest.fixture
def small_instance():
    rng = np.random.default_rng(0)
    n, d1, d2, m = 4, 2, 2, 16
    X = np.column_stack([unit_ball(rng, d1) for _ in range(n)])
    Y = np.column_stack([unit_ball(rng, d2) for _ in range(n)])
    data = softnet.Dataset(X, Y)
    net = softnet.symmetric_init(m, d1, d2, 0.5, 7)
    return data, net


def test_symmetric_init_zero_output():
    net = softnet.symmetric_init(32, 3, 2, 1.0, 42)
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = unit_ball(rng, 3)
        assert np.max(np.abs(softnet.forward(net, x))) <= 1e-12


def test_gradient_matches_finite_differences(small_instance):
    data, net = small_instance
    g = softnet.analytic_gradient(net, data)
    fd = softnet.fd_gradient(net, data, 1e-5)
    assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(fd)))
    g2 = softnet.analytic_gradient(net, data, softnet.GradientForm.DEFINITION)
    assert np.max(np.abs(g - g2)) <= 1e-12


def test_gram_is_psd_and_matches_bruteforce(small_instance):
    data, net = small_instance
    H = softnet.gram(net, data)
    Hb = softnet.gram_bruteforce(net, data)
    assert np.max(np.abs(H - Hb)) <= 1e-10
    assert np.allclose(H, H.T)
    assert softnet.min_eigenvalue(H) >= -1e-8


def test_training_reduces_loss(small_instance):
    data, _ = small_instance
    cfg = softnet.TrainConfig()
    cfg.mode = softnet.TrainMode.PRACTICAL
    cfg.m = 64
    cfg.sigma = 0.5
    cfg.eta = 1e-3
    cfg.max_steps = 50
    trace, _ = softnet.train(data, cfg, 11)
    losses = [s.loss for s in trace.steps]
    assert len(losses) == 51
    assert losses[-1] < losses[0]
    trace2, _ = softnet.train(data, cfg, 11)
    assert losses == [s.loss for s in trace2.steps]


def test_theory_params_identity():
    p = softnet.theory_hyperparams(4, 2, 0.5, 1.0, 1e-3, 0.1)
    assert p.eta * p.m * 64.0 * math.exp(16.0) / p.lambda_ == pytest.approx(0.1)
    assert softnet.compute_B(1e-4, 4, 2, 0.1, 10.0) == 1.0


def test_decomposition_identity(small_instance):
    data, net = small_instance
    eta = 1e-3
    rec = softnet.loss_decomposition(net, data, eta)
    F = softnet.predict_all(net, data)
    loss_now = np.sum((F - data.Y) ** 2)
    nxt = softnet.gd_step(net, eta, softnet.analytic_gradient(net, data))
    loss_next = np.sum((softnet.predict_all(nxt, data) - data.Y) ** 2)
    total = rec.C0 + rec.C1 + rec.C2 + rec.C3
    assert total == pytest.approx(loss_next - loss_now, abs=1e-9 * max(loss_now, 1e-9))
    assert rec.q1_inner == pytest.approx(rec.q1_quadform, rel=1e-8)


def test_diffusion_helpers():
    params = softnet.OUParams()
    assert softnet.mean_decay(0.0, params) == 1.0
    x = np.array([0.3, -0.2])
    s = softnet.gaussian_oracle_score(0.5, x, params, 1.0)
    assert np.allclose(s, -x)
    rng = softnet.Rng(3)
    x0 = np.array([0.1, 0.4])
    assert np.allclose(softnet.forward_sample(x0, 0.0, params, rng), x0)


def test_validation_errors():
    with pytest.raises(ValueError):
        softnet.Dataset(np.ones((2, 3)) * 2.0, np.zeros((1, 3)))
    with pytest.raises(ValueError):
        softnet.symmetric_init(15, 2, 1, 0.5, 1)
