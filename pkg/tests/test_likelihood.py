"""Marginal likelihood, risk scores and graph penalty against independent oracles."""

import math

import numpy as np
import pytest
import scipy.sparse

from conftest import random_dataset, random_params, tiny_dataset
from frailclust.data import SurvivalDataset
from frailclust.hazards import ExponentialHazard, GammaFrailty, make_frailty
from frailclust.likelihood import (LinearRiskScores, ModelParams, distance_matrix,
                                   graph_penalty, group_hazard_mass, marginal_loglik,
                                   objective_parts, pairwise_distance, penalized_objective,
                                   risk_scores)


def quadrature_loglik(data, params, frailty_family="gamma"):
    """Numeric marginal log-likelihood: integrate each group's conditional
    likelihood against the frailty density instead of using the transform."""
    import mpmath

    mpmath.mp.dps = 40
    theta = mpmath.mpf(params.frailty.theta)
    if frailty_family == "gamma":
        a = 1 / theta

        def density(u):
            return u ** (a - 1) * mpmath.exp(-u / theta) / (mpmath.gamma(a) * theta ** a)
    else:  # unit-mean inverse gaussian with variance theta

        def density(u):
            return mpmath.sqrt(1 / (2 * mpmath.pi * theta * u ** 3)) * mpmath.exp(
                -((u - 1) ** 2) / (2 * theta * u))

    xb = data.covariates @ params.beta
    h0 = params.baseline.cumulative_hazard(data.time)
    total = 0.0
    for g in range(data.n_groups):
        mask = data.group_index == g
        d = int(data.status[mask].sum())
        s = mpmath.mpf(float(np.sum(h0[mask] * np.exp(xb[mask]))))
        events = mask & (data.status == 1)
        prefactor = float(np.sum(params.baseline.log_hazard(data.time[events])
                                 + xb[events]))
        integral = mpmath.quad(lambda u: u ** d * mpmath.exp(-u * s) * density(u),
                               [0, 1, mpmath.inf])
        total += prefactor + float(mpmath.log(integral))
    return total


@pytest.mark.parametrize("frailty_family", ["gamma", "inverse_gaussian"])
def test_marginal_loglik_matches_quadrature(frailty_family):
    rng = np.random.default_rng(42)
    for trial in range(25):
        data = random_dataset(rng, n_groups=int(rng.integers(1, 4)))
        params = random_params(rng, frailty=frailty_family,
                               baseline="weibull" if trial % 2 else "exponential")
        ours = marginal_loglik(data, params)
        ref = quadrature_loglik(data, params, frailty_family)
        assert ours == pytest.approx(ref, rel=1e-8), f"trial {trial}"


def test_loglik_single_unit_closed_form():
    # one unit, one event at t, exponential baseline, beta=0:
    # loglik = log(rate) - (1/theta + 1) log(1 + theta * rate * t)
    rate, theta, t = 0.3, 0.5, 4.0
    data = SurvivalDataset.from_arrays(time=[t], status=[1], covariates=[[0.0]], groups=[1])
    params = ModelParams(beta=np.zeros(1), baseline=ExponentialHazard(rate=rate),
                         frailty=GammaFrailty(theta=theta))
    expected = math.log(rate) - (1 / theta + 1) * math.log1p(theta * rate * t)
    assert marginal_loglik(data, params) == pytest.approx(expected, rel=1e-12)


def test_group_hazard_mass_matches_direct_sum(rng):
    data = random_dataset(rng, n_groups=3)
    params = random_params(rng)
    log_s, xb = group_hazard_mass(data, params)
    h0 = params.baseline.cumulative_hazard(data.time)
    direct = np.array([np.log(np.sum((h0 * np.exp(xb))[data.group_index == g]))
                       for g in range(data.n_groups)])
    np.testing.assert_allclose(log_s, direct, rtol=1e-12)
    np.testing.assert_allclose(xb, data.covariates @ params.beta, rtol=1e-15)


def test_loglik_finite_over_optimizer_box():
    data = tiny_dataset()
    corners = [(-60.0, -30.0, -30.0, -30.0), (60.0, 30.0, 30.0, 30.0),
               (60.0, -30.0, 30.0, -30.0), (-60.0, 30.0, -30.0, 30.0)]
    for b, lr, lx, lt in corners:
        from frailclust.hazards import WeibullHazard
        params = ModelParams(beta=np.array([b]),
                             baseline=WeibullHazard(rho=math.exp(lr), xi=math.exp(lx)),
                             frailty=GammaFrailty(theta=math.exp(lt)))
        assert math.isfinite(marginal_loglik(data, params))


# ===== risk scores =====


def test_risk_scores_decompose_into_predictor_plus_group_offset(rng):
    data = random_dataset(rng, n_groups=3)
    params = random_params(rng)
    scores = risk_scores(data, params)
    xb = data.covariates @ params.beta
    np.testing.assert_allclose(scores.eta, xb + scores.log_frailty[data.group_index],
                               rtol=1e-12)
    assert np.all(np.isfinite(scores.eta))
    # same group, same offset: eta gaps equal predictor gaps
    g0 = data.group_index == 0
    if g0.sum() >= 2:
        idx = np.flatnonzero(g0)[:2]
        assert scores.eta[idx[0]] - scores.eta[idx[1]] == pytest.approx(
            xb[idx[0]] - xb[idx[1]], abs=1e-12)


def test_risk_scores_match_manual_prediction():
    data = tiny_dataset()
    params = ModelParams(beta=np.array([0.4]), baseline=ExponentialHazard(rate=0.2),
                         frailty=GammaFrailty(theta=0.5))
    scores = risk_scores(data, params)
    xb = data.covariates @ params.beta
    h0 = params.baseline.cumulative_hazard(data.time)
    for g in range(data.n_groups):
        mask = data.group_index == g
        d = int(data.status[mask].sum())
        s = float(np.sum((h0 * np.exp(xb))[mask]))
        expected = math.log1p(0.5 * d) - math.log1p(0.5 * s)
        assert scores.log_frailty[g] == pytest.approx(expected, rel=1e-12)


# ===== distances and penalty =====


def test_distance_matrix_and_pairwise(rng):
    eta = rng.normal(size=6)
    scores = LinearRiskScores(eta=eta, log_frailty=np.zeros(2))
    d = distance_matrix(scores)
    assert d.shape == (6, 6)
    np.testing.assert_allclose(d, d.T, rtol=1e-15)
    assert np.all(np.diag(d) == 0)
    for i in range(6):
        for j in range(6):
            assert d[i, j] == pytest.approx((eta[i] - eta[j]) ** 2, rel=1e-12)
            assert pairwise_distance(scores, i, j) == pytest.approx(d[i, j], rel=1e-12)


def test_graph_penalty_matches_brute_force(rng):
    n = 12
    eta = rng.normal(size=n)
    dense = rng.uniform(size=(n, n))
    dense[rng.uniform(size=(n, n)) < 0.6] = 0.0
    np.fill_diagonal(dense, 0.0)
    s = scipy.sparse.csr_matrix(dense)
    brute = sum(dense[a, b] * (eta[a] - eta[b]) ** 2 for a in range(n) for b in range(n))
    assert graph_penalty(eta, s) == pytest.approx(brute, rel=1e-12)


def test_graph_penalty_uniform_matrix_identity(rng):
    # uniform off-diagonal weights 1/(n-1): penalty = (2n var_sum)/(n-1)
    n = 9
    eta = rng.normal(size=n)
    uniform = np.full((n, n), 1.0 / (n - 1))
    np.fill_diagonal(uniform, 0.0)
    s = scipy.sparse.csr_matrix(uniform)
    expected = (2 * n * np.sum((eta - eta.mean()) ** 2)) / (n - 1)
    assert graph_penalty(eta, s) == pytest.approx(expected, rel=1e-12)


# ===== assembled objective =====


def test_objective_parts_identity(rng):
    data = random_dataset(rng, n_groups=3)
    params = random_params(rng)
    n = data.n_units
    dense = rng.uniform(size=(n, n))
    np.fill_diagonal(dense, 0.0)
    s = scipy.sparse.csr_matrix(dense)
    gamma = 0.3
    obj, ll, pen = objective_parts(data, params, s, gamma)
    assert obj == pytest.approx(-ll + gamma * pen, rel=1e-12)
    assert pen >= 0
    assert ll == pytest.approx(marginal_loglik(data, params), rel=1e-12)
    scores = risk_scores(data, params)
    assert pen == pytest.approx(graph_penalty(scores.eta, s), rel=1e-12)


def test_objective_reduces_to_negative_loglik_without_penalty(rng):
    data = random_dataset(rng, n_groups=2)
    params = random_params(rng)
    assert penalized_objective(data, params, None, 0.7) == pytest.approx(
        -marginal_loglik(data, params), rel=1e-12)
    n = data.n_units
    s = scipy.sparse.csr_matrix(np.ones((n, n)) - np.eye(n))
    assert penalized_objective(data, params, s, 0.0) == pytest.approx(
        -marginal_loglik(data, params), rel=1e-12)


def test_penalty_offsets_track_trial_parameters(rng):
    # the penalty is a genuine function of theta: changing only theta moves it
    data = random_dataset(rng, n_groups=3, max_group_size=5)
    params = random_params(rng)
    n = data.n_units
    s = scipy.sparse.csr_matrix(np.ones((n, n)) - np.eye(n))
    _, _, pen1 = objective_parts(data, params, s, 1.0)
    bumped = ModelParams(beta=params.beta, baseline=params.baseline,
                         frailty=make_frailty("gamma", params.frailty.theta * 3.0))
    _, _, pen2 = objective_parts(data, bumped, s, 1.0)
    scores2 = risk_scores(data, bumped)
    assert pen2 == pytest.approx(graph_penalty(scores2.eta, s), rel=1e-12)
    assert pen1 != pytest.approx(pen2, rel=1e-6)
