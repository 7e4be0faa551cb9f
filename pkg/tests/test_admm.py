import numpy as np
import pytest

from hankel_admm.admm import AdmmConfig, AdmmState, admm_step, missing_weights, solve
from hankel_admm.hankel import (
    antidiagonal_counts,
    antidiagonal_sums,
    form_hankel,
    numerical_rank,
    rank_p_truncation,
)
from hankel_admm.nodes import extract_nodes
from hankel_admm.signal import (
    ExponentialModel,
    NoiseSpec,
    SampledSignal,
    SampleGrid,
    add_noise,
    nls_objective,
    solve_amplitudes,
    synthesize,
)

from conftest import random_complex


def random_signal(rng, order, n_half):
    nodes = rng.uniform(-0.05, 0.02, order) + 1j * np.sort(rng.uniform(-3, 3, order))
    model = ExponentialModel(nodes, random_complex(rng, order))
    return synthesize(model, SampleGrid(0.0, 1.0, n_half))


def unweighted_step(state, f, rho, rank):
    """The complete-data update with denominator 1 + rho*Q."""
    q = antidiagonal_counts(f.grid.n_half)
    b = form_hankel(f.samples - state.r) - state.Lambda / rho
    a, _ = rank_p_truncation(b, rank)
    r = (rho * q * f.samples - antidiagonal_sums(state.Lambda + rho * a)) / (1 + rho * q)
    lam = state.Lambda + rho * (a - form_hankel(f.samples - r))
    return a, r, lam


def test_one_step_fixed_point_exact_data(rng):
    for _ in range(20):
        order = int(rng.integers(1, 6))
        f = random_signal(rng, order, int(rng.integers(order + 1, 30)))
        rho = float(rng.uniform(0.1, 10))
        s1 = admm_step(AdmmState.zeros(f.grid.n_half), f, AdmmConfig(rank=order, rho=rho))
        assert np.linalg.norm(s1.r) < 1e-10 * np.linalg.norm(f.samples)
        hf = np.linalg.norm(form_hankel(f.samples))
        assert np.linalg.norm(s1.Lambda) < 1e-10 * rho * hf
        assert np.linalg.norm(s1.A - form_hankel(f.samples)) < 1e-10 * hf


def test_zero_signal_stays_zero():
    f = SampledSignal.from_samples(np.zeros(11))
    state = AdmmState.zeros(5)
    cfg = AdmmConfig(rank=2)
    for _ in range(5):
        state = admm_step(state, f, cfg)
        assert not state.A.any() and not state.r.any() and not state.Lambda.any()


def test_two_by_two_hand_example():
    f = SampledSignal.from_samples([1, 0, 0])
    s1 = admm_step(AdmmState.zeros(1), f, AdmmConfig(rank=1, rho=1.0))
    np.testing.assert_allclose(s1.A, [[1, 0], [0, 0]], atol=1e-15)
    np.testing.assert_allclose(s1.r, [0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(s1.Lambda, 0, atol=1e-15)


def test_step_rejects_mismatched_state():
    f = SampledSignal.from_samples(np.ones(7))
    with pytest.raises(ValueError):
        admm_step(AdmmState.zeros(2), f, AdmmConfig(rank=1))


def test_unit_weights_match_unweighted_update(rng):
    f = SampledSignal.from_samples(random_complex(rng, 41))
    cfg = AdmmConfig(rank=3, rho=0.7)
    state = AdmmState.zeros(20)
    for _ in range(10):
        a, r, lam = unweighted_step(state, f, cfg.rho, cfg.rank)
        state = admm_step(state, f, cfg)
        assert np.linalg.norm(state.r - r) <= 1e-14 * np.linalg.norm(r)
        assert np.linalg.norm(state.A - a) <= 1e-14 * np.linalg.norm(a)
        assert np.linalg.norm(state.Lambda - lam) <= 1e-14 * np.linalg.norm(lam)


def test_iterates_have_rank_at_most_p(rng):
    f = SampledSignal.from_samples(random_complex(rng, 31))
    cfg = AdmmConfig(rank=2)
    state = AdmmState.zeros(15)
    for _ in range(30):
        state = admm_step(state, f, cfg)
        assert numerical_rank(np.linalg.svd(state.A, compute_uv=False)) <= 2


def test_solve_noise_free_table1(four_tone):
    _, _, f = four_tone
    res = solve(f, AdmmConfig(rank=4, rho=1.0, max_iters=50))
    err = np.linalg.norm(res.approximation - f.samples) / np.linalg.norm(f.samples)
    assert err < 1e-8
    assert res.iterations_run == 50
    assert res.residual_history.shape == (50, 2)
    np.testing.assert_allclose(
        res.approximation, antidiagonal_sums(res.hankel) / antidiagonal_counts(160)
    )


def test_solve_beats_one_shot_truncation(four_tone):
    # baseline: nodes of the single truncated SVD of H f, amplitudes refitted,
    # so that both approximations are sums of four exponentials
    _, _, clean = four_tone
    for seed in range(3):
        f = add_noise(clean, NoiseSpec(10.0, seed))
        res = solve(f, AdmmConfig(rank=4, max_iters=150))
        a, _ = rank_p_truncation(form_hankel(f.samples), 4)
        nodes = extract_nodes(a, 4).nodes
        baseline = ExponentialModel(nodes, solve_amplitudes(nodes, f))
        admm_err = np.sum(np.abs(f.samples - res.approximation) ** 2)
        assert admm_err < nls_objective(f, baseline)


def test_solve_rank_zero(rng):
    f = SampledSignal.from_samples(random_complex(rng, 9))
    res = solve(f, AdmmConfig(rank=0, max_iters=3))
    np.testing.assert_array_equal(res.approximation, 0)
    np.testing.assert_array_equal(res.hankel, 0)


def test_solve_rejects_rank_above_size():
    f = SampledSignal.from_samples(np.ones(5))
    with pytest.raises(ValueError):
        solve(f, AdmmConfig(rank=4))


def test_config_validation():
    with pytest.raises(ValueError):
        AdmmConfig(rank=1, rho=0)
    with pytest.raises(ValueError):
        AdmmConfig(rank=1, max_iters=0)
    with pytest.raises(ValueError):
        AdmmConfig(rank=1, stop_mode="sometimes")


def test_residual_stopping_and_feasibility(rng):
    clean = random_signal(rng, 3, 30)
    f = add_noise(clean, NoiseSpec(25.0, 1))
    f = SampledSignal(f.samples / np.abs(f.samples).max(), f.weights, f.grid)
    cfg = AdmmConfig(rank=3, max_iters=5000, stop_mode="residual", eps_abs=1e-7, eps_rel=1e-5)
    res = solve(f, cfg)
    assert res.converged
    assert res.iterations_run < cfg.max_iters
    gap = np.linalg.norm(res.hankel - form_hankel(f.samples - res.residual))
    assert gap <= cfg.eps_abs * 31 + cfg.eps_rel * np.linalg.norm(form_hankel(f.samples))


def test_normalization_is_scale_equivariant(rng):
    f = add_noise(random_signal(rng, 2, 20), NoiseSpec(15.0, 4))
    res = solve(f, AdmmConfig(rank=2, max_iters=40))
    scaled = SampledSignal(f.samples * (3 - 4j), f.weights, f.grid)
    res2 = solve(scaled, AdmmConfig(rank=2, max_iters=40))
    np.testing.assert_allclose(res2.approximation, res.approximation * (3 - 4j), rtol=1e-9, atol=1e-9)


def test_missing_weights():
    np.testing.assert_array_equal(missing_weights([], 5), np.ones(5))
    np.testing.assert_array_equal(missing_weights(range(5), 5), np.zeros(5))
    np.testing.assert_array_equal(missing_weights({2, 3}, 5), [1, 1, 0, 0, 1])
    with pytest.raises(ValueError):
        missing_weights([5], 5)
    with pytest.raises(ValueError):
        missing_weights([-1], 5)


def test_missing_values_never_leak(rng):
    f = add_noise(random_signal(rng, 3, 25), NoiseSpec(20.0, 2))
    w = missing_weights([0, 7, 8, 9, 30, 50], f.grid.length)
    a = SampledSignal(f.samples, w, f.grid)
    junk = np.where(w == 0, 1e3 * random_complex(rng, f.grid.length), f.samples)
    b = SampledSignal(junk, w, f.grid)
    cfg = AdmmConfig(rank=3, max_iters=30)
    ra, rb = solve(a, cfg), solve(b, cfg)
    np.testing.assert_array_equal(ra.hankel, rb.hankel)
    np.testing.assert_array_equal(ra.residual, rb.residual)


def test_missing_data_denominator():
    # at a missing index with no multiplier the residual closes the gap exactly
    f = SampledSignal(np.array([1.0, 0, 1.0, 1.0, 1.0]), [1, 0, 1, 1, 1], SampleGrid(0, 1, 2))
    s1 = admm_step(AdmmState.zeros(2), f, AdmmConfig(rank=1, rho=2.0))
    q = antidiagonal_counts(2)
    sums = antidiagonal_sums(s1.A)
    assert s1.r[1] == pytest.approx(f.samples[1] - sums[1] / q[1])
