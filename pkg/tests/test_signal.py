import math

import numpy as np
import pytest

from hankel_admm.errors import IllConditionedError
from hankel_admm.hankel import form_hankel, numerical_rank
from hankel_admm.signal import (
    FOUR_TONE,
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


def random_model(rng, order, spread=0.2):
    imag = np.sort(rng.uniform(-np.pi, np.pi, order))
    nodes = rng.uniform(-spread, spread / 4, order) + 1j * imag
    return ExponentialModel(nodes, random_complex(rng, order))


def test_synthesize_constant():
    grid = SampleGrid(0.0, 1.0, 1)
    sig = synthesize(ExponentialModel([0], [1]), grid)
    np.testing.assert_allclose(sig.samples, [1, 1, 1])
    np.testing.assert_array_equal(sig.weights, 1)


def test_synthesize_alternating():
    grid = SampleGrid(0.0, 1.0, 1)
    sig = synthesize(ExponentialModel([1j * np.pi], [2]), grid)
    np.testing.assert_allclose(sig.samples, [2, -2, 2], atol=1e-14)


def test_four_tone_first_sample_by_direct_summation(four_tone):
    model, grid, sig = four_tone
    assert grid.length == 321
    assert sig.samples[0] == pytest.approx(model.amplitudes.sum(), rel=1e-14)
    # amplitudes are given at t = 0, so the first sample (t = -1/2) is
    expected = sum(
        c * np.exp(2 * np.pi * (g + 1j * nu) * -0.5)
        for nu, g, c in zip(FOUR_TONE.freqs, FOUR_TONE.dampings, FOUR_TONE.amplitudes)
    )
    assert sig.samples[0] == pytest.approx(expected, rel=1e-12)
    # and the sample at t = 0 is the plain amplitude sum
    assert sig.samples[160] == pytest.approx(FOUR_TONE.amplitudes.sum(), rel=1e-12)


def test_physical_amplitudes_round_trip(four_tone):
    model, grid, _ = four_tone
    np.testing.assert_allclose(model.physical_amplitudes(grid), FOUR_TONE.amplitudes, rtol=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_hankel_rank_equals_model_order(rng, order):
    grid = SampleGrid(0.0, 1.0, 8)
    sig = synthesize(random_model(rng, order), grid)
    s = np.linalg.svd(form_hankel(sig.samples), compute_uv=False)
    assert numerical_rank(s) == order


def test_kronecker_rank_over_random_models(rng):
    for _ in range(50):
        order = int(rng.integers(1, 6))
        n_half = int(rng.integers(order, 20))
        sig = synthesize(random_model(rng, order), SampleGrid(0.0, 1.0, n_half))
        s = np.linalg.svd(form_hankel(sig.samples), compute_uv=False)
        assert numerical_rank(s) == order


def test_synthesize_linear_in_amplitudes(rng):
    grid = SampleGrid(0.0, 1.0, 20)
    m = random_model(rng, 4)
    c1, c2 = random_complex(rng, 4), random_complex(rng, 4)
    s1 = synthesize(ExponentialModel(m.nodes, c1), grid).samples
    s2 = synthesize(ExponentialModel(m.nodes, c2), grid).samples
    s12 = synthesize(ExponentialModel(m.nodes, c1 + c2), grid).samples
    np.testing.assert_allclose(s12, s1 + s2, rtol=1e-13, atol=1e-13)


def test_model_validation():
    with pytest.raises(ValueError, match="differ in length"):
        ExponentialModel([0, 1j], [1])
    with pytest.raises(ValueError, match="distinct"):
        ExponentialModel([0.5j, 0.5j], [1, 1])
    with pytest.raises(ValueError):
        ExponentialModel([], [])
    with pytest.raises(ValueError):
        SampleGrid(0.0, 0.0, 3)
    with pytest.raises(ValueError):
        SampledSignal(np.ones(4), np.ones(4), SampleGrid(0.0, 1.0, 1))
    with pytest.raises(ValueError):
        SampledSignal(np.ones(3), [1, -1, 1], SampleGrid(0.0, 1.0, 1))


def test_add_noise_infinite_snr_is_identity(four_tone):
    _, _, sig = four_tone
    assert add_noise(sig, NoiseSpec(math.inf, 3)) is sig


def test_add_noise_deterministic(four_tone):
    _, _, sig = four_tone
    a = add_noise(sig, NoiseSpec(10.0, 7))
    b = add_noise(sig, NoiseSpec(10.0, 7))
    c = add_noise(sig, NoiseSpec(10.0, 8))
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_add_noise_variance_law_of_large_numbers():
    n_half = 6000
    sig = SampledSignal.from_samples(np.exp(1j * np.arange(2 * n_half + 1) * 0.3))
    noisy = add_noise(sig, NoiseSpec(0.0, 11))
    var = np.mean(np.abs(noisy.samples - sig.samples) ** 2)
    assert abs(var - 1.0) < 0.05


def test_add_noise_leaves_missing_samples(rng):
    w = np.ones(41)
    w[[3, 10, 11, 30]] = 0
    sig = SampledSignal.from_samples(random_complex(rng, 41)).with_missing(w)
    noisy = add_noise(sig, NoiseSpec(-5.0, 1))
    np.testing.assert_array_equal(noisy.samples[w == 0], 0)
    assert np.all(noisy.samples[w > 0] != sig.samples[w > 0])


def test_add_noise_snr_uses_observed_power():
    # unobserved samples carry no power, so halving the observed set must not change sigma
    sig = SampledSignal.from_samples(np.full(20001, 2.0 + 0j))
    w = np.ones(20001)
    w[::2] = 0
    noisy = add_noise(sig.with_missing(w), NoiseSpec(0.0, 2))
    var = np.mean(np.abs(noisy.samples[w > 0] - 2.0) ** 2)
    assert abs(var - 4.0) / 4.0 < 0.05


def test_solve_amplitudes_exact(rng):
    grid = SampleGrid(0.0, 1.0, 15)
    m = random_model(rng, 4)
    sig = synthesize(m, grid)
    c = solve_amplitudes(m.nodes, sig)
    assert np.linalg.norm(c - m.amplitudes) / np.linalg.norm(m.amplitudes) < 1e-10


def test_solve_amplitudes_constant():
    sig = SampledSignal.from_samples(np.ones(7))
    np.testing.assert_allclose(solve_amplitudes([0], sig), [1.0])


def test_solve_amplitudes_windowed(rng):
    grid = SampleGrid(0.0, 1.0, 20)
    m = random_model(rng, 3)
    sig = synthesize(m, grid)
    w = np.zeros(grid.length)
    w[10:18] = 1
    full = solve_amplitudes(m.nodes, sig)
    windowed = solve_amplitudes(m.nodes, sig.with_missing(w))
    np.testing.assert_allclose(windowed, full, rtol=1e-8, atol=1e-8)


def test_solve_amplitudes_rejects_duplicates():
    sig = SampledSignal.from_samples(np.ones(9))
    with pytest.raises(IllConditionedError):
        solve_amplitudes([0.1j, 0.1j], sig)
    w = np.zeros(9)
    w[0] = 1
    with pytest.raises(IllConditionedError):
        solve_amplitudes([0.1j, 0.2j], sig.with_missing(w))


def test_nls_objective_trivial(rng):
    grid = SampleGrid(0.0, 1.0, 10)
    m = random_model(rng, 2)
    sig = synthesize(m, grid)
    assert nls_objective(sig, m) == pytest.approx(0.0, abs=1e-20)
    zero = SampledSignal(np.zeros(grid.length), np.ones(grid.length), grid)
    assert nls_objective(zero, m) == pytest.approx(np.sum(np.abs(sig.samples) ** 2), rel=1e-12)
    f = SampledSignal(random_complex(rng, grid.length), rng.uniform(0, 2, grid.length), grid)
    zero_model = ExponentialModel(m.nodes, np.zeros(2))
    assert nls_objective(f, zero_model) == pytest.approx(np.sum(f.weights * np.abs(f.samples) ** 2))


def test_solve_amplitudes_minimizes_objective(rng):
    grid = SampleGrid(0.0, 1.0, 12)
    m = random_model(rng, 3)
    f = SampledSignal(random_complex(rng, grid.length), rng.uniform(0, 1, grid.length), grid)
    best = nls_objective(f, ExponentialModel(m.nodes, solve_amplitudes(m.nodes, f)))
    c = solve_amplitudes(m.nodes, f)
    for _ in range(100):
        other = c + 0.1 * random_complex(rng, 3)
        assert nls_objective(f, ExponentialModel(m.nodes, other)) >= best
