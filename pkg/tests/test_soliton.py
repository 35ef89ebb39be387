# tests/test_soliton.py
from concurrent.futures import ThreadPoolExecutor

import mpmath
import numpy as np
import pytest

from app.core.errors import InvalidDataError, PrecisionExhaustedError, ShapeError
from app.core.model_problems import rescaled_field, scaling_map
from app.core.soliton import (
    _darboux_mp,
    check_extremality,
    darboux_evaluate,
    darboux_point,
    dress_vector,
    evaluate_field,
    extremal_peak,
    max_deviation,
    mp_context,
    one_soliton,
    oracle_evaluate,
    oracle_field,
)
from app.core.spectral import build_spectral_data, evolve_spectral_data, sample_ensemble
from app.models.field import PrecisionPolicy
from app.models.spectral import Distribution, RandomEnsembleConfig, SpectralData


def _ensemble(n: int, realizations: int = 1, seed: int = 0) -> RandomEnsembleConfig:
    return RandomEnsembleConfig(
        case="PIII", n=n, amplitude_dist=Distribution.parse("chi2:4"),
        velocity_dist=Distribution.parse("gauss:0:15"), realizations=realizations, seed=seed,
    )


def test_unit_soliton_at_origin():
    data = build_spectral_data([1j])
    assert darboux_evaluate(data, 0.0, 0.0) == pytest.approx(-2.0)


def test_one_soliton_closed_form():
    data = build_spectral_data([0.5 + 1j], [np.exp(0.3j)])
    x = np.linspace(-3.0, 3.0, 31)
    t = np.array([0.0, 0.2, 0.5])
    field = evaluate_field(data, x, t)
    T, X = np.meshgrid(t, x, indexing="ij")
    expected = one_soliton(X, T, eta=1.0, xi=0.5, phase=0.3)
    np.testing.assert_allclose(field.values, expected, atol=1e-12)


@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
def test_one_soliton_modulus(eta):
    x = np.linspace(-3.0, 3.0, 101)
    field = evaluate_field(build_spectral_data([1j * eta]), x, [0.0])
    np.testing.assert_allclose(field.abs[0], 2.0 * eta / np.cosh(2.0 * eta * x), atol=1e-12)


def test_one_soliton_mass():
    data = build_spectral_data([1j])
    x = np.linspace(-2.0, 2.0, 21)
    field = evaluate_field(data, x, [0.0], with_mass=True)
    np.testing.assert_allclose(field.mass[0], 4.0 / (1.0 + np.exp(4.0 * x)), atol=1e-12)


def test_extremal_peak(three_solitons):
    assert extremal_peak(three_solitons) == pytest.approx(6.4)
    assert abs(darboux_evaluate(three_solitons, 0.0, 0.0)) == pytest.approx(6.4, rel=1e-12)


def test_oracle_agrees_with_dressing(three_solitons, x_grid):
    t = [0.0, 0.2]
    dressing = evaluate_field(three_solitons, x_grid, t)
    oracle = oracle_field(three_solitons, x_grid, t, PrecisionPolicy.auto())
    tol = 1e-10 * max(1.0, extremal_peak(three_solitons))
    assert max_deviation(dressing, oracle) <= tol


def test_oracle_tracks_time_evolution(three_solitons):
    evolved = evolve_spectral_data(three_solitons, 0.3)
    value = oracle_evaluate(evolved, 0.4, 0.0, PrecisionPolicy.auto())
    assert value == pytest.approx(darboux_evaluate(three_solitons, 0.4, 0.3), abs=1e-10)


def test_oracle_needs_norming_constants():
    with pytest.raises(InvalidDataError):
        oracle_evaluate(SpectralData(eigenvalues=[1j]), 0.0, 0.0)


def test_multiprecision_matches_binary64(three_solitons):
    wide, wide_mass = darboux_point(three_solitons, 0.7, 0.1, PrecisionPolicy.fixed(128), with_mass=True)
    narrow, narrow_mass = darboux_point(three_solitons, 0.7, 0.1, with_mass=True)
    assert wide == pytest.approx(narrow, abs=1e-12)
    assert wide_mass == pytest.approx(narrow_mass, abs=1e-12)


def test_extremality_of_sampled_data():
    rng = np.random.default_rng(11)
    lam = rng.normal(0.0, 2.0, 20) + 1j * rng.chisquare(4, 20)
    data = build_spectral_data(lam)
    value, peak, bits = check_extremality(data)
    assert value == pytest.approx(peak, rel=1e-8)
    assert bits in (53, 128, 256, 512)


def test_empty_data_is_zero_field():
    data = SpectralData(eigenvalues=[])
    field = evaluate_field(data, [0.0, 1.0], [0.0])
    np.testing.assert_array_equal(field.values, 0)


def test_grid_must_increase():
    with pytest.raises(ShapeError):
        evaluate_field(build_spectral_data([1j]), [1.0, 0.0], [0.0])


def test_precision_policy_parsing():
    assert PrecisionPolicy.parse("256").ladder([53, 128, 256, 512]) == (256,)
    assert PrecisionPolicy.parse("auto:128").ladder([53, 128, 256, 512]) == (53, 128)


def test_oracle_for_unit_norming_constant():
    data = build_spectral_data([1j])
    assert data.norming_constants[0] == pytest.approx(2j)
    assert oracle_evaluate(data, 0.3, 0.1, PrecisionPolicy.auto()) == pytest.approx(darboux_evaluate(data, 0.3, 0.1), abs=1e-12)


def test_oracle_on_random_data():
    rng = np.random.default_rng(2)
    lam = rng.normal(0.0, 1.0, 8) + 1j * rng.chisquare(4, 8)
    data = build_spectral_data(lam)
    x = np.linspace(-2.0, 2.0, 21)
    deviation = max_deviation(evaluate_field(data, x, [0.0]), oracle_field(data, x, [0.0], PrecisionPolicy.auto()))
    assert deviation < 1e-10 * max(1.0, extremal_peak(data))


def test_global_bound_on_grid(three_solitons):
    x = np.linspace(-3.0, 3.0, 61)
    field = evaluate_field(three_solitons, x, [-0.2, 0.0, 0.2])
    assert np.max(field.abs) <= extremal_peak(three_solitons) * (1 + 1e-8)


class TestPrecisionLadder:
    def test_auto_field_matches_wide_arithmetic_at_large_n(self):
        # a N = 100 el valor binary64 es finito pero sin cifras correctas
        data = sample_ensemble(_ensemble(100), 0)
        scaling = scaling_map("PIII", 100, 4.0)
        X = [0.5, 1.0]
        auto = rescaled_field(data, scaling, X, [0.0], PrecisionPolicy.auto())
        wide = rescaled_field(data, scaling, X, [0.0], PrecisionPolicy.fixed(512))
        tol = 1e-8 * scaling.amplitude * extremal_peak(data)
        np.testing.assert_allclose(auto.values, wide.values, rtol=0, atol=tol)

    def test_first_rung_is_reused(self, three_solitons):
        first = darboux_point(three_solitons, 0.4, 0.0, PrecisionPolicy.fixed(53))
        value, _ = darboux_point(three_solitons, 0.4, 0.0, PrecisionPolicy.auto(128), first=first)
        assert value == pytest.approx(first[0], abs=1e-12)

    def test_disagreeing_first_rung_escalates(self, three_solitons):
        bogus = (100.0 + 0j, None)
        value, _ = darboux_point(three_solitons, 0.4, 0.0, PrecisionPolicy.auto(256), first=bogus)
        assert value != bogus[0]
        assert value == pytest.approx(darboux_evaluate(three_solitons, 0.4, 0.0), abs=1e-12)

    def test_ladder_without_agreement_is_exhausted(self, three_solitons):
        with pytest.raises(PrecisionExhaustedError):
            darboux_point(three_solitons, 0.4, 0.0, PrecisionPolicy.auto(128), first=(100.0 + 0j, None))

    def test_single_rung_auto_accepts_binary64(self, three_solitons):
        value, _ = darboux_point(three_solitons, 0.4, 0.0, PrecisionPolicy.auto(53))
        assert value == pytest.approx(darboux_evaluate(three_solitons, 0.4, 0.0))


class TestThreadedPrecision:
    def test_contexts_are_per_thread_and_leave_global_untouched(self):
        before = mpmath.mp.prec

        def bits_seen(bits):
            return mp_context(bits).prec

        with ThreadPoolExecutor(max_workers=4) as pool:
            seen = list(pool.map(bits_seen, [512, 53, 256, 128] * 4))
        assert seen == [512, 53, 256, 128] * 4
        assert mpmath.mp.prec == before

    def test_mixed_precision_threads_match_serial(self):
        data = sample_ensemble(_ensemble(60), 0)
        xs = np.linspace(0.02, 0.16, 8)
        serial = [_darboux_mp(data.eigenvalues, data.darboux_params, x, 0.0, 512) for x in xs]

        def task(item):
            i, x = item
            bits = 512 if i % 2 == 0 else 53
            return _darboux_mp(data.eigenvalues, data.darboux_params, x, 0.0, bits)

        with ThreadPoolExecutor(max_workers=8) as pool:
            threaded = list(pool.map(task, enumerate(xs)))
        for i in range(0, len(xs), 2):
            assert threaded[i] == serial[i]


class TestDressingInvariants:
    def test_permutation_invariance(self):
        data = sample_ensemble(_ensemble(20, seed=3), 0)
        order = np.random.default_rng(5).permutation(data.n)
        shuffled = build_spectral_data(data.eigenvalues[order], data.darboux_params[order])
        x = np.linspace(-0.3, 0.3, 7)
        a = evaluate_field(data, x, [0.0, 0.05], PrecisionPolicy.auto())
        b = evaluate_field(shuffled, x, [0.0, 0.05], PrecisionPolicy.auto())
        assert max_deviation(a, b) < 1e-9 * extremal_peak(data)

    def test_kernel_projector_ignores_seed_scaling(self, three_solitons):
        lam = three_solitons.eigenvalues
        kernels = [dress_vector(lam, [], np.conj(lam[0]), 1.0 + 0j, 0.5 - 0.2j)]
        kernels.append(dress_vector(lam, kernels, np.conj(lam[1]), 0.3 + 0j, 1.0 + 0j))
        seed = (0.7 - 0.1j, -0.4 + 0.9j)
        scale = 3.7e5 * np.exp(0.4j)
        w = np.array(dress_vector(lam, kernels, np.conj(lam[2]), *seed))
        v = np.array(dress_vector(lam, kernels, np.conj(lam[2]), scale * seed[0], scale * seed[1]))
        np.testing.assert_allclose(np.outer(w, np.conj(w)), np.outer(v, np.conj(v)), atol=1e-14)

    @pytest.mark.parametrize("n", [10, 50])
    def test_extremality_over_realizations(self, n):
        config = _ensemble(n, realizations=10, seed=17)
        for r in range(10):
            value, peak, _ = check_extremality(sample_ensemble(config, r), PrecisionPolicy.auto())
            assert abs(value - peak) <= 1e-8 * peak


def test_oracle_matches_dressing_on_random_datasets():
    x = np.linspace(-2.0, 2.0, 21)
    t = [0.0, 0.1]
    for k in range(20):
        data = sample_ensemble(_ensemble(1 + k % 8, seed=100 + k), 0)
        dressing = evaluate_field(data, x, t, PrecisionPolicy.auto())
        oracle = oracle_field(data, x, t, PrecisionPolicy.auto())
        assert max_deviation(dressing, oracle) <= 1e-10 * max(1.0, extremal_peak(data)), f"dataset {k}"


def test_oracle_recomputes_norming_constants_in_wide_arithmetic():
    rng = np.random.default_rng(2)
    lam = rng.normal(0.0, 1.0, 8) + 1j * rng.chisquare(4, 8)
    data = build_spectral_data(lam)
    reference = darboux_evaluate(data, -1.6, 0.0, PrecisionPolicy.fixed(256))
    value = oracle_evaluate(data, -1.6, 0.0, PrecisionPolicy.fixed(256))
    assert value == pytest.approx(reference, abs=1e-10 * max(1.0, extremal_peak(data)))
