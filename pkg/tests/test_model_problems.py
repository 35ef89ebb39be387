# tests/test_model_problems.py
import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import ConfigError, GeometryError, InvalidDataError, PoleError, ResolutionError
from app.core.experiments import run_jump_convergence
from app.core.model_problems import (
    blaschke,
    common_phase,
    in_omega,
    in_partial_sum,
    in_uniform,
    jump_discrepancy,
    model_phase,
    model_profile,
    model_solution,
    nsoliton_jump,
    piii_jump,
    pv_jump,
    rescaled_field,
    scaling_map,
    uniform_deviation,
)
from app.core.rhp import det_defect, extract_potential, schwartz_defect, solve_collocation
from app.core.soliton import darboux_evaluate
from app.core.spectral import build_spectral_data
from app.models.problems import ModelParams
from app.models.spectral import Distribution, RandomEnsembleConfig


class TestBlaschke:
    def test_values(self):
        assert blaschke([1j], 0.0) == pytest.approx(-1.0)
        assert blaschke([], 3.0) == pytest.approx(1.0)

    def test_unimodular_on_real_axis(self):
        lam = [0.3 + 1j, -2 + 0.5j, 4j]
        x = np.linspace(-10, 10, 101)
        np.testing.assert_allclose(np.abs(blaschke(lam, x)), 1.0, atol=1e-13)

    def test_pole(self):
        with pytest.raises(PoleError):
            blaschke([1j], -1j)

    def test_log_space_matches_direct_product(self):
        rng = np.random.default_rng(8)
        lam = rng.normal(0.0, 2.0, 30) + 1j * rng.chisquare(4, 30)
        z = np.concatenate([np.linspace(-5.0, 5.0, 11), 40.0 * np.exp(1j * np.linspace(0.1, 6.0, 9))])
        direct = np.prod((z[:, None] - lam[None, :]) / (z[:, None] - np.conj(lam)[None, :]), axis=1)
        np.testing.assert_allclose(blaschke(lam, z), direct, rtol=1e-12)

    def test_large_argument_limit(self):
        assert blaschke([0.3 + 1j, 2j], 1e8) == pytest.approx(1.0, abs=1e-7)


class TestModelJumps:
    def test_piii_jump_structure(self):
        jump = piii_jump(ModelParams(case="PIII", X=0.3, T=-0.2))
        assert det_defect(jump) < 1e-12
        assert schwartz_defect(jump) < 1e-9
        assert jump.analyticity_margin == (7 / 8, 9 / 8)

    def test_pv_jump_structure(self):
        jump = pv_jump(ModelParams(case="PV", X=0.2, zeta=0.3, mu_mean=2.0))
        assert det_defect(jump) < 1e-12
        assert schwartz_defect(jump) < 1e-9
        assert jump.analyticity_margin == pytest.approx((0.65, 1.35))

    def test_pv_needs_zeta(self):
        with pytest.raises(ValidationError):
            ModelParams(case="PV")
        with pytest.raises(ConfigError):
            pv_jump(ModelParams(case="PIII"))

    def test_pv_phase_at_unit_argument(self):
        params = ModelParams(case="PV", X=0.0, T=0.0, zeta=0.5, mu_mean=1.0)
        assert model_phase(params, 1.0) == pytest.approx(2.0 * np.log(1.5))

    def test_pv_phase_is_close_to_piii_for_small_zeta(self):
        Z = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False))
        piii = model_phase(ModelParams(case="PIII", X=0.4, T=-0.3), Z)
        gaps = []
        for zeta in (2e-3, 1e-3):
            pv = model_phase(ModelParams(case="PV", X=0.4, T=-0.3, zeta=zeta, mu_mean=2.0), Z)
            gaps.append(float(np.max(np.abs(pv - piii))))
            assert 0.5 * zeta <= gaps[-1] <= 2.0 * zeta
        assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=1e-2)

    def test_case_is_normalised(self):
        assert ModelParams(case="piii").case == "PIII"


class TestScaling:
    def test_piii(self):
        scaling = scaling_map("PIII", 10, 4.0)
        assert scaling.amplitude == pytest.approx(0.05)
        assert scaling.radius == pytest.approx(20.0)
        x, t = scaling.forward(1.0, 1.0)
        assert (float(x), float(t)) == pytest.approx((0.05, 0.0025))

    def test_pv(self):
        scaling = scaling_map("pv", 10, 4.0)
        assert scaling.amplitude == pytest.approx(0.1)
        assert scaling.radius == pytest.approx(10.0)
        x, t = scaling.forward(1.0, 1.0)
        assert (float(x), float(t)) == pytest.approx((0.1, 0.01))

    def test_rescaled_field_applies_amplitude(self):
        data = build_spectral_data([1j, 0.5 + 2j])
        scaling = scaling_map("PIII", 2, 1.5)
        field = rescaled_field(data, scaling, [0.0, 0.5], [0.0], with_mass=True)
        x, _ = scaling.forward(0.5, 0.0)
        assert field.values[0, 1] == pytest.approx(scaling.amplitude * darboux_evaluate(data, float(x), 0.0))
        assert field.frame == "PIII"
        assert field.mass is not None


class TestModelSolutions:
    def test_piii_peak(self, cache):
        point = model_solution(ModelParams(case="PIII"), cache=cache)
        assert abs(point.value) == pytest.approx(4.0, abs=1e-4)
        assert point.mass == pytest.approx(4.0, abs=1e-4)
        assert point.diagnostics.residual < 1e-8

    def test_pv_peak(self, cache):
        point = model_solution(ModelParams(case="PV", zeta=0.3, mu_mean=4.0), cache=cache)
        assert abs(point.value) == pytest.approx(8.0, abs=1e-4)

    def test_solution_is_cached(self, cache):
        params = ModelParams(case="PIII", X=0.25)
        first = model_solution(params, 128, cache)
        assert cache.get(params.cache_key(128)) is not None
        second = model_solution(params, 128, cache)
        assert second.psi == first.psi
        assert second.diagnostics == first.diagnostics

    def test_explicit_modes_are_strict(self, cache):
        with pytest.raises(ResolutionError):
            model_solution(ModelParams(case="PIII"), 16, cache)

    @pytest.mark.parametrize("params", [
        ModelParams(case="PIII"),
        ModelParams(case="PV", zeta=0.3, mu_mean=4.0),
    ])
    def test_profile_on_the_experiment_window(self, params, cache):
        profile = model_profile(params, np.linspace(-3.0, 3.0, 7), cache=cache)
        assert np.all(np.isfinite(profile.values))
        assert np.isfinite(profile.frame_params["max_residual"])

    def test_profile(self, cache):
        X = np.linspace(-0.5, 0.5, 5)
        profile = model_profile(ModelParams(case="PIII"), X, cache=cache)
        assert profile.values.shape == (1, 5)
        assert profile.frame == "PIII"
        assert profile.frame_params["max_residual"] < 1e-8
        assert abs(profile.values[0, 2]) == pytest.approx(4.0, abs=1e-4)


class TestFiniteJump:
    def test_single_soliton_matches_dressing(self):
        lam = 0.2 + 0.5j
        data = build_spectral_data([lam])
        radius, x, t = 2.0, 0.3, 0.1
        sol = solve_collocation(nsoliton_jump(data, x, t, radius), 128)
        psi, _ = extract_potential(sol)
        assert radius * psi == pytest.approx(darboux_evaluate(data, x, t), abs=1e-8)

    def test_eigenvalues_must_fit_inside_the_circle(self):
        with pytest.raises(GeometryError):
            nsoliton_jump(build_spectral_data([3j]), 0.0, 0.0, 2.0)

    def test_common_phase(self):
        data = build_spectral_data([1j, 2j], [np.exp(0.5j)] * 2)
        assert common_phase(data) == pytest.approx(np.exp(0.5j))
        with pytest.raises(InvalidDataError):
            common_phase(build_spectral_data([1j, 2j], [1.0, 1j]))

    def test_discrepancy_shrinks_with_n(self):
        config = RandomEnsembleConfig(
            case="PIII", n=20, amplitude_dist=Distribution.parse("chi2:4"),
            velocity_dist=Distribution.parse("gauss:0:1"), realizations=3, seed=5,
        )
        rows = run_jump_convergence(config, [20, 400])
        assert [r["count"] for r in rows] == [3, 3]
        assert rows[1]["mean_discrepancy"] < rows[0]["mean_discrepancy"]

    def test_discrepancy_of_single_soliton_is_finite(self):
        # N = 1, μ̄ = 2: el círculo tiene radio Nμ̄/2 = 1
        value = jump_discrepancy(build_spectral_data([0.5j]), "PIII", 0.0, 0.0, 2.0)
        assert np.isfinite(value)
        with pytest.raises(GeometryError):
            jump_discrepancy(build_spectral_data([2j]), "PIII", 0.0, 0.0, 2.0)


class TestGoodSets:
    def test_omega(self):
        # N = 2, δ = 0.5: cota √2
        assert in_omega([1.0, 1.2], [0.0, -1.0], 0.5)
        assert not in_omega([1.0, 1.2], [0.0, -1.5], 0.5)
        assert not in_omega([1.0, 2.0], [0.0, -1.0], 0.5)

    def test_partial_sum(self):
        mu = np.full(100, 4.0)
        assert in_partial_sum(mu, 4.0, 0.3)
        assert not in_partial_sum(mu + 1.0, 4.0, 0.3)

    def test_uniform(self):
        mu = np.full(16, 2.0)
        assert uniform_deviation(mu, 2.0, 0.3) == pytest.approx(0.0)
        assert in_uniform(mu, 2.0, 0.3, 0.3)
        shifted = mu + 5.0
        assert not in_uniform(shifted, 2.0, 0.3, 0.3)
