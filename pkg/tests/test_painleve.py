# tests/test_painleve.py
import numpy as np
import pytest

from app.core.errors import SingularPointError, StencilError
from app.core.painleve import (
    CHAIN_STEPS,
    MASS_STEP,
    derivatives,
    extract_u_piii,
    extract_u_pv,
    lax_residual_pv,
    mass_check,
    model_field_solver,
    nls_refinement,
    nls_residual,
    piii_chain,
    piii_residual,
    piii_residual_report,
    pv_chain,
    pv_residual,
    singular_samples,
    uniform_grid,
    zeta_limit_report,
)
from app.core.model_problems import model_profile
from app.core.soliton import evaluate_field, one_soliton
from app.core.spectral import build_spectral_data
from app.models.painleve import PainleveParams, SampledFunction
from app.models.problems import ModelParams


class TestStencils:
    @pytest.mark.parametrize("order,tol", [(2, 1e-4), (4, 1e-8)])
    def test_derivatives_of_sine(self, order, tol):
        x = np.linspace(0.0, 1.0, 101)
        inner, d1, d2 = derivatives(np.sin(x), x[1] - x[0], order)
        np.testing.assert_allclose(d1, np.cos(x[inner]), atol=tol)
        np.testing.assert_allclose(d2, -np.sin(x[inner]), atol=tol * 10)

    def test_too_few_points(self):
        with pytest.raises(StencilError):
            derivatives(np.ones(4), 0.1, 4)

    def test_unsupported_order(self):
        with pytest.raises(StencilError):
            derivatives(np.ones(9), 0.1, 6)


class TestPiii:
    def test_manufactured_extraction(self):
        x = np.linspace(0.5, 1.5, 21)
        u = extract_u_piii(SampledFunction(abscissae=x, values=np.exp(x) / x ** 2, stencil=4))
        np.testing.assert_allclose(u.values, 2.0, atol=1e-6)

    def test_constant_one_leaves_four_over_x(self):
        x = np.linspace(0.5, 1.5, 11)
        u = SampledFunction(abscissae=x, values=np.ones_like(x))
        assert piii_residual(u) == pytest.approx(4.0 / 0.6)

    def test_extraction_needs_positive_abscissae(self):
        x = np.linspace(-0.5, 0.5, 11)
        with pytest.raises(SingularPointError):
            extract_u_piii(SampledFunction(abscissae=x, values=np.ones_like(x)))

    def test_vanishing_samples_are_flagged(self):
        x = np.linspace(0.5, 1.5, 11)
        values = x - 1.0
        with pytest.raises(SingularPointError) as exc:
            extract_u_piii(SampledFunction(abscissae=x, values=values))
        assert exc.value.abscissae == pytest.approx([1.0])

    def test_chain_refines_on_the_window(self, cache):
        coarse, fine = (piii_chain(uniform_grid(0.5, 3.0, h), order=4, cache=cache) for h in CHAIN_STEPS)
        assert fine.residual < 1e-3
        assert fine.residual < coarse.residual
        assert fine.points > 0 and fine.h == pytest.approx(CHAIN_STEPS[1])
        assert any(abs(v - 1.35) < 0.1 for v in fine.excluded)

    def test_poles_are_excluded_and_reported(self):
        x = np.linspace(0.5, 3.0, 101)
        pole = 1.3537
        u = SampledFunction(abscissae=x, values=1.0 / (x - pole) + 0.0j, stencil=4)
        assert singular_samples(u)[np.argmin(np.abs(x - pole))]
        report = piii_residual_report(u)
        near = x[2:-2][np.abs(x[2:-2] - pole) < 0.5]
        assert set(near.tolist()) <= set(report.excluded)
        assert all(abs(v - pole) < 0.7 for v in report.excluded)
        assert report.points + len(report.excluded) == x.size - 4

    def test_everything_singular_is_an_error(self):
        x = np.linspace(0.5, 0.7, 9)
        values = np.array([1.0, 50.0] * 4 + [1.0]) + 0j
        with pytest.raises(SingularPointError):
            piii_residual_report(SampledFunction(abscissae=x, values=values))


class TestPv:
    def test_coefficients(self):
        params = PainleveParams(mu_mean=2.0, zeta=0.5)
        assert params.alpha == pytest.approx(-32.0)
        assert params.beta == pytest.approx(32.0)
        assert params.gamma == pytest.approx(1.0)
        assert params.delta == -0.5
        assert params.theta_inf == 0

    def test_manufactured_extraction(self):
        X = np.linspace(0.5, 1.5, 21)
        u = extract_u_pv(SampledFunction(abscissae=X, values=np.exp(X) / X, stencil=4), 0.3)
        np.testing.assert_allclose(u.values, 1.0 / (1.0 - 0.6j), atol=1e-5)
        assert u.scale == pytest.approx(0.6j)

    def test_unscaled_form_uses_unit_pole(self):
        X = np.linspace(0.5, 1.5, 21)
        u = extract_u_pv(SampledFunction(abscissae=X, values=np.exp(X) / X, stencil=4), 0.3, form="unscaled")
        np.testing.assert_allclose(u.values, 1.0 / (1.0 - 2.0j), atol=1e-5)

    def test_residual_of_a_fixed_point(self):
        # con u ≡ −1 el término en δ se anula y el de (u − 1)² vale 4(−α − β)/s²
        params = PainleveParams(mu_mean=2.0, zeta=0.5)
        s_grid = np.linspace(1.0, 2.0, 11)
        u = SampledFunction(abscissae=s_grid, values=-np.ones_like(s_grid))
        s = s_grid[1:-1]
        expected = np.abs(4.0 * (-params.alpha - params.beta) / s ** 2 - params.gamma / s)
        assert pv_residual(u, params) == pytest.approx(float(np.max(expected)))

    def test_chain_refines_on_the_window(self, cache):
        coarse, fine = (pv_chain(uniform_grid(0.5, 3.0, h), 2.0, 0.3, order=4, cache=cache) for h in CHAIN_STEPS)
        assert fine.residual < 1e-3
        assert fine.residual < coarse.residual

    def test_unit_value_is_singular(self):
        X = np.linspace(1.0, 2.0, 21)
        values = 1.0 + 0.05 * (X - 1.5) + 0.8j * (X - 1.5)
        flagged = singular_samples(SampledFunction(abscissae=X, values=values), pv=True)
        assert flagged[10] and not flagged[0]

    def test_lax_matrix_consistency(self):
        corrected = lax_residual_pv(0.5, 0.3, 1.0, (3.0, 0.5j), hx=1e-3, hz=1e-4)
        unscaled = lax_residual_pv(0.5, 0.3, 1.0, (3.0, 0.5j), hx=1e-3, hz=1e-4, form="unscaled")
        assert corrected["trace"] < 1e-8
        assert corrected["residual"] < 1e-4
        assert unscaled["residual"] > 1e-2


class TestNls:
    def test_one_soliton_residual(self):
        data = build_spectral_data([0.3 + 1j])
        field = evaluate_field(data, np.linspace(-0.2, 0.2, 41), np.linspace(0.0, 0.04, 5))
        assert nls_residual(field, order=4) < 1e-4

    def test_needs_five_points(self):
        data = build_spectral_data([1j])
        field = evaluate_field(data, np.linspace(-1, 1, 4), np.linspace(0, 1, 5))
        with pytest.raises(StencilError):
            nls_residual(field)

    def test_refinement_is_second_order(self):
        def solver(X, T):
            return complex(one_soliton(X, T, eta=1.0, xi=0.3))

        centers = [(0.1, 0.05), (0.4, -0.2)]
        study = nls_refinement(centers, (0.01, 0.04, 0.02), solver)
        assert study["steps"] == [0.04, 0.02, 0.01]
        for ratio in study["ratios"]:
            assert 3.5 <= ratio <= 4.5


def test_mass_identity_on_piii_profile(cache):
    errors = [
        mass_check(model_profile(ModelParams(case="PIII"), uniform_grid(-1.0, 1.0, h), cache=cache), order=4)
        for h in (0.025, MASS_STEP)
    ]
    assert errors[1] < 1e-3
    # cuarto orden: cada mitad de paso divide el error por ~16
    assert errors[0] / errors[1] > 8.0


def test_zeta_limit_approaches_piii(cache):
    rows = zeta_limit_report(2.0, (1e-3, 1e-2), uniform_grid(-1.0, 1.0, 0.05), cache=cache)
    assert [row["zeta"] for row in rows] == [1e-2, 1e-3]
    assert rows[0]["l2"] < 5e-2
    assert rows[1]["l2"] < rows[0]["l2"]


def test_nls_residual_of_piii_solution_is_second_order(cache):
    centers = [(X, T) for X in (-0.5, 0.0, 0.5) for T in (-0.5, 0.0, 0.5)]
    study = nls_refinement(centers, (0.04, 0.02, 0.01), model_field_solver(ModelParams(case="PIII"), cache=cache))
    assert len(study["ratios"]) == 2
    for ratio in study["ratios"]:
        assert 3.5 <= ratio <= 4.5
