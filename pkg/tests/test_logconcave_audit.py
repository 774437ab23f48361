import math

import numpy as np
import pytest

from exot.definetti import ExchangeableMixture
from exot.dist1d import Gaussian
from exot.findim_approx import ExchangeableGaussian
from exot.logconcave_audit import (
    QuadraticPotential,
    counterexample_projection,
    gaussian_modulus,
    grid_hessian_modulus,
    mixture_projection_density,
    modulus_curve,
    projection_bounds_check,
)


def gaussian_density(cov):
    P = np.linalg.inv(cov)
    norm = 1.0 / math.sqrt((2 * math.pi) ** cov.shape[0] * np.linalg.det(cov))

    def density(pts):
        pts = np.atleast_2d(pts)
        return norm * np.exp(-0.5 * np.einsum("mi,ij,mj->m", pts, P, pts))

    return density


# -- gaussian_modulus ----------------------------------------------------------


def test_modulus_product_family_constant_one():
    g = ExchangeableGaussian(1.0, 0.0)
    assert all(gaussian_modulus(g, n) == 1.0 for n in (1, 2, 16, 64))


def test_modulus_closed_form_values():
    assert gaussian_modulus(ExchangeableGaussian(1.0, 0.5), 4) == pytest.approx(0.4, abs=1e-15)
    ce = counterexample_projection(QuadraticPotential(1.0))
    assert gaussian_modulus(ce, 3) == pytest.approx(0.25, abs=1e-15)


def test_modulus_matches_numeric_eigensolver():
    worst = 0.0
    for sigma2, rho in [(1.0, 0.0), (1.0, 0.5), (2.5, 0.25), (0.7, 0.9)]:
        g = ExchangeableGaussian(sigma2, rho)
        for n in (1, 2, 4, 8, 16, 32, 64):
            lam_max = float(np.max(np.linalg.eigvalsh(g.covariance(n))))
            worst = max(worst, abs(gaussian_modulus(g, n) - 1.0 / lam_max))
    assert worst <= 1e-10


def test_divergence_rate_by_extrapolation():
    # 1/(n kappa_n) is exactly linear in 1/n: its intercept is sigma2*rho,
    # so two points recover the limit of n*kappa_n to float precision
    for sigma2, rho in [(1.0, 0.5), (2.0, 0.25), (1.5, 0.75)]:
        g = ExchangeableGaussian(sigma2, rho)
        n1, n2 = 8, 64
        y1 = 1.0 / (n1 * gaussian_modulus(g, n1))
        y2 = 1.0 / (n2 * gaussian_modulus(g, n2))
        slope = (y2 - y1) / (1.0 / n2 - 1.0 / n1)
        intercept = y1 - slope / n1
        assert abs(1.0 / intercept - 1.0 / (sigma2 * rho)) <= 1e-8


def test_uniform_iff_rho_zero():
    for sigma2 in (0.5, 1.0, 3.0):
        assert modulus_curve(ExchangeableGaussian(sigma2, 0.0), [1, 2, 4]).uniform
        assert not modulus_curve(ExchangeableGaussian(sigma2, 0.01), [1, 2, 4]).uniform


def test_modulus_curve_csv():
    curve = modulus_curve(ExchangeableGaussian(1.0, 0.5), [1, 2])
    lines = curve.to_csv().splitlines()
    assert lines[0] == "n,kappa"
    assert lines[1] == "1,1.0"


# -- counterexample -------------------------------------------------------------


def test_counterexample_standard_quadratic():
    ce = counterexample_projection(QuadraticPotential(1.0))
    assert ce.sigma2 == 2.0 and ce.rho == 0.5
    assert gaussian_modulus(ce, 1) == pytest.approx(0.5)  # Var = 1 + 1
    for n in (1, 2, 5, 8):
        cov = ce.covariance(n)
        off = cov[~np.eye(n, dtype=bool)]
        assert np.all(off == 1.0)  # the shared shift contributes exactly 1
        np.testing.assert_allclose(cov, np.eye(n) + np.ones((n, n)), atol=1e-15)


def test_counterexample_curve_is_one_over_n_plus_one():
    ce = counterexample_projection(QuadraticPotential(1.0))
    for n in range(1, 17):
        assert gaussian_modulus(ce, n) == pytest.approx(1.0 / (n + 1), rel=1e-14)


def test_counterexample_general_curvature():
    ce = counterexample_projection(QuadraticPotential(4.0))  # Var(V) = 1/4
    assert ce.sigma2 == pytest.approx(1.25)
    assert ce.sigma2 * ce.rho == pytest.approx(1.0)  # off-diagonal still 1


def test_counterexample_rejects_non_quadratic():
    with pytest.raises(ValueError, match="grid_hessian_modulus"):
        counterexample_projection(lambda s: s**4)


def test_counterexample_projections_stay_log_concave():
    # Borell: every finite-dimensional projection has positive modulus
    ce = counterexample_projection(QuadraticPotential(1.0))
    assert all(gaussian_modulus(ce, n) > 0 for n in range(1, 17))


# -- grid_hessian_modulus ---------------------------------------------------------


def test_grid_hessian_standard_gaussian_2d():
    rep = grid_hessian_modulus(gaussian_density(np.eye(2)), [(-2, 2), (-2, 2)], 41)
    h = 4.0 / 40
    assert abs(rep.modulus - 1.0) <= 2 * h * h
    assert rep.log_concave


def test_grid_hessian_bimodal_mixture_negative():
    mix = ExchangeableMixture((Gaussian(-3, 1), Gaussian(3, 1)), (0.5, 0.5))
    rep = grid_hessian_modulus(mixture_projection_density(mix, 1), [(-5, 5)], 81)
    assert rep.modulus < 0
    assert not rep.log_concave
    assert abs(rep.argmin[0]) <= 1.0  # the valley between the modes


def test_grid_hessian_counterexample_2d():
    ce = counterexample_projection(QuadraticPotential(1.0))
    rep = grid_hessian_modulus(gaussian_density(ce.covariance(2)), [(-2, 2), (-2, 2)], 41)
    assert rep.modulus == pytest.approx(1.0 / 3.0, abs=1e-10)
    assert rep.direction == "diagonal"  # the ones-direction carries the max eigenvalue


def test_grid_hessian_richardson_order_two():
    # quadratic potentials are differenced exactly; a quartic shows the
    # h^2 error: modulus(h) = 2 h^2 at the origin, ratio 4 per halving
    def quartic(pts):
        pts = np.atleast_2d(pts)
        return np.exp(-np.sum(pts**4, axis=1))

    vals = [grid_hessian_modulus(quartic, [(-1, 1)], res).modulus for res in (21, 41, 81)]
    assert 3.5 <= vals[0] / vals[1] <= 4.5
    assert 3.5 <= vals[1] / vals[2] <= 4.5


def test_grid_hessian_underflow_and_validation():
    def vanishing(pts):
        pts = np.atleast_2d(pts)
        return np.exp(-np.sum(pts**2, axis=1) * 1e6)

    with pytest.raises(ValueError, match="underflow"):
        grid_hessian_modulus(vanishing, [(-5, 5)], 21)
    with pytest.raises(ValueError, match="dimensions 1..3"):
        grid_hessian_modulus(lambda p: np.ones(len(p)), [(-1, 1)] * 4, 5)


# -- projection_bounds_check -------------------------------------------------------


def test_projection_bounds_product_family_constant():
    rep = projection_bounds_check(ExchangeableGaussian(2.0, 0.0), [1, 2, 4])
    kappas = [r[1] for r in rep.rows]
    uppers = [r[2] for r in rep.rows]
    assert kappas == [0.5] * 3 and uppers == [0.5] * 3
    assert rep.lower_chain_ok and rep.upper_chain_ok


def test_projection_bounds_correlated_family():
    rep = projection_bounds_check(ExchangeableGaussian(1.0, 0.5), [1, 2, 4])
    kappas = [r[1] for r in rep.rows]
    np.testing.assert_allclose(kappas, [1.0, 1 / 1.5, 1 / 2.5], rtol=1e-14)
    assert kappas[0] > kappas[1] > kappas[2]
    assert rep.lower_chain_ok and rep.upper_chain_ok


def test_projection_bounds_counterexample_chain():
    ce = counterexample_projection(QuadraticPotential(1.0))
    rep = projection_bounds_check(ce, [1, 2, 3])
    np.testing.assert_allclose([r[1] for r in rep.rows], [0.5, 1 / 3, 0.25], rtol=1e-14)
    assert rep.lower_chain_ok and rep.upper_chain_ok
