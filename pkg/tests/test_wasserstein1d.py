import math

import numpy as np
import pytest
from scipy import stats

from exot.dist1d import Empirical, Gaussian, GridPotential, QuantileGrid, Uniform
from exot.outer_ot import solve_exact
from exot.wasserstein1d import (
    AtomicSourceError,
    CurvatureBoundError,
    caffarelli_check,
    lipschitz_estimate,
    monotone_map,
    transport_cost,
    w2_squared,
)

GRID = QuantileGrid(100_000)
# lcm(1..8) = 840: quantiles of <=8 equally weighted atoms are constant on
# every midpoint cell, so the quadrature is exact for such laws
ALIGNED = QuantileGrid(840)


def perturbed_grid(amplitude=0.1, lo=-9.0, hi=9.0, n=1601):
    xs = np.linspace(lo, hi, n)
    return GridPotential(tuple(xs), tuple(xs**2 / 2 + amplitude * np.sin(xs)))


def random_law(g):
    kind = g.integers(3)
    if kind == 0:
        return Gaussian(float(g.normal()), float(g.uniform(0.5, 2.0)))
    if kind == 1:
        a = float(g.normal())
        return Uniform(a, a + float(g.uniform(0.5, 3.0)))
    n = int(g.integers(1, 9))
    atoms = np.sort(g.normal(size=n) * 2)
    return Empirical(tuple(atoms), (1.0 / n,) * n)


# -- w2_squared ---------------------------------------------------------------


def test_w2_zero_on_equal_inputs():
    for d in [Gaussian(1, 2), Uniform(0, 3), Empirical((0.0, 1.0), (0.5, 0.5))]:
        assert w2_squared(d, d, ALIGNED) == 0.0


def test_w2_point_masses():
    a, b = Empirical((1.5,), (1.0,)), Empirical((-2.0,), (1.0,))
    assert w2_squared(a, b, ALIGNED) == pytest.approx(3.5**2, abs=1e-12)


def test_w2_gaussian_analytic():
    for m, s in [(1.0, 1.0), (2.0, 0.8), (-1.5, 1.2)]:
        w = w2_squared(Gaussian(0, 1), Gaussian(m, s), GRID)
        assert abs(w - (m * m + (1 - s) ** 2)) <= 1e-6


def test_w2_symmetry_exact_and_triangle():
    g = np.random.default_rng(11)
    for _ in range(25):
        p, q, r = random_law(g), random_law(g), random_law(g)
        grid = QuantileGrid(2000)
        assert w2_squared(p, q, grid) == w2_squared(q, p, grid)
        dpq = math.sqrt(w2_squared(p, q, grid))
        dpr = math.sqrt(w2_squared(p, r, grid))
        drq = math.sqrt(w2_squared(r, q, grid))
        assert dpq <= dpr + drq + 1e-9


def test_w2_identity_of_indiscernibles_on_grid():
    # equal quantiles on the grid <=> zero distance
    p = Empirical((0.0, 1.0), (0.5, 0.5))
    q = Empirical((0.0, 0.5, 1.0), (0.25, 0.5, 0.25))
    assert w2_squared(p, q, ALIGNED) > 0


def test_w2_equals_exact_discrete_ot():
    # sorted-pairing optimality: quantile quadrature == transportation LP
    g = np.random.default_rng(3)
    for _ in range(30):
        n, m = int(g.integers(1, 9)), int(g.integers(1, 9))
        p = Empirical(tuple(np.sort(g.normal(size=n))), (1.0 / n,) * n)
        q = Empirical(tuple(np.sort(g.normal(size=m))), (1.0 / m,) * m)
        C = (np.asarray(p.atoms)[:, None] - np.asarray(q.atoms)[None, :]) ** 2
        exact = solve_exact(C, np.full(n, 1 / n), np.full(m, 1 / m)).value
        assert abs(w2_squared(p, q, ALIGNED) - exact) <= 1e-12


# -- monotone_map -------------------------------------------------------------


def test_identity_map_on_probes():
    m = monotone_map(Gaussian(0, 1), Gaussian(0, 1))
    s = Gaussian(0, 1).sample(1000, 3)
    assert np.max(np.abs(m(s) - s)) <= 1e-12


def test_shift_map_closed_form():
    m = monotone_map(Gaussian(0, 1), Gaussian(3, 1))
    s = Gaussian(0, 1).sample(1000, 42)
    assert np.max(np.abs(m(s) - (s + 3.0))) <= 1e-9


def test_uniform_rescaling_map():
    m = monotone_map(Uniform(0, 1), Uniform(0, 2))
    s = np.linspace(0.01, 0.99, 99)
    np.testing.assert_allclose(m(s), 2 * s, rtol=0, atol=1e-15)


def test_map_cost_matches_w2():
    pairs = [
        (Gaussian(0, 1), Gaussian(2, 0.5)),
        (Gaussian(0, 1), Uniform(0, 1)),
        (Uniform(-1, 1), Gaussian(0, 2)),
    ]
    for p, q in pairs:
        m = monotone_map(p, q)
        assert transport_cost(m, GRID) == pytest.approx(w2_squared(p, q, GRID), rel=2e-4)


def test_atomic_source_rejected():
    with pytest.raises(AtomicSourceError, match="source has atoms"):
        monotone_map(Empirical((0.0, 1.0), (0.5, 0.5)), Gaussian(0, 1))


def test_pushforward_two_sample_ks():
    m = monotone_map(Gaussian(0, 1), Uniform(0, 2))
    mapped = m(Gaussian(0, 1).sample(10_000, 8))
    direct = Uniform(0, 2).sample(10_000, 9)
    assert stats.ks_2samp(mapped, direct).pvalue >= 1e-3


# -- lipschitz_estimate -------------------------------------------------------


def test_lipschitz_identity_exact():
    m = monotone_map(Gaussian(0, 1), Gaussian(0, 1))
    assert lipschitz_estimate(m, 50, 0) == 1.0
    assert lipschitz_estimate(m, 500, 1) == 1.0


def test_lipschitz_linear_map():
    m = monotone_map(Gaussian(0, 1), Gaussian(0, 0.5))
    assert lipschitz_estimate(m, 200, 5) == pytest.approx(0.5, abs=1e-9)


def test_lipschitz_monotone_in_probes():
    # the first n draws of a stream are a prefix of the first 2n draws
    m = monotone_map(Gaussian(0, 1), Uniform(0, 1))
    small = lipschitz_estimate(m, 100, 17)
    large = lipschitz_estimate(m, 200, 17)
    assert large >= small
    assert math.isfinite(large)


# -- caffarelli_check ---------------------------------------------------------


def test_caffarelli_tight_gaussian():
    rep = caffarelli_check(Gaussian(0, 1), Gaussian(0, 0.5), 1.0, 4.0, probes=64, seed=5)
    assert rep.bound == 0.5
    assert rep.estimate == pytest.approx(0.5, abs=1e-9)
    assert rep.satisfied


def test_caffarelli_identity():
    rep = caffarelli_check(Gaussian(0, 1), Gaussian(0, 1), 1.0, 1.0, probes=32, seed=2)
    assert rep.bound == 1.0
    assert rep.estimate == pytest.approx(1.0, abs=1e-9)
    assert rep.satisfied


def test_caffarelli_perturbed_grid_target():
    tgt = perturbed_grid(0.1)
    rng = tgt.curvature_range()
    assert rng.lo >= 0.9 - 1e-9  # the claimed c is actually verified
    rep = caffarelli_check(Gaussian(0, 1), tgt, 1.0, 0.9, probes=128, seed=7)
    assert rep.bound == pytest.approx(math.sqrt(1 / 0.9), abs=1e-12)
    assert rep.estimate <= rep.bound + 1e-9
    assert rep.satisfied


def test_caffarelli_randomized_gaussian_pairs():
    g = np.random.default_rng(2024)
    for trial in range(20):
        C = float(g.uniform(0.3, 4.0))
        c = float(g.uniform(0.1, 1.0)) * C  # c <= C
        src = Gaussian(float(g.normal()), 1 / math.sqrt(C))
        tgt = Gaussian(float(g.normal()), 1 / math.sqrt(c))
        rep = caffarelli_check(src, tgt, C, c, probes=64, seed=1000 + trial)
        assert rep.satisfied
        assert rep.estimate == pytest.approx(rep.bound, abs=1e-9)


def test_caffarelli_names_violated_side():
    with pytest.raises(CurvatureBoundError, match="source"):
        caffarelli_check(Gaussian(0, 0.5), Gaussian(0, 1), 1.0, 1.0)  # V''=4 > C
    with pytest.raises(CurvatureBoundError, match="target"):
        caffarelli_check(Gaussian(0, 1), Gaussian(0, 2), 1.0, 1.0)  # W''=.25 < c
