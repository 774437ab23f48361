"""Uniform log-concavity moduli of finite-dimensional projections.

For an exchangeable Gaussian family the n-dimensional projection has
precision matrix Sigma_n^{-1} and uniform log-concavity modulus

    kappa_n = 1 / lambda_max(Sigma_n) = 1 / (sigma2 * (1 - rho + n rho)),

exact by the two-eigenvalue structure. kappa_n stays bounded away from zero
iff rho = 0: correlation makes the all-ones eigenvalue grow linearly, so a
non-product exchangeable Gaussian is log-concave at every finite n (the
Borell projection fact) yet not *uniformly* log-concave on sequence space.
The closing counterexample makes that gap explicit: mixing a product of
shifted one-dimensional laws over a Gaussian shift yields, for a quadratic
potential, the family Sigma = Var(V) I + 11^T with kappa_n -> 0.

Non-Gaussian projections are audited numerically: `grid_hessian_modulus`
takes second differences of -log density along coordinate axes and the
normalized diagonal (the extremal direction for exchangeable measures) on a
box grid, in dimensions up to 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .definetti import ExchangeableMixture
from .findim_approx import ExchangeableGaussian

__all__ = [
    "ModulusCurve",
    "QuadraticPotential",
    "GridHessianReport",
    "ProjectionBoundsReport",
    "gaussian_modulus",
    "modulus_curve",
    "counterexample_projection",
    "grid_hessian_modulus",
    "projection_bounds_check",
    "mixture_projection_density",
]


@dataclass(frozen=True)
class QuadraticPotential:
    """V(s) = curvature * (s - center)^2 / 2 with curvature > 0."""

    curvature: float
    center: float = 0.0

    def __post_init__(self):
        if not (self.curvature > 0.0 and math.isfinite(self.curvature)):
            raise ValueError("curvature must be positive and finite")


@dataclass(frozen=True)
class ModulusCurve:
    rows: tuple  # (n, kappa_n) pairs
    uniform: bool

    def to_csv(self) -> str:
        lines = ["n,kappa"]
        for n, kappa in self.rows:
            lines.append(f"{n},{kappa!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GridHessianReport:
    modulus: float
    argmin: tuple
    direction: str
    log_concave: bool


@dataclass(frozen=True)
class ProjectionBoundsReport:
    rows: tuple  # (n, kappa_n, upper modulus of the projection)
    lower_chain_ok: bool
    upper_chain_ok: bool


def gaussian_modulus(g: ExchangeableGaussian, n: int) -> float:
    """kappa_n = smallest eigenvalue of the precision matrix, exactly."""
    _, ones = g.eigenvalues(n)
    return 1.0 / ones


def modulus_curve(g: ExchangeableGaussian, n_list) -> ModulusCurve:
    """kappa_n across dimensions; uniform verdict is the rho = 0 criterion."""
    n_list = [int(n) for n in n_list]
    if any(n2 <= n1 for n1, n2 in zip(n_list, n_list[1:])) or not n_list:
        raise ValueError("n_list must be strictly increasing and nonempty")
    rows = tuple((n, gaussian_modulus(g, n)) for n in n_list)
    return ModulusCurve(rows=rows, uniform=g.rho == 0.0)


def counterexample_projection(potential) -> ExchangeableGaussian:
    """Coordinate projection of the shifted-product counterexample.

    Mix the product of laws exp(-V(x_i + t)) over a standard Gaussian shift
    t: the x-projection is exchangeable and log-concave at every finite n,
    but not a product. For quadratic V the projection is exactly the
    exchangeable Gaussian with Var(x_i) = 1/curvature + 1 and unit
    off-diagonal covariance (the shared shift), at every dimension, so
    kappa_n = 1/(1/curvature + n) decays to zero.
    """
    if not isinstance(potential, QuadraticPotential):
        raise ValueError(
            "only quadratic potentials have a closed-form projection; "
            "audit general densities with grid_hessian_modulus"
        )
    var = 1.0 / potential.curvature
    sigma2 = var + 1.0
    return ExchangeableGaussian(sigma2=sigma2, rho=1.0 / sigma2, mean_shift=potential.center)


def mixture_projection_density(mix: ExchangeableMixture, n: int):
    """Density of the n-dimensional projection of a de Finetti mixture,
    as a callable on point arrays of shape (m, n)."""
    logw = np.log(np.asarray(mix.weights, dtype=float))

    def density(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        per_comp = np.stack(
            [np.sum(np.asarray(c.logpdf(pts), dtype=float), axis=1) for c in mix.components]
        )
        return np.exp(logsumexp(per_comp + logw[:, None], axis=0))

    return density


def grid_hessian_modulus(density, box, resolution: int) -> GridHessianReport:
    """Minimum second difference of -log density over a box grid.

    Directions: coordinate axes plus the normalized diagonal (for
    exchangeable measures the diagonal carries the extremal curvature).
    A negative modulus flags "not log-concave"; the argmin point and
    direction are reported. Dimensions up to 3 only.
    """
    box = [(float(lo), float(hi)) for lo, hi in box]
    n = len(box)
    if not 1 <= n <= 3:
        raise ValueError("grid Hessian audit supports dimensions 1..3")
    if resolution < 3:
        raise ValueError("resolution must be >= 3")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    steps = [ax[1] - ax[0] for ax in axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = np.asarray(density(pts), dtype=float).reshape([resolution] * n)
    if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
        raise ValueError("density underflow on the box")
    W = -np.log(vals)

    best = math.inf
    best_idx = None
    best_dir = ""
    inner = slice(1, -1)

    def consider(d2, label, offsets):
        nonlocal best, best_idx, best_dir
        i = np.unravel_index(np.argmin(d2), d2.shape)
        if d2[i] < best:
            best = float(d2[i])
            best_idx = tuple(int(ix) + off for ix, off in zip(i, offsets))
            best_dir = label

    for axis in range(n):
        sl_m = [inner] * n
        sl_p = [inner] * n
        sl_c = [inner] * n
        sl_m[axis] = slice(0, -2)
        sl_p[axis] = slice(2, None)
        sl_c[axis] = inner
        # only the target axis needs trimming; other axes keep full range
        for other in range(n):
            if other != axis:
                sl_m[other] = sl_p[other] = sl_c[other] = slice(None)
        d2 = (W[tuple(sl_p)] - 2.0 * W[tuple(sl_c)] + W[tuple(sl_m)]) / steps[axis] ** 2
        offsets = [1 if ax == axis else 0 for ax in range(n)]
        consider(d2, f"axis_{axis}", offsets)

    if n >= 2:
        sl_p = tuple(slice(2, None) for _ in range(n))
        sl_c = tuple(inner for _ in range(n))
        sl_m = tuple(slice(0, -2) for _ in range(n))
        denom = sum(h * h for h in steps)
        d2 = (W[sl_p] - 2.0 * W[sl_c] + W[sl_m]) / denom
        consider(d2, "diagonal", [1] * n)

    argmin_point = tuple(float(axes[ax][best_idx[ax]]) for ax in range(n))
    return GridHessianReport(
        modulus=best,
        argmin=argmin_point,
        direction=best_dir,
        log_concave=best >= 0.0,
    )


def projection_bounds_check(g: ExchangeableGaussian, n_list) -> ProjectionBoundsReport:
    """Both curvature bounds survive projection, via eigenvalue interlacing.

    For n < m the lower modulus can only improve (kappa_n >= kappa_m) and
    the upper modulus lambda_max(precision) of the projection never exceeds
    the one at dimension m; for this family the upper chain is constant.
    """
    n_list = [int(n) for n in n_list]
    if any(n2 <= n1 for n1, n2 in zip(n_list, n_list[1:])) or not n_list:
        raise ValueError("n_list must be strictly increasing and nonempty")
    rows = []
    for n in n_list:
        bulk, ones = g.eigenvalues(n)
        kappa = 1.0 / ones
        upper = 1.0 / bulk if n > 1 else 1.0 / ones  # lambda_max of the precision
        rows.append((n, kappa, upper))
    tol = 1e-10
    lower_ok = all(rows[i][1] >= rows[i + 1][1] - tol for i in range(len(rows) - 1))
    upper_ok = all(rows[i][2] <= rows[i + 1][2] + tol for i in range(len(rows) - 1))
    return ProjectionBoundsReport(rows=tuple(rows), lower_chain_ok=lower_ok, upper_chain_ok=upper_ok)
