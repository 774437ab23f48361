"""Finite-dimensional approximation experiments and the uniform-Lipschitz monitor.

The finite-n exchangeable problem equals the standard Monge-Kantorovich
problem with cost sum_i (x_i - y_i)^2; dividing by n restores the
exchangeable normalization (x_1 - y_1)^2 that the infinite problem is
stated in. `empirical_value` estimates that value by an exact assignment
between equal-size sample clouds; `convergence_experiment` replicates the
estimate and tracks its trend toward the nested reference value.

Both marginal clouds are drawn under the *same* seed path (common random
numbers), so identical marginals produce identical clouds and the estimate
collapses to zero there; for distinct marginals the coupling of streams
only reduces variance and never constrains the assignment optimum.

Exchangeable Gaussian families (covariance sigma2 * ((1-rho) I + rho 11^T))
are the one case with closed forms: the optimal map between centered
members is linear with explicitly known spectrum, which gives an exact
uniform-Lipschitz figure per dimension. That figure stays bounded in n
exactly when the target correlation vanishes (or the source carries
matching correlation), and its divergence is the observable failure of the
uniform-Lipschitz hypothesis for non-product targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.optimize import linear_sum_assignment

from .definetti import ExchangeableMixture, sample_prefix
from .dist1d import DEFAULT_GRID, QuantileGrid
from .outer_ot import exchangeable_value
from .seeding import seed_sequence

__all__ = [
    "ExchangeableGaussian",
    "ConvergenceRow",
    "ConvergenceTable",
    "MonitorReport",
    "GaussianMapReport",
    "cloud_value",
    "empirical_value",
    "convergence_experiment",
    "gaussian_brenier_lipschitz",
    "assumption_a_monitor",
]

HALF_WIDTH_FLOOR = 1e-12  # keeps degenerate (constant) replications usable


@dataclass(frozen=True)
class ExchangeableGaussian:
    """Infinitely exchangeable Gaussian family: mean = mean_shift * 1 and
    covariance Sigma_n = sigma2 * ((1 - rho) I + rho 11^T) at every n.

    Eigenvalues of Sigma_n: sigma2*(1-rho) with multiplicity n-1 and
    sigma2*(1-rho+n*rho) on the all-ones vector. rho >= 0 is required for
    the family to extend to sequence space.
    """

    sigma2: float
    rho: float
    mean_shift: float = 0.0

    def __post_init__(self):
        if not (self.sigma2 > 0.0 and math.isfinite(self.sigma2)):
            raise ValueError("sigma2 must be positive and finite")
        if not (0.0 <= self.rho < 1.0):
            raise ValueError("rho must lie in [0, 1)")

    def eigenvalues(self, n: int) -> tuple:
        """(bulk eigenvalue, ones-direction eigenvalue) of Sigma_n."""
        if n < 1:
            raise ValueError("n must be >= 1")
        bulk = self.sigma2 * (1.0 - self.rho)
        ones = self.sigma2 * (1.0 - self.rho + n * self.rho)
        return bulk, ones

    def covariance(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        return self.sigma2 * ((1.0 - self.rho) * np.eye(n) + self.rho * np.ones((n, n)))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    mean: float
    half_width: float
    sample_size: int
    replications: int


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple
    reference: float
    spearman: float

    def to_csv(self) -> str:
        lines = ["n,mean,half_width,sample_size,replications,reference"]
        for r in self.rows:
            lines.append(
                f"{r.n},{r.mean!r},{r.half_width!r},{r.sample_size},"
                f"{r.replications},{self.reference!r}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GaussianMapReport:
    lipschitz: float
    ones_direction: float
    bulk_direction: float
    source_eigenvalues: tuple
    target_eigenvalues: tuple


@dataclass(frozen=True)
class MonitorReport:
    mode: str
    figures: tuple  # (n, lipschitz figure) pairs
    bounded: bool
    diverging: bool
    note: str

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "figures": [{"n": n, "lipschitz": f} for n, f in self.figures],
            "bounded": self.bounded,
            "diverging": self.diverging,
            "note": self.note,
        }


def _pair_costs(X, Y):
    """Costs ||x_r - y_s||^2 with a canonical (sorted) summation order, so
    the matrix is bit-identical under joint coordinate permutations."""
    diff = (X[:, None, :] - Y[None, :, :]) ** 2
    diff.sort(axis=2)
    return diff.sum(axis=2)


def cloud_value(X, Y) -> float:
    """Exact normalized assignment value between two equal-size clouds.

    (1/(n*S)) * min over permutations of sum_r ||x_r - y_{sigma(r)}||^2,
    solved exactly; the chosen costs are summed in sorted order so the value
    is invariant under row permutations bit for bit.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != Y.shape[1]:
        raise ValueError("clouds must be 2-d with matching coordinate count")
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"unequal cloud sizes {X.shape[0]} vs {Y.shape[0]}")
    S, n = X.shape
    D = _pair_costs(X, Y)
    rows, cols = linear_sum_assignment(D)
    chosen = np.sort(D[rows, cols])
    return float(np.sum(chosen)) / (n * S)


def empirical_value(
    mu: ExchangeableMixture,
    nu: ExchangeableMixture,
    n: int,
    sample_size: int,
    seed,
) -> float:
    """Empirical estimate of the dimension-n exchangeable value.

    Clouds for the two marginals share the seed path; the assignment is
    solved exactly and normalized by n * sample_size.
    """
    if n < 1 or sample_size < 1:
        raise ValueError("n and sample_size must be >= 1")
    X = sample_prefix(mu, n, sample_size, seed).rows
    Y = sample_prefix(nu, n, sample_size, seed).rows
    return cloud_value(X, Y)


def convergence_experiment(
    mu: ExchangeableMixture,
    nu: ExchangeableMixture,
    n_list,
    sample_size: int,
    replications: int,
    seed,
    grid: QuantileGrid = DEFAULT_GRID,
) -> ConvergenceTable:
    """Replicated empirical values per dimension against the nested reference.

    Per-n mean with a 95% Student-t half-width over independent
    replications (substream (seed, n_index, replication)); the Spearman
    correlation of the means with n is the monotone-trend diagnostic.
    """
    n_list = [int(n) for n in n_list]
    if any(n2 <= n1 for n1, n2 in zip(n_list, n_list[1:])) or not n_list:
        raise ValueError("n_list must be strictly increasing and nonempty")
    if replications < 2:
        raise ValueError("replications must be >= 2")
    reference, _, _ = exchangeable_value(mu, nu, grid)
    tcrit = float(stats.t.ppf(0.975, replications - 1))
    rows = []
    means = []
    for ni, n in enumerate(n_list):
        vals = np.array(
            [
                empirical_value(mu, nu, n, sample_size, seed_sequence(seed, ni, r))
                for r in range(replications)
            ]
        )
        mean = float(np.mean(vals))
        sd = float(np.std(vals, ddof=1))
        hw = max(tcrit * sd / math.sqrt(replications), HALF_WIDTH_FLOOR)
        rows.append(ConvergenceRow(n, mean, hw, sample_size, replications))
        means.append(mean)
    if len(n_list) >= 2 and np.ptp(means) > 0:
        rho = float(stats.spearmanr(n_list, means).statistic)
    else:
        rho = 1.0  # constant means: trivially monotone
    return ConvergenceTable(rows=tuple(rows), reference=float(reference), spearman=rho)


def gaussian_brenier_lipschitz(
    source: ExchangeableGaussian, target: ExchangeableGaussian, n: int
):
    """Exact Lipschitz constant of the optimal map between centered members.

    The two covariances share the eigenbasis (all-ones direction plus its
    complement), so the linear optimal map has eigenvalues
    sqrt(lambda_target / lambda_source) direction by direction and the
    Lipschitz constant is their maximum.
    """
    ls_bulk, ls_ones = source.eigenvalues(n)
    lt_bulk, lt_ones = target.eigenvalues(n)
    if min(ls_bulk, ls_ones, lt_bulk, lt_ones) <= 0.0:
        raise ValueError("covariance not positive definite at this dimension")
    ones_dir = math.sqrt(lt_ones / ls_ones)
    bulk_dir = math.sqrt(lt_bulk / ls_bulk)
    lip = ones_dir if n == 1 else max(ones_dir, bulk_dir)
    report = GaussianMapReport(
        lipschitz=lip,
        ones_direction=ones_dir,
        bulk_direction=bulk_dir,
        source_eigenvalues=source.eigenvalues(n),
        target_eigenvalues=target.eigenvalues(n),
    )
    return lip, report


def _matched_pair_lipschitz(X, Y) -> float:
    """Lower bound on any matching-compatible Lipschitz constant: max over
    matched pairs of ||y_r - y_s|| / ||x_r - x_s||."""
    D = _pair_costs(X, Y)
    rows, cols = linear_sum_assignment(D)
    Ym = Y[cols]
    dx = np.sqrt(_pair_costs(X, X))
    dy = np.sqrt(_pair_costs(Ym, Ym))
    iu = np.triu_indices(len(X), k=1)
    num, den = dy[iu], dx[iu]
    ok = den > 0.0
    return float(np.max(num[ok] / den[ok])) if np.any(ok) else 0.0


def assumption_a_monitor(
    mu,
    nu,
    n_list,
    mode: str,
    seed=None,
    sample_size: int = 128,
    caffarelli_bound: float | None = None,
) -> MonitorReport:
    """Uniform-Lipschitz figures of the finite-dimensional optimal maps.

    gaussian mode: both marginals must be ExchangeableGaussian; figures are
    exact. The divergence flag is the closed-form criterion (target
    correlation positive while the source carries none). The bounded
    verdict stays conservative: it is claimed only for correlation-free
    pairs or when the caller supplies a contraction bound sqrt(C/c) from
    verified curvature hypotheses.

    empirical mode: both marginals must be mixtures; figures are
    matched-pair difference quotients and are lower bounds only.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or any(n < 1 for n in n_list):
        raise ValueError("n_list must contain positive dimensions")
    if mode == "gaussian":
        if not isinstance(mu, ExchangeableGaussian) or not isinstance(nu, ExchangeableGaussian):
            raise ValueError("gaussian mode requires ExchangeableGaussian marginals")
        figures = tuple((n, gaussian_brenier_lipschitz(mu, nu, n)[0]) for n in n_list)
        diverging = nu.rho > 0.0 and mu.rho == 0.0
        bounded = (mu.rho == 0.0 and nu.rho == 0.0) or caffarelli_bound is not None
        note = "exact closed form"
        if caffarelli_bound is not None:
            note += f"; bounded by caller-supplied contraction bound {caffarelli_bound:.6g}"
    elif mode == "empirical":
        if not isinstance(mu, ExchangeableMixture) or not isinstance(nu, ExchangeableMixture):
            raise ValueError("empirical mode requires ExchangeableMixture marginals")
        if seed is None:
            raise ValueError("empirical mode requires a seed")
        figs = []
        for ni, n in enumerate(n_list):
            X = sample_prefix(mu, n, sample_size, seed_sequence(seed, ni)).rows
            Y = sample_prefix(nu, n, sample_size, seed_sequence(seed, ni)).rows
            figs.append((n, _matched_pair_lipschitz(X, Y)))
        figures = tuple(figs)
        diverging = False
        bounded = False
        note = "lower bound only"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return MonitorReport(
        mode=mode, figures=figures, bounded=bounded, diverging=diverging, note=note
    )
