"""One-dimensional probability laws with CDF/quantile calculus.

These laws are the atoms of the whole system: every exchangeable measure
handled by the library is a finite mixture of countable powers of them.

Conventions
-----------
* Quantile functions are the right-continuous generalized inverse with the
  strict inequality::

      quantile(t) = inf { s : F(s) > t },   t in (0, 1).

  At a flat level of F the inf therefore resolves to the *right* endpoint
  of the plateau, e.g. a two-atom law {0, 1} with weights .5/.5 has
  quantile(0.5) = 1.
* ``GridPotential`` represents a density proportional to exp(-V) with V
  piecewise linear between the grid nodes and extrapolated linearly beyond
  them, so all cell masses and cell inversions have closed forms. The
  normalization constant is recomputed at construction.
* Log-concavity is quantified by the infimum of the second difference of
  the potential V = -log density; kappa > 0 means uniformly log-concave,
  kappa = 0 flat (uniform), and a negative infimum is reported via the
  -inf sentinel ("not log-concave").
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr, ndtri

from .seeding import rng

__all__ = [
    "Dist1D",
    "Gaussian",
    "Uniform",
    "GridPotential",
    "Empirical",
    "QuantileGrid",
    "CurvatureRange",
    "NoDensityError",
    "dist_from_dict",
    "dist_to_dict",
]

WEIGHT_TOL = 1e-12

# Quantile arguments produced from raw uniforms are kept strictly inside (0,1).
_U_FLOOR = 1e-300


class NoDensityError(ValueError):
    """Raised when an operation needs a density the law does not have."""


@dataclass(frozen=True)
class QuantileGrid:
    """Midpoint nodes t_i = (i - 1/2)/N on (0,1) for quantile quadrature.

    Midpoints never touch t = 0, 1, so unbounded supports need no
    special-casing.
    """

    count: int = 100_000

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("grid count must be >= 1")

    @cached_property
    def nodes(self) -> np.ndarray:
        n = self.count
        return (np.arange(1, n + 1) - 0.5) / n


DEFAULT_GRID = QuantileGrid()


@dataclass(frozen=True)
class CurvatureRange:
    """Range of the potential curvature D^2 V over the support interior."""

    lo: float
    hi: float
    witness: float | None = None  # location of the minimizing second difference


def _validate_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise ValueError("quantile argument must lie strictly inside (0, 1)")
    return t


class Dist1D:
    """Base class for one-dimensional laws. Immutable; safe to share."""

    kind: str = ""

    # -- distribution calculus -------------------------------------------

    def cdf(self, s):
        raise NotImplementedError

    def quantile(self, t):
        raise NotImplementedError

    def logpdf(self, x):
        raise NotImplementedError

    def second_moment(self) -> float:
        raise NotImplementedError

    def sample(self, count: int, seed) -> np.ndarray:
        """Inverse-CDF sampling; deterministic for a fixed seed."""
        if count < 1:
            raise ValueError("count must be >= 1")
        u = rng(seed).random(count)
        return np.asarray(self.quantile(np.maximum(u, _U_FLOOR)), dtype=float)

    # -- log-concavity ----------------------------------------------------

    def curvature_range(self) -> CurvatureRange:
        raise NotImplementedError

    def logconcavity_modulus(self) -> float:
        """Largest K with D^2 V >= K; -inf sentinel if the potential is not
        convex (witness available via :meth:`curvature_range`)."""
        rng_ = self.curvature_range()
        if rng_.lo < 0.0:
            return -math.inf
        return rng_.lo

    @property
    def atomless(self) -> bool:
        return True

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(Dist1D):
    mean: float
    std: float

    kind = "gaussian"

    def __post_init__(self):
        if not (self.std > 0.0 and math.isfinite(self.std) and math.isfinite(self.mean)):
            raise ValueError("gaussian requires finite mean and std > 0")

    def cdf(self, s):
        return ndtr((np.asarray(s, dtype=float) - self.mean) / self.std)

    def quantile(self, t):
        return self.mean + self.std * ndtri(_validate_t(t))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.std
        return -0.5 * z * z - math.log(self.std) - 0.5 * math.log(2.0 * math.pi)

    def second_moment(self) -> float:
        return self.mean**2 + self.std**2

    def curvature_range(self) -> CurvatureRange:
        c = 1.0 / self.std**2
        return CurvatureRange(c, c)

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "mean": float(self.mean), "std": float(self.std)}


@dataclass(frozen=True)
class Uniform(Dist1D):
    lo: float
    hi: float

    kind = "uniform"

    def __post_init__(self):
        if not (self.hi > self.lo and math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("uniform requires lo < hi, both finite")

    def cdf(self, s):
        s = np.asarray(s, dtype=float)
        return np.clip((s - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def quantile(self, t):
        return self.lo + _validate_t(t) * (self.hi - self.lo)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, -math.log(self.hi - self.lo), -math.inf)

    def second_moment(self) -> float:
        return (self.lo**2 + self.lo * self.hi + self.hi**2) / 3.0

    def curvature_range(self) -> CurvatureRange:
        return CurvatureRange(0.0, 0.0)

    def to_dict(self) -> dict:
        return {"kind": "uniform", "lo": float(self.lo), "hi": float(self.hi)}


@dataclass(frozen=True)
class Empirical(Dist1D):
    atoms: tuple
    weights: tuple

    kind = "empirical"

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(float(a) for a in self.atoms))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        a, w = self.atoms, self.weights
        if len(a) == 0 or len(a) != len(w):
            raise ValueError("empirical requires matching nonempty atoms/weights")
        if any(a[i] > a[i + 1] for i in range(len(a) - 1)):
            raise ValueError("empirical atoms must be nondecreasing")
        if any(wi <= 0.0 for wi in w):
            raise ValueError("empirical weights must be positive")
        if abs(sum(w) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"empirical weights sum {sum(w):.12g} != 1")

    @cached_property
    def _atoms(self) -> np.ndarray:
        return np.asarray(self.atoms, dtype=float)

    @cached_property
    def _cumw(self) -> np.ndarray:
        c = np.cumsum(np.asarray(self.weights, dtype=float))
        c[-1] = 1.0  # absorb the <=1e-12 rounding slack
        return c

    def cdf(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self._atoms, s, side="right")
        padded = np.concatenate(([0.0], self._cumw))
        return padded[idx]

    def quantile(self, t):
        # inf{ s : F(s) > t }: first atom whose cumulative weight exceeds t.
        t = _validate_t(t)
        idx = np.searchsorted(self._cumw, t, side="right")
        return self._atoms[idx]

    def logpdf(self, x):
        # Point-mass log-likelihood: log weight at an exact atom hit.
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self._atoms, x, side="left")
        idx = np.clip(idx, 0, len(self.atoms) - 1)
        hit = self._atoms[idx] == x
        w = np.asarray(self.weights, dtype=float)[idx]
        with np.errstate(divide="ignore"):
            return np.where(hit, np.log(w), -math.inf)

    def second_moment(self) -> float:
        return float(np.dot(self._atoms**2, self.weights))

    def curvature_range(self) -> CurvatureRange:
        raise NoDensityError("empirical law has no density")

    @property
    def atomless(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {
            "kind": "empirical",
            "atoms": [float(a) for a in self.atoms],
            "weights": [float(w) for w in self.weights],
        }


def _cell_mass(v0, b, dx):
    """integral_0^dx exp(-(v0 + b*u)) du, stable for all slopes b."""
    out = np.empty_like(np.broadcast_arrays(v0, b, dx)[0], dtype=float)
    v0, b, dx = np.broadcast_arrays(v0, b, dx)
    small = np.abs(b * dx) < 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            small,
            np.exp(-v0) * dx,
            np.exp(-v0) * (-np.expm1(-b * dx)) / np.where(small, 1.0, b),
        )
    return out


@dataclass(frozen=True)
class GridPotential(Dist1D):
    """Density proportional to exp(-V) with V sampled on a strictly
    increasing grid, piecewise linear in between, linear in the tails.

    The tails must decay: the leading slope of V must be negative and the
    trailing slope positive, otherwise exp(-V) is not integrable and
    construction fails.
    """

    xs: tuple
    vs: tuple

    kind = "grid"

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(float(x) for x in self.xs))
        object.__setattr__(self, "vs", tuple(float(v) for v in self.vs))
        xs, vs = self.xs, self.vs
        if len(xs) < 3 or len(xs) != len(vs):
            raise ValueError("grid requires >= 3 nodes and matching potential values")
        if any(xs[i] >= xs[i + 1] for i in range(len(xs) - 1)):
            raise ValueError("grid must be strictly increasing")
        if not all(math.isfinite(v) for v in (*xs, *vs)):
            raise ValueError("grid nodes and potential values must be finite")
        b0 = (vs[1] - vs[0]) / (xs[1] - xs[0])
        b1 = (vs[-1] - vs[-2]) / (xs[-1] - xs[-2])
        if b0 >= 0.0 or b1 <= 0.0:
            raise ValueError(
                "non-integrable grid potential: tails do not decay "
                f"(leading slope {b0:.6g}, trailing slope {b1:.6g})"
            )

    # Shifted potential keeps every exp() in range; the shift cancels in all
    # normalized quantities and is restored in logpdf/normalization.
    @cached_property
    def _xs(self) -> np.ndarray:
        return np.asarray(self.xs, dtype=float)

    @cached_property
    def _shift(self) -> float:
        return float(min(self.vs))

    @cached_property
    def _vsh(self) -> np.ndarray:
        return np.asarray(self.vs, dtype=float) - self._shift

    @cached_property
    def _slopes(self) -> np.ndarray:
        return np.diff(self._vsh) / np.diff(self._xs)

    @cached_property
    def _cell_masses(self) -> np.ndarray:
        return _cell_mass(self._vsh[:-1], self._slopes, np.diff(self._xs))

    @cached_property
    def _tail_masses(self) -> tuple:
        left = math.exp(-self._vsh[0]) / (-self._slopes[0])
        right = math.exp(-self._vsh[-1]) / self._slopes[-1]
        return left, right

    @cached_property
    def _cum(self) -> np.ndarray:
        """Unnormalized mass up to each grid node."""
        left, _ = self._tail_masses
        return left + np.concatenate(([0.0], np.cumsum(self._cell_masses)))

    @cached_property
    def _total(self) -> float:
        _, right = self._tail_masses
        return float(self._cum[-1] + right)

    @cached_property
    def normalization(self) -> float:
        """Z = integral of exp(-V); recomputed at construction time."""
        return self._total * math.exp(-self._shift)

    @cached_property
    def _logz(self) -> float:
        return math.log(self._total) - self._shift

    def _potential(self, x):
        """Piecewise-linear V with linear tail extrapolation (unshifted)."""
        x = np.asarray(x, dtype=float)
        xs = self._xs
        core = np.interp(x, xs, np.asarray(self.vs, dtype=float))
        vleft = self.vs[0] + (self._slopes[0]) * (x - xs[0])
        vright = self.vs[-1] + (self._slopes[-1]) * (x - xs[-1])
        return np.where(x < xs[0], vleft, np.where(x > xs[-1], vright, core))

    def cdf(self, s):
        s = np.asarray(s, dtype=float)
        xs, vsh, b = self._xs, self._vsh, self._slopes
        left, _ = self._tail_masses
        idx = np.clip(np.searchsorted(xs, s, side="right") - 1, 0, len(xs) - 2)
        partial = self._cum[idx] + _cell_mass(vsh[idx], b[idx], s - xs[idx])
        with np.errstate(over="ignore"):
            low = np.exp(-vsh[0] - b[0] * (s - xs[0])) / (-b[0])
            high = self._total - np.exp(-vsh[-1] - b[-1] * (s - xs[-1])) / b[-1]
        mass = np.where(s < xs[0], low, np.where(s > xs[-1], high, partial))
        return np.clip(mass / self._total, 0.0, 1.0)

    def quantile(self, t):
        t = _validate_t(t)
        r = t * self._total
        xs, vsh, b = self._xs, self._vsh, self._slopes
        cum = self._cum
        idx = np.clip(np.searchsorted(cum, r, side="right") - 1, 0, len(xs) - 2)
        rr = r - cum[idx]
        bj = b[idx]
        arg = -rr * bj * np.exp(vsh[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.where(
                np.abs(bj) < 1e-300,
                xs[idx] + rr * np.exp(vsh[idx]),
                xs[idx] - np.log1p(np.maximum(arg, -1.0 + 1e-16)) / bj,
            )
            s_left = xs[0] + np.log(np.maximum(r, 1e-320) * (-b[0]) * np.exp(vsh[0])) / (-b[0])
            qright = np.maximum(self._total - r, 1e-320)
            s_right = xs[-1] - np.log(qright * b[-1] * np.exp(vsh[-1])) / b[-1]
        return np.where(r < cum[0], s_left, np.where(r >= cum[-1], s_right, inner))

    def logpdf(self, x):
        return -self._potential(x) - self._logz

    @cached_property
    def _second_moment(self) -> float:
        # Gauss-Legendre per cell (integrand is smooth there) + exact
        # exponential tails.
        xs, vsh, b = self._xs, self._vsh, self._slopes
        nodes, wts = np.polynomial.legendre.leggauss(24)
        lo, hi = xs[:-1], xs[1:]
        mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        vals = pts**2 * np.exp(-(vsh[:-1, None] + b[:, None] * (pts - lo[:, None])))
        core = float(np.sum(half * (vals @ wts)))
        bl, br = -b[0], b[-1]
        x0, xn = xs[0], xs[-1]
        left = math.exp(-vsh[0]) * (x0**2 / bl - 2.0 * x0 / bl**2 + 2.0 / bl**3)
        right = math.exp(-vsh[-1]) * (xn**2 / br + 2.0 * xn / br**2 + 2.0 / br**3)
        return (core + left + right) / self._total

    def second_moment(self) -> float:
        return self._second_moment

    def curvature_range(self) -> CurvatureRange:
        xs = self._xs
        vs = np.asarray(self.vs, dtype=float)
        h0 = xs[1:-1] - xs[:-2]
        h1 = xs[2:] - xs[1:-1]
        # divided-difference second derivative on a possibly nonuniform grid
        d2 = 2.0 * (vs[:-2] / (h0 * (h0 + h1)) - vs[1:-1] / (h0 * h1) + vs[2:] / (h1 * (h0 + h1)))
        i = int(np.argmin(d2))
        return CurvatureRange(float(d2[i]), float(np.max(d2)), witness=float(xs[1 + i]))

    def to_dict(self) -> dict:
        return {
            "kind": "grid",
            "xs": [float(x) for x in self.xs],
            "vs": [float(v) for v in self.vs],
        }


_KINDS = {"gaussian": Gaussian, "uniform": Uniform, "grid": GridPotential, "empirical": Empirical}

_FIELDS = {
    "gaussian": ("mean", "std"),
    "uniform": ("lo", "hi"),
    "grid": ("xs", "vs"),
    "empirical": ("atoms", "weights"),
}


def dist_to_dict(d: Dist1D) -> dict:
    return d.to_dict()


def dist_from_dict(obj: dict, path: str = "") -> Dist1D:
    """Build a law from its JSON dict; errors carry the offending JSON path."""
    from .definetti import SchemaError  # single error type for all schemas

    where = path or "$"
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    kind = obj.get("kind")
    if kind not in _KINDS:
        raise SchemaError(f"{where}.kind: expected one of {sorted(_KINDS)}, got {kind!r}")
    expected = _FIELDS[kind]
    for name in expected:
        if name not in obj:
            raise SchemaError(f"{where}.{name}: missing required field")
    extra = set(obj) - {"kind", *expected}
    if extra:
        raise SchemaError(f"{where}: unknown fields {sorted(extra)}")
    try:
        if kind == "gaussian":
            return Gaussian(float(obj["mean"]), float(obj["std"]))
        if kind == "uniform":
            return Uniform(float(obj["lo"]), float(obj["hi"]))
        if kind == "grid":
            return GridPotential(tuple(obj["xs"]), tuple(obj["vs"]))
        return Empirical(tuple(obj["atoms"]), tuple(obj["weights"]))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc
