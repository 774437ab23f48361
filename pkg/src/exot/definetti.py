"""Finite de Finetti mixtures of countable powers.

An exchangeable measure on sequence space is represented by its mixing
measure restricted to finite support: components m_1..m_k (one-dimensional
laws) and positive weights summing to one stand for sum_k w_k * m_k^infinity.
Sampling draws one component per sequence and then i.i.d. coordinates;
classification recovers the component of a finite prefix by log-likelihood,
which is the finite-sample shadow of the fact that exchangeable functions
are almost surely constant on each fiber.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dist1d import Dist1D, dist_from_dict, WEIGHT_TOL, _U_FLOOR
from .seeding import rng, seed_sequence

__all__ = [
    "ExchangeableMixture",
    "PrefixSample",
    "SchemaError",
    "SupportError",
    "project",
    "sample_prefix",
    "classify_component",
    "parse_mixture",
    "serialize_mixture",
]


class SchemaError(ValueError):
    """A document violates the mixture/distribution JSON schema."""


class SupportError(ValueError):
    """A data row lies outside the support of every component."""


@dataclass(frozen=True)
class ExchangeableMixture:
    components: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.components) < 1 or len(self.components) != len(self.weights):
            raise ValueError("mixture requires matching nonempty components/weights")
        if not all(isinstance(c, Dist1D) for c in self.components):
            raise ValueError("mixture components must be Dist1D laws")
        if any(w <= 0.0 for w in self.weights):
            raise ValueError("mixture weights must be positive")
        total = sum(self.weights)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum {total:.12g}")

    def __len__(self) -> int:
        return len(self.components)

    @cached_property
    def _cumw(self) -> np.ndarray:
        c = np.cumsum(np.asarray(self.weights, dtype=float))
        c[-1] = 1.0
        return c

    @cached_property
    def _logw(self) -> np.ndarray:
        return np.log(np.asarray(self.weights, dtype=float))

    def second_moments(self) -> list:
        return [c.second_moment() for c in self.components]


@dataclass(frozen=True)
class PrefixSample:
    """`count` independent rows of an n-coordinate prefix.

    Ground-truth component indices are retained for diagnostics only and
    must never feed a solver path.
    """

    n: int
    rows: np.ndarray
    component_labels: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", *[f"coord_{j}" for j in range(1, self.n + 1)], "label"])
        for i, (row, lab) in enumerate(zip(self.rows, self.component_labels)):
            w.writerow([i, *[repr(float(x)) for x in row], int(lab)])
        return buf.getvalue()


def project(mix: ExchangeableMixture, n: int) -> list:
    """Symbolic n-coordinate projection: blocks (weight, component, n).

    The projection of sum_k w_k m_k^infinity onto the first n coordinates is
    the product mixture sum_k w_k m_k^{(x)n}; no numeric work happens here.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return [(w, c, n) for w, c in zip(mix.weights, mix.components)]


def sample_prefix(mix: ExchangeableMixture, n: int, count: int, seed) -> PrefixSample:
    """Draw `count` rows: one component per row, then n i.i.d. coordinates.

    Row i consumes the substream (seed, i), so rows are reproducible
    independently of `count` and safe to generate in parallel.
    """
    if n < 1 or count < 1:
        raise ValueError("n and count must be >= 1")
    rows = np.empty((count, n), dtype=float)
    labels = np.empty(count, dtype=int)
    # keyed substreams rather than stateful spawn(): row i depends only on
    # (seed, i), so repeated calls under one seed see identical streams
    for i in range(count):
        g = np.random.Generator(np.random.PCG64(seed_sequence(seed, i)))
        u = g.random(n + 1)
        k = int(np.searchsorted(mix._cumw, u[0], side="right"))
        labels[i] = k
        rows[i] = mix.components[k].quantile(np.maximum(u[1:], _U_FLOOR))
    return PrefixSample(n=n, rows=rows, component_labels=labels)


def classify_component(mix: ExchangeableMixture, row) -> int:
    """Maximum-likelihood component of a prefix row.

    Scores sum_i log density_k(row_i) + log w_k; ties resolve to the
    smallest index. Per-component sums use exact (fsum) accumulation so the
    result is invariant under coordinate permutations, bit for bit.
    """
    row = np.asarray(row, dtype=float)
    if row.ndim != 1 or row.size < 1:
        raise ValueError("row must be a nonempty 1-d vector")
    best_k, best_score = -1, -math.inf
    for k, comp in enumerate(mix.components):
        ll = np.asarray(comp.logpdf(row), dtype=float)
        if np.any(np.isneginf(ll)):
            continue
        score = math.fsum(ll.tolist()) + float(mix._logw[k])
        if score > best_score:
            best_k, best_score = k, score
    if best_k < 0:
        raise SupportError("row outside all supports")
    return best_k


# -- JSON schema -----------------------------------------------------------


def parse_mixture(text) -> ExchangeableMixture:
    """Parse {"weights": [...], "components": [...]} into a mixture.

    Weights must sum to 1 within 1e-12; there is no silent renormalization.
    Schema violations carry the JSON path of the offending element.
    """
    if isinstance(text, (str, bytes)):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"$: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    else:
        obj = text
    if not isinstance(obj, dict):
        raise SchemaError("$: expected an object")
    for name in ("weights", "components"):
        if name not in obj:
            raise SchemaError(f"$.{name}: missing required field")
    extra = set(obj) - {"weights", "components"}
    if extra:
        raise SchemaError(f"$: unknown fields {sorted(extra)}")
    weights = obj["weights"]
    comps = obj["components"]
    if not isinstance(weights, list) or not all(isinstance(w, (int, float)) for w in weights):
        raise SchemaError("$.weights: expected a list of numbers")
    if not isinstance(comps, list):
        raise SchemaError("$.components: expected a list")
    if len(weights) != len(comps):
        raise SchemaError(
            f"$.components: length {len(comps)} does not match {len(weights)} weights"
        )
    if any(w <= 0 for w in weights):
        raise SchemaError("$.weights: weights must be positive")
    total = math.fsum(float(w) for w in weights)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise SchemaError(f"$.weights: weights sum {total:.12g}")
    parsed = [dist_from_dict(c, path=f"$.components[{i}]") for i, c in enumerate(comps)]
    return ExchangeableMixture(tuple(parsed), tuple(float(w) for w in weights))


def serialize_mixture(mix: ExchangeableMixture) -> str:
    """Canonical JSON text; serialize(parse(x)) is idempotent byte for byte."""
    obj = {
        "weights": [float(w) for w in mix.weights],
        "components": [c.to_dict() for c in mix.components],
    }
    return json.dumps(obj, indent=2) + "\n"
