import json
import math

import numpy as np
import pytest

from exot.definetti import (
    ExchangeableMixture,
    SchemaError,
    SupportError,
    classify_component,
    parse_mixture,
    project,
    sample_prefix,
    serialize_mixture,
)
from exot.dist1d import Empirical, Gaussian, Uniform

SEPARATED = ExchangeableMixture((Gaussian(-10, 1), Gaussian(10, 1)), (0.5, 0.5))


# -- construction -------------------------------------------------------------


def test_mixture_validation():
    with pytest.raises(ValueError, match="weights sum"):
        ExchangeableMixture((Gaussian(0, 1), Gaussian(1, 1)), (0.5, 0.6))
    with pytest.raises(ValueError, match="positive"):
        ExchangeableMixture((Gaussian(0, 1), Gaussian(1, 1)), (1.0, 0.0))
    with pytest.raises(ValueError):
        ExchangeableMixture((), ())


# -- project ------------------------------------------------------------------


def test_project_structure():
    single = ExchangeableMixture((Gaussian(0, 1),), (1.0,))
    blocks = project(single, 3)
    assert blocks == [(1.0, Gaussian(0, 1), 3)]
    two = ExchangeableMixture((Gaussian(0, 1), Uniform(0, 1)), (0.5, 0.5))
    blocks = project(two, 1)
    assert [b[0] for b in blocks] == [0.5, 0.5]
    assert all(b[2] == 1 for b in blocks)
    assert len(project(two, 7)) == 2  # weights preserved, one block per component


# -- sample_prefix ------------------------------------------------------------


def test_sample_prefix_point_mass():
    mix = ExchangeableMixture((Empirical((4.5,), (1.0,)),), (1.0,))
    ps = sample_prefix(mix, 4, 10, 0)
    np.testing.assert_array_equal(ps.rows, np.full((10, 4), 4.5))
    np.testing.assert_array_equal(ps.component_labels, np.zeros(10, dtype=int))


def test_sample_prefix_rows_share_component():
    # tail bound: P(any of 5 coords crosses zero) < 1e-3 per row at +-10
    ps = sample_prefix(SEPARATED, 5, 1000, 11)
    signs = np.sign(ps.rows)
    coherent = np.all(signs == signs[:, :1], axis=1)
    assert float(np.mean(coherent)) >= 0.999


def test_sample_prefix_binomial_ci():
    mix = ExchangeableMixture(
        (Empirical((0.0,), (1.0,)), Empirical((1.0,), (1.0,))), (0.3, 0.7)
    )
    ps = sample_prefix(mix, 1, 10_000, 21)
    frac = float(np.mean(ps.rows[:, 0]))
    assert abs(frac - 0.7) <= 3 * math.sqrt(0.21 / 10_000)


def test_sample_prefix_deterministic_and_prefix_stable():
    a = sample_prefix(SEPARATED, 3, 5, 9)
    b = sample_prefix(SEPARATED, 3, 10, 9)
    np.testing.assert_array_equal(a.rows, b.rows[:5])  # row i depends on (seed, i) only
    np.testing.assert_array_equal(a.component_labels, b.component_labels[:5])


def test_sample_prefix_coordinate_1_law():
    # empirical first-coordinate law approaches the flattened 1d mixture
    mix = ExchangeableMixture((Gaussian(-1, 1), Gaussian(3, 1)), (0.5, 0.5))
    ps = sample_prefix(mix, 1, 20_000, 4)
    assert float(np.mean(ps.rows)) == pytest.approx(1.0, abs=0.05)


def test_symmetric_statistics_invariant_under_row_permutation():
    ps = sample_prefix(SEPARATED, 6, 50, 2)
    g = np.random.default_rng(0)
    for row in ps.rows[:10]:
        perm = g.permutation(6)
        assert math.fsum(sorted(row.tolist())) == math.fsum(sorted(row[perm].tolist()))
        np.testing.assert_array_equal(np.sort(row), np.sort(row[perm]))


# -- classify_component -------------------------------------------------------


def test_classify_single_component():
    mix = ExchangeableMixture((Gaussian(0, 1),), (1.0,))
    assert classify_component(mix, [0.2, -5.0, 3.0]) == 0


def test_classify_well_separated():
    # Chernoff misclassification < 1e-6 at n = 20: all 1000 rows correct
    ps = sample_prefix(SEPARATED, 20, 1000, 31)
    pred = np.array([classify_component(SEPARATED, row) for row in ps.rows])
    np.testing.assert_array_equal(pred, ps.component_labels)


def test_classify_tie_breaks_to_smallest_index():
    dup = ExchangeableMixture((Gaussian(0, 1), Gaussian(0, 1)), (0.5, 0.5))
    assert classify_component(dup, [0.1, -0.7, 2.0]) == 0


def test_classify_permutation_invariant_bitwise():
    mix = ExchangeableMixture((Gaussian(-1, 1), Gaussian(1, 1)), (0.5, 0.5))
    g = np.random.default_rng(5)
    rows = sample_prefix(mix, 7, 50, 12).rows
    for row in rows:
        k = classify_component(mix, row)
        for _ in range(3):
            assert classify_component(mix, row[g.permutation(7)]) == k


def test_classify_outside_all_supports():
    mix = ExchangeableMixture((Uniform(0, 1), Uniform(2, 3)), (0.5, 0.5))
    with pytest.raises(SupportError, match="outside all supports"):
        classify_component(mix, [0.5, 2.5])  # straddles both supports


def test_classify_accuracy_monotone_in_n():
    mix = ExchangeableMixture((Gaussian(-2, 1), Gaussian(2, 1)), (0.5, 0.5))
    rates = []
    for n in (1, 2, 4, 8, 16):
        ps = sample_prefix(mix, n, 10_000, 77)
        pred = np.array([classify_component(mix, row) for row in ps.rows])
        rates.append(float(np.mean(pred != ps.component_labels)))
    assert all(r1 >= r2 for r1, r2 in zip(rates, rates[1:]))
    assert rates[0] > 0  # n = 1 actually misclassifies at this separation


# -- JSON schema ---------------------------------------------------------------


def test_parse_single_component():
    mix = parse_mixture('{"weights":[1.0],"components":[{"kind":"gaussian","mean":0,"std":1}]}')
    assert mix.components == (Gaussian(0.0, 1.0),)


def test_parse_rejects_bad_weight_sum():
    doc = {"weights": [0.5, 0.6], "components": [{"kind": "gaussian", "mean": 0, "std": 1}] * 2}
    with pytest.raises(SchemaError, match="weights sum 1.1"):
        parse_mixture(json.dumps(doc))


def test_parse_error_paths():
    with pytest.raises(SchemaError, match=r"\$\.components\[1\]\.kind"):
        parse_mixture(
            '{"weights":[0.5,0.5],"components":'
            '[{"kind":"gaussian","mean":0,"std":1},{"kind":"nope"}]}'
        )
    with pytest.raises(SchemaError, match=r"\$\.weights"):
        parse_mixture('{"components":[{"kind":"gaussian","mean":0,"std":1}]}')
    with pytest.raises(SchemaError, match="invalid JSON"):
        parse_mixture("{nope")
    with pytest.raises(SchemaError, match="length"):
        parse_mixture('{"weights":[1.0],"components":[]}')


def test_round_trip_is_byte_identical():
    doc = {
        "weights": [0.25, 0.5, 0.25],
        "components": [
            {"kind": "gaussian", "mean": 0, "std": 1},
            {"kind": "uniform", "lo": -1, "hi": 2},
            {"kind": "empirical", "atoms": [0, 1], "weights": [0.5, 0.5]},
        ],
    }
    first = serialize_mixture(parse_mixture(json.dumps(doc)))
    second = serialize_mixture(parse_mixture(first))
    assert first == second


def test_prefix_sample_csv_layout():
    ps = sample_prefix(SEPARATED, 3, 2, 1)
    lines = ps.to_csv().splitlines()
    assert lines[0] == "row,coord_1,coord_2,coord_3,label"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "0" and first[-1] in {"0", "1"}
