"""
Tests for the correlation coefficients.
"""

import itertools

import numpy as np
import pytest

from apps.core.exceptions import DimensionError, ParameterError, UndefinedStatisticError
from apps.metrics.correlation import correlations, kendall, pearson, spearman


def brute_force_tau_b(x, y):
    concordant = discordant = ties_x = ties_y = 0
    for i, j in itertools.combinations(range(len(x)), 2):
        dx, dy = np.sign(x[i] - x[j]), np.sign(y[i] - y[j])
        if dx == 0 and dy == 0:
            continue
        if dx == 0:
            ties_x += 1
        elif dy == 0:
            ties_y += 1
        elif dx == dy:
            concordant += 1
        else:
            discordant += 1
    return (concordant - discordant) / np.sqrt(
        (concordant + discordant + ties_x) * (concordant + discordant + ties_y)
    )


def test_linear_relation_is_perfect():
    x = np.arange(10, dtype=float)
    result = correlations(x, 2 * x + 1)
    assert result.pearson == pytest.approx(1.0)
    assert result.spearman == pytest.approx(1.0)
    assert result.kendall == pytest.approx(1.0)


def test_monotone_decreasing_cubic():
    x = np.array([-3.0, -1.0, 0.0, 0.5, 2.0, 4.0])
    result = correlations(x, -x ** 3)
    assert -1.0 < result.pearson < 0.0
    assert result.spearman == pytest.approx(-1.0)
    assert result.kendall == pytest.approx(-1.0)


@pytest.mark.parametrize('seed', range(30))
def test_kendall_matches_pair_enumeration_with_ties(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    x = rng.integers(0, 3, size=n).astype(float)
    y = rng.integers(0, 3, size=n).astype(float)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        pytest.skip('constant draw')
    assert kendall(x, y) == pytest.approx(brute_force_tau_b(x, y), abs=1e-12)


def test_spearman_uses_average_ranks():
    x = [1.0, 2.0, 2.0, 3.0]
    y = [1.0, 2.0, 3.0, 4.0]
    ranks = np.array([1.0, 2.5, 2.5, 4.0])
    expected = np.corrcoef(ranks, [1, 2, 3, 4])[0, 1]
    assert spearman(x, y) == pytest.approx(expected, abs=1e-12)


def test_invariance_under_increasing_transforms():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=40), rng.normal(size=40)
    base = correlations(x, y)
    affine = correlations(3 * x + 2, 0.5 * y - 1)
    assert affine.pearson == pytest.approx(base.pearson, abs=1e-12)
    monotone = correlations(np.exp(x), y ** 3)
    assert monotone.spearman == pytest.approx(base.spearman, abs=1e-12)
    assert monotone.kendall == pytest.approx(base.kendall, abs=1e-12)


def test_all_coefficients_are_bounded():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x, y = rng.normal(size=15), rng.normal(size=15)
        assert all(-1.0 <= value <= 1.0 for value in correlations(x, y).to_dict().values())


def test_constant_input():
    with pytest.raises(UndefinedStatisticError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(UndefinedStatisticError):
        correlations([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])
    lenient = correlations([1.0, 2.0, 3.0], [4.0, 4.0, 4.0], strict=False)
    assert lenient.to_dict() == {'pearson': None, 'spearman': None, 'kendall': None}


def test_input_validation():
    with pytest.raises(DimensionError):
        pearson([1.0, 2.0], [1.0])
    with pytest.raises(ParameterError):
        kendall([1.0], [2.0])
