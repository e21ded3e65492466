"""
Minimum-cost bipartite assignment.

Cost matrices are dense; an entry of +inf forbids that pairing. Both solvers return
a maximum-cardinality pairing over the finite cells which, among those, has minimum
total cost. Which of several equal-cost optima is returned is unspecified.
"""

import itertools
from typing import Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from herdwatch.common.errors import MalformedInputError
from herdwatch.common.type_aliases import Pairs

BRUTE_FORCE_MAX_DIM = 8


def _check_costs(costs) -> np.ndarray:
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 2:
        if costs.size == 0:
            return costs.reshape(0, 0)
        raise MalformedInputError(f"Cost matrix must be 2-D, got shape {costs.shape}")
    if np.isnan(costs).any() or np.isneginf(costs).any():
        raise MalformedInputError("Cost matrix entries must be finite or +inf")
    return costs


def solve_min_cost(costs) -> Tuple[Pairs, float]:
    """
    Hungarian solve of a (possibly rectangular) cost matrix with +inf sentinels.

    Sentinel cells are replaced by a penalty larger than the spread of any two
    assignments' finite costs, so the solver first minimises the number of forbidden
    pairs it is forced to use and only then the finite cost. Forbidden pairs are
    dropped from the result.

    :param costs: (rows, cols) matrix of finite costs or +inf
    :return: list of (row, col) pairs and their total cost
    """
    costs = _check_costs(costs)
    if costs.size == 0:
        return [], 0.0

    finite = np.isfinite(costs)
    if not finite.any():
        return [], 0.0
    penalty = 2.0 * np.abs(costs[finite]).sum() + 1.0
    padded = np.where(finite, costs, penalty)

    rows, cols = linear_sum_assignment(padded)
    pairs = [(int(r), int(c)) for r, c in zip(rows, cols) if finite[r, c]]
    total = float(sum(costs[r, c] for r, c in pairs))
    return sorted(pairs), total


def brute_force_min_cost(costs) -> Tuple[Pairs, float]:
    """
    Exhaustive oracle with the same contract as `solve_min_cost`, for testing.

    :param costs: (rows, cols) matrix with max(rows, cols) <= 8
    :return: list of (row, col) pairs and their total cost
    """
    costs = _check_costs(costs)
    if max(costs.shape) > BRUTE_FORCE_MAX_DIM:
        raise ValueError(
            f"Brute force is limited to {BRUTE_FORCE_MAX_DIM} rows/cols, got {costs.shape}"
        )
    if costs.size == 0:
        return [], 0.0

    transposed = costs.shape[0] > costs.shape[1]
    matrix = costs.T if transposed else costs
    n_rows, n_cols = matrix.shape

    best_key = (1, 0.0)
    best_pairs: Pairs = []
    for cols in itertools.permutations(range(n_cols), n_rows):
        pairs = [(r, c) for r, c in enumerate(cols) if np.isfinite(matrix[r, c])]
        key = (-len(pairs), float(sum(matrix[r, c] for r, c in pairs)))
        if key < best_key:
            best_key = key
            best_pairs = pairs

    if transposed:
        best_pairs = [(c, r) for r, c in best_pairs]
    return sorted(best_pairs), best_key[1]
