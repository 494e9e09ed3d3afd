import numpy as np
import pytest

from oracles import brute_min_assignment_cost

from asdrkit.assignment import Assignment, brute_force, solve_min_cost


class TestSolve:
    def test_one_by_one(self):
        assert solve_min_cost([[0.0]]) == Assignment(((0, 0),), 0.0)

    def test_symmetric_diagonal(self):
        result = solve_min_cost([[1, 2], [2, 1]])
        assert result.pairs == ((0, 0), (1, 1))
        assert result.total_cost == 2.0

    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError):
            solve_min_cost([[np.nan, 1], [1, 0]])
        with pytest.raises(ValueError):
            solve_min_cost([[np.inf, 1], [1, 0]])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            solve_min_cost(np.empty((0, 3)))

    def test_rectangular_matches_smaller_side(self):
        result = solve_min_cost([[1, 9, 9], [9, 1, 9]])
        assert result.pairs == ((0, 0), (1, 1))
        assert result.total_cost == 2.0
        tall = solve_min_cost(np.array([[1, 9, 9], [9, 1, 9]]).T)
        assert tall.total_cost == 2.0
        assert tall.pairs == ((0, 0), (1, 1))


class TestBruteForce:
    def test_single(self):
        assert brute_force([[5.0]]).total_cost == 5.0

    def test_swap(self):
        assert brute_force([[0, 1], [1, 0]]).total_cost == 0.0

    def test_rectangular_dummy_padding(self):
        result = brute_force([[1, 9, 9], [9, 1, 9]])
        assert result.pairs == ((0, 0), (1, 1))
        assert result.total_cost == 2.0

    def test_size_bound(self):
        with pytest.raises(ValueError, match="brute force limited"):
            brute_force(np.zeros((11, 11)))


class TestAgainstOracles:
    def test_random_square_vs_brute(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            n = int(rng.integers(1, 8))
            costs = rng.integers(-50, 50, size=(n, n)).astype(float)
            assert solve_min_cost(costs).total_cost == brute_force(costs).total_cost

    def test_random_rectangular_vs_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 6))
            costs = rng.integers(-30, 30, size=(n, m)).astype(float)
            expected = brute_min_assignment_cost(costs)
            assert solve_min_cost(costs).total_cost == expected
            assert brute_force(costs).total_cost == expected

    def test_row_constant_shift(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(2, 7))
            costs = rng.integers(0, 40, size=(n, n)).astype(float)
            shifted = costs.copy()
            shifted[1] += 13.0
            assert (
                solve_min_cost(shifted).total_cost
                == solve_min_cost(costs).total_cost + 13.0
            )

    def test_transpose(self):
        # continuous costs keep the optimum unique, so the pairing itself
        # must transpose, not just the cost
        rng = np.random.default_rng(5)
        for _ in range(30):
            n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
            costs = rng.normal(size=(n, m))
            direct = solve_min_cost(costs)
            swapped = solve_min_cost(np.ascontiguousarray(costs.T))
            assert direct.total_cost == pytest.approx(swapped.total_cost, rel=1e-12)
            assert {(j, i) for i, j in direct.pairs} == set(swapped.pairs)

    def test_valid_matching_shape(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            n, m = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            costs = rng.normal(size=(n, m))
            result = solve_min_cost(costs)
            rows = [i for i, _ in result.pairs]
            cols = [j for _, j in result.pairs]
            assert len(result.pairs) == min(n, m)
            assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
            assert result.total_cost == pytest.approx(
                sum(costs[i, j] for i, j in result.pairs)
            )
