from fractions import Fraction

import numpy as np
import pytest

from partshap.errors import TooManyPlayers
from partshap.testkit import (
    oracle_shapley_permutation,
    oracle_shapley_table,
    random_table_game,
)


def additive_game(weights):
    def value(bits):
        return sum(w for i, w in enumerate(weights) if bits >> i & 1)

    return value


def test_additive_game():
    assert oracle_shapley_permutation(additive_game([5.0, -3.0]), 2) == [5.0, -3.0]


def test_two_player_superadditive_game():
    # orderings (0,1): marginals 1 then 3; (1,0): 3 then 1 -> both average 2
    game = {0b00: 0.0, 0b01: 1.0, 0b10: 1.0, 0b11: 4.0}
    assert oracle_shapley_permutation(game, 2) == [2.0, 2.0]


def test_dummy_player_appended():
    rng = np.random.default_rng(5)
    base = {bits: float(rng.uniform(-10, 10)) for bits in range(4)}
    base_values = oracle_shapley_permutation(base, 2)

    def extended(bits):  # part 2 never changes the value
        return base[bits & 0b11]

    values = oracle_shapley_permutation(extended, 3)
    assert values[2] == 0.0
    assert values[:2] == pytest.approx(base_values, abs=1e-15)


def test_rejects_too_many_players():
    with pytest.raises(TooManyPlayers):
        oracle_shapley_permutation(lambda bits: 0.0, 11)
    with pytest.raises(TooManyPlayers):
        oracle_shapley_permutation(lambda bits: 0.0, 0)


def test_exact_rational_accumulation():
    # a symmetric game: each player gets exactly half the grand value, and the
    # halving happens in rational space so no bit of the input float is lost
    game = {0b00: 0.0, 0b01: 1 / 3, 0b10: 1 / 3, 0b11: 2 / 3}
    values = oracle_shapley_permutation(game, 2)
    assert values[0] == values[1]
    assert values[0] == float(Fraction(2 / 3) / 2)
    assert sum(Fraction(v) for v in values) == Fraction(2 / 3)


def test_efficiency_of_oracle_on_random_games():
    rng = np.random.default_rng(17)
    for k in range(1, 6):
        game = {bits: float(rng.uniform(-10, 10)) for bits in range(1 << k)}
        values = oracle_shapley_permutation(game, k)
        total = sum(Fraction(v) for v in values)
        gap = Fraction(game[(1 << k) - 1]) - Fraction(game[0])
        assert abs(float(total - gap)) <= 1e-12


def test_table_oracle_runs_per_class():
    rng = np.random.default_rng(23)
    table = random_table_game(rng, 3, 2)
    out = oracle_shapley_table(table, 3)
    assert out.shape == (3, 2)
    for c in range(2):
        column = oracle_shapley_permutation(
            {bits: float(v[c]) for bits, v in table.items()}, 3
        )
        assert np.array_equal(out[:, c], column)
