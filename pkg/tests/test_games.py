from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuropop.games import (
    ALL_C,
    ALL_D,
    ATFT,
    IPD_STRATEGIES,
    TFT,
    MatrixGame,
    NoMixedESS,
    as_strategy,
    ess_2x2,
    hawk_dove,
    ipd_transition_matrix,
    load_game,
    mixed_payoff,
    monte_carlo_ipd_payoff,
    noisy_ipd_game,
    noisy_ipd_payoff,
    outcome_payoffs,
    save_game,
    stationary_distribution,
)

DATA = Path(__file__).parent / "data"
BASE_HD = hawk_dove(shift=0.0)


def simplex(n):
    return st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n).map(lambda v: np.array(v) / sum(v))


def test_strategy_validation():
    assert np.allclose(as_strategy([0.3, 0.5, 0.2]), [0.3, 0.5, 0.2])
    with pytest.raises(ValueError):
        as_strategy([0.5, 0.6])
    with pytest.raises(ValueError):
        as_strategy([1.2, -0.2])
    with pytest.raises(ValueError):
        as_strategy([0.5, 0.5], size=3)


def test_matrix_game_validation():
    with pytest.raises(ValueError):
        MatrixGame(("a",), [[1.0]])
    with pytest.raises(ValueError):
        MatrixGame(("a", "b"), [[1.0, 2.0]])
    with pytest.raises(ValueError):
        MatrixGame(("a", "b"), [[1.0, np.inf], [0.0, 0.0]])


class TestMixedPayoff:
    def test_hawk_vs_dove_base(self):
        assert mixed_payoff(BASE_HD, [1, 0], [0, 1]) == 50

    def test_half_half_base(self):
        # 0.25 * (-25 + 50 + 0 + 15)
        assert mixed_payoff(BASE_HD, [0.5, 0.5], [0.5, 0.5]) == pytest.approx(10.0, abs=1e-12)

    @pytest.mark.parametrize("i", range(4))
    def test_pure_against_itself(self, i):
        game = noisy_ipd_game()
        e = np.eye(4)[i]
        assert mixed_payoff(game, e, e) == game.payoff[i, i]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mixed_payoff(BASE_HD, [1, 0, 0], [0, 1])

    @given(simplex(4), simplex(4), simplex(4), st.floats(0, 1))
    def test_bilinear(self, s, s2, t, a):
        game = noisy_ipd_game()
        mix = a * s + (1 - a) * s2
        mix = mix / mix.sum()
        lhs = mixed_payoff(game, mix, t)
        rhs = a * mixed_payoff(game, s, t) + (1 - a) * mixed_payoff(game, s2, t)
        assert lhs == pytest.approx(rhs, abs=1e-9)

    @given(simplex(2), simplex(2), st.floats(-100, 100))
    def test_uniform_shift(self, s, t, c):
        shifted = BASE_HD.shifted(c)
        assert mixed_payoff(shifted, s, t) == pytest.approx(mixed_payoff(BASE_HD, s, t) + c, abs=1e-9)


class TestHawkDove:
    def test_entries(self):
        g = hawk_dove()
        assert g.entry("Hawk", "Dove") == 76
        assert g.entry("Dove", "Hawk") == 26
        assert g.payoff.tolist() == [[1, 76], [26, 41]]

    def test_ess_is_seven_twelfths(self):
        assert ess_2x2(hawk_dove()) == pytest.approx([7 / 12, 5 / 12], abs=1e-12)
        assert ess_2x2(BASE_HD) == pytest.approx([7 / 12, 5 / 12], abs=1e-12)

    @given(st.floats(-1000, 1000))
    def test_ess_shift_invariant(self, c):
        assert ess_2x2(BASE_HD.shifted(c)) == pytest.approx([7 / 12, 5 / 12], abs=1e-9)


class TestEss:
    def test_constant_game(self):
        with pytest.raises(NoMixedESS):
            ess_2x2(MatrixGame(("a", "b"), [[3, 3], [3, 3]]))

    def test_anti_coordination(self):
        assert ess_2x2(MatrixGame(("a", "b"), [[0, 1], [1, 0]])) == pytest.approx([0.5, 0.5])

    def test_dominant_strategy(self):
        with pytest.raises(NoMixedESS):
            ess_2x2(MatrixGame(("C", "D"), [[3, 0], [5, 1]]))

    def test_coordination_rest_point_is_not_stable(self):
        with pytest.raises(NoMixedESS, match="unstable"):
            ess_2x2(MatrixGame(("a", "b"), [[2, 0], [0, 1]]))

    def test_needs_two_strategies(self):
        with pytest.raises(ValueError):
            ess_2x2(noisy_ipd_game())


class TestNoisyIpd:
    def test_all_d_pair_near_punishment(self):
        assert noisy_ipd_payoff(ALL_D, ALL_D, noise=1e-6) == pytest.approx(1.0, abs=1e-4)

    def test_tft_pair_echo(self):
        v = noisy_ipd_payoff(TFT, TFT, 0.01)
        assert 1.0 < v < 3.0
        # noise sends TFT pairs through all four outcomes equally often
        assert v == pytest.approx(2.25, abs=1e-12)

    def test_hand_computed_all_d_pair(self):
        # both defect with prob 0.99 each round, independently
        e = 0.01
        expected = (1 - e) ** 2 * 1 + e * (1 - e) * 5 + e * (1 - e) * 0 + e * e * 3
        assert noisy_ipd_payoff(ALL_D, ALL_D, e) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("s1", IPD_STRATEGIES.values())
    @pytest.mark.parametrize("s2", IPD_STRATEGIES.values())
    def test_stationary_distribution(self, s1, s2):
        K = ipd_transition_matrix(s1, s2, 0.01)
        assert np.allclose(K.sum(axis=1), 1.0)
        pi = stationary_distribution(K)
        assert abs(pi.sum() - 1.0) < 1e-12
        assert np.abs(pi @ K - pi).max() < 1e-10
        assert np.all(pi > 0)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            noisy_ipd_payoff(TFT, TFT, noise=0.0)
        with pytest.raises(ValueError):
            noisy_ipd_payoff(TFT, TFT, noise=0.5)
        with pytest.raises(ValueError):
            noisy_ipd_payoff(TFT, TFT, 0.01, base_payoffs=(3, 5, 1, 0))

    def test_game_shape_and_ordering(self):
        g = noisy_ipd_game()
        assert g.names == ("All-C", "TFT", "ATFT", "All-D")
        assert g.entry("All-D", "All-C") > g.entry("All-C", "All-D")
        assert not np.allclose(g.payoff, g.payoff.T)
        assert np.all((g.payoff >= 0) & (g.payoff <= 5))

    def test_matches_golden_file(self):
        golden = load_game(DATA / "noisy_ipd_0.01.txt")
        g = noisy_ipd_game(0.01)
        assert golden.names == g.names
        assert np.allclose(golden.payoff, g.payoff, rtol=0, atol=1e-12)

    def test_golden_file_against_monte_carlo(self):
        """Every entry within 4 asymptotic standard errors of a 1e6-round simulation."""
        golden = load_game(DATA / "noisy_ipd_0.01.txt")
        strategies = list(IPD_STRATEGIES.values())
        for i, a in enumerate(strategies):
            for j, b in enumerate(strategies):
                mc = monte_carlo_ipd_payoff(a, b, 0.01, 1_000_000, seed=4 * i + j)
                se = monte_carlo_standard_error(a, b, 0.01, 1_000_000)
                assert abs(mc - golden.payoff[i, j]) < max(4 * se, 1e-3), (i, j)

    def test_opening_move_irrelevant(self):
        tft_d = TFT._replace(opening=1)
        assert noisy_ipd_payoff(tft_d, ATFT) == noisy_ipd_payoff(TFT, ATFT)


def monte_carlo_standard_error(s1, s2, noise, rounds):
    """Asymptotic standard error of the time-average payoff, from the fundamental matrix."""
    K = ipd_transition_matrix(s1, s2, noise)
    pi = stationary_distribution(K)
    f = outcome_payoffs()
    Z = np.linalg.inv(np.eye(4) - K + np.outer(np.ones(4), pi))
    fc = f - pi @ f
    var = 2 * pi @ (fc * (Z @ fc)) - pi @ (fc * fc)
    return float(np.sqrt(var / rounds))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.001, 0.2))
def test_noisy_payoffs_bounded(noise):
    g = noisy_ipd_game(noise)
    assert np.all((g.payoff >= 0) & (g.payoff <= 5))
    assert g.payoff[3, 0] > g.payoff[0, 3]


def test_text_round_trip(tmp_path):
    g = noisy_ipd_game(0.01)
    path = tmp_path / "ipd.txt"
    save_game(g, path)
    assert load_game(path) == g
    assert MatrixGame.from_text(hawk_dove().to_text()) == hawk_dove()


def test_text_rejects_ragged_rows():
    with pytest.raises(ValueError):
        MatrixGame.from_text("a,b\n1,2\n3\n")
    with pytest.raises(ValueError):
        MatrixGame.from_text("a,b\n1,x\n3,4\n")


def test_all_c_pair_mostly_reward():
    assert noisy_ipd_payoff(ALL_C, ALL_C, 0.01) == pytest.approx(0.99**2 * 3 + 0.99 * 0.01 * 5 + 0.01 * 0.01 * 1)
