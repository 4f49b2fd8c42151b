import math

import numpy as np
import pytest

from spectrum_queue import DomainError, SolveError, analytic, oracle

KAPPA = 0.8960874361700335


def test_generator_structure(base):
    gen = oracle.build_generator(base, 1.0, 400)
    q = gen.dense()
    assert q.shape == (402, 402)
    assert np.all(np.abs(q.sum(axis=1)) < 1e-12)
    off = q - np.diag(np.diag(q))
    assert np.all(off >= 0)
    # PU state only returns to an empty serving system
    assert np.flatnonzero(off[0]).tolist() == [1]
    assert off[0, 1] == base.eta
    for n in (0, 1, 200, 399):
        i = 1 + n
        assert off[i, i + 1] == pytest.approx(7.0)
        assert off[i, 0] == base.xi
        if n >= 1:
            assert off[i, i - 1] == base.mu
    # last level cannot grow
    assert off[401, 0] == base.xi and off[401, 400] == base.mu
    assert np.count_nonzero(off[401]) == 2


def test_generator_without_joiners(base):
    gen = oracle.build_generator(base, 0.0, 50)
    pi = oracle.solve_stationary(gen)
    assert pi[0] == pytest.approx(base.xi / (base.eta + base.xi), abs=1e-14)
    assert pi[1] == pytest.approx(base.eta / (base.eta + base.xi), abs=1e-14)
    assert np.all(pi[2:] == 0)


def test_truncation_floor(base):
    with pytest.raises(DomainError):
        oracle.build_generator(base, 1.0, 49)
    assert oracle.truncation_for(base, 0.0) == 50
    assert oracle.truncation_for(base, 1.0) == math.ceil(math.log(1e-12) / math.log(KAPPA))


def test_solve_matches_closed_form(base):
    pi = oracle.stationary_vector(base, 1.0, 400)
    assert abs(pi.sum() - 1) < 1e-12
    assert pi[0] == pytest.approx(0.2, abs=1e-10)
    gen = oracle.build_generator(base, 1.0, 400)
    assert np.abs(gen.entries.T @ pi).max() < 1e-10
    d = analytic.stationary(base, 1.0)
    closed = np.array([d.p00] + [d.level_prob(n) for n in range(401)])
    assert np.abs(closed - pi).max() < 1e-8


def test_level_ratio_tends_to_root(base):
    pi = oracle.stationary_vector(base, 1.0, 400)
    for n in (20, 50, 100):
        assert pi[1 + n] / pi[n] == pytest.approx(KAPPA, abs=1e-9)


def test_singular_system_reported():
    gen = oracle.GeneratorMatrix(50, oracle.sp.csr_matrix(np.zeros((52, 52))))
    with pytest.raises(SolveError):
        oracle.solve_stationary(gen)


def test_series_and_vector_welfare(base):
    pi = oracle.stationary_vector(base, 1.0)
    assert oracle.welfare_from_vector(base, pi) == pytest.approx(analytic.social_welfare(base, 1.0), abs=1e-9)
    assert oracle.profit_join_series(base, 1.0) == pytest.approx(analytic.profit_join(base, 1.0), abs=1e-9)


@pytest.mark.parametrize("reward, expected", [(3.0, 7 / 12), (0.5, 0.0), (10.0, 1.0)])
def test_numeric_equilibrium(base, reward, expected):
    assert oracle.numeric_equilibrium(base.replace(reward=reward)) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("reward, expected", [(3.0, 0.30663522991524655), (0.5, 0.0), (70.0, 1.0)])
def test_numeric_social_optimum(base, reward, expected):
    assert oracle.numeric_social_optimum(base.replace(reward=reward)) == pytest.approx(expected, abs=1e-7)


def test_numeric_price(base):
    assert oracle.numeric_price(base) == pytest.approx(3 - math.sqrt(2), abs=1e-7)
    assert oracle.numeric_price(base.replace(reward=0.5)) is None


def test_bisection_and_golden_section():
    assert oracle.bisect_decreasing(lambda x: 2.0 - x, 0.0, 5.0, tol=1e-12) == pytest.approx(2.0, abs=1e-11)
    assert oracle.golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0) == pytest.approx(0.3, abs=1e-9)


def test_unimodality_guard():
    with pytest.raises(SolveError):
        oracle._check_unimodal(np.array([0.0, 1.0, 0.5, 0.8]))
    oracle._check_unimodal(np.array([0.0, 1.0, 0.5, 0.2]))


def test_oracle_matches_closed_forms_on_random_draws(random_draws):
    for p in random_draws:
        for q in (0.5, 1.0):
            pi = oracle.stationary_vector(p, q)
            d = analytic.stationary(p, q)
            closed = np.array([d.p00] + [d.level_prob(n) for n in range(pi.size - 1)])
            assert np.abs(closed - pi).max() < 1e-7
        assert abs(oracle.numeric_equilibrium(p) - analytic.individual_equilibrium(p).q_star) < 1e-6
        assert abs(oracle.numeric_social_optimum(p) - analytic.social_optimum(p).q_star) < 1e-6
