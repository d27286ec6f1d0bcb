import json

import numpy as np
import pytest

from bellforge import (
    BellFunctional,
    DeterministicStrategy,
    ProbabilityTable,
    Scenario,
    ScenarioMismatchError,
    UndefinedRatioError,
    build_bell,
    build_povms,
    build_state,
    check_nonsignalling,
    chsh_game,
    classical_value_exact,
    deterministic_prob,
    functional_from_json,
    functional_to_json,
    gen_signs,
    identity_povm,
    pair,
    quantum_prob_pure,
    table_from_json,
    table_to_json,
    zeta1,
)


def uniform_table(scenario):
    k = scenario.n_outputs
    return ProbabilityTable(scenario, np.full(scenario.shape, 1.0 / k**2))


def construction_pair(n, seed, alpha_top=None):
    signs = gen_signs(n, seed)
    functional = build_bell(signs)
    povm = build_povms(signs, 2.0 * max(np.linalg.norm(signs.eps[x] / np.sqrt(n), 2) for x in range(n)) ** 2)
    if alpha_top is None:
        alpha_top = 1.0 / np.sqrt(2.0)
    state = build_state(alpha_top=alpha_top, n=n)
    return functional, povm, state


class TestPair:
    def test_chsh_uniform(self):
        m = chsh_game()
        assert pair(m, uniform_table(m.scenario)) == pytest.approx(0.5, abs=1e-15)

    def test_zero_functional(self):
        scenario = Scenario(2, 2)
        m = BellFunctional(scenario, np.zeros(scenario.shape))
        assert pair(m, uniform_table(scenario)) == 0.0

    def test_construction_deterministic(self):
        # n=1 functional has the single coefficient 1 at (x,y,a,b)=(0,0,0,0)
        signs = gen_signs(1, 0)
        m = build_bell(signs)
        strat = DeterministicStrategy(m.scenario, (0,))
        assert pair(m, deterministic_prob(strat, strat)) == pytest.approx(1.0)

    def test_scenario_mismatch(self):
        m = chsh_game()
        other = uniform_table(Scenario(2, 3))
        with pytest.raises(ScenarioMismatchError):
            pair(m, other)

    def test_bilinearity(self):
        rng = np.random.default_rng(0)
        scenario = Scenario(2, 2)
        m = BellFunctional(scenario, rng.standard_normal(scenario.shape))
        p1 = uniform_table(scenario)
        raw = rng.random(scenario.shape)
        raw /= raw.sum(axis=(2, 3), keepdims=True)
        p2 = ProbabilityTable(scenario, raw)
        for lam in (0.0, 0.3, 0.8, 1.0):
            mix = ProbabilityTable(scenario, lam * p1.p + (1 - lam) * p2.p)
            expected = lam * pair(m, p1) + (1 - lam) * pair(m, p2)
            assert pair(m, mix) == pytest.approx(expected, abs=1e-12)


class TestNonSignalling:
    def test_product_deterministic(self):
        scenario = Scenario(2, 2)
        sa = DeterministicStrategy(scenario, (0, 1))
        sb = DeterministicStrategy(scenario, (1, 0))
        ok, residual = check_nonsignalling(deterministic_prob(sa, sb))
        assert ok
        assert residual == 0.0

    def test_constructed_violation(self):
        scenario = Scenario(2, 2)
        p = np.full(scenario.shape, 0.25)
        # shift Alice's marginal for x=0 depending on y
        p[0, 1, 0, :] += 0.05
        p[0, 1, 1, :] -= 0.05
        ok, residual = check_nonsignalling(ProbabilityTable(scenario, p))
        assert not ok
        assert residual == pytest.approx(0.1, abs=1e-12)

    def test_quantum_tables_nonsignalling(self):
        functional, povm, state = construction_pair(4, 3)
        table = quantum_prob_pure(povm, povm, state)
        ok, residual = check_nonsignalling(table, tol=1e-10)
        assert ok, residual


class TestQuantumProbPure:
    def test_single_outcome_identity(self):
        state = build_state(maximally_entangled=3)
        table = quantum_prob_pure(identity_povm(2, 3), identity_povm(2, 3), state)
        assert np.allclose(table.p, 1.0)

    def test_hand_contraction_n1(self):
        functional, povm, state = construction_pair(1, 0, alpha_top=1.0 / np.sqrt(2.0))
        table = quantum_prob_pure(povm, povm, state)
        signum = float(gen_signs(1, 0).eps.ravel()[0])
        assert signum in (-1.0, 1.0)
        # P(0,0|0,0) = (alpha_1 + alpha_2)^2 / 4 = 1/2 for either sign
        assert table.p[0, 0, 0, 0] == pytest.approx(0.5, abs=1e-12)

    def test_product_state_factorizes(self):
        functional, povm, state = construction_pair(3, 1, alpha_top=1.0)
        table = quantum_prob_pure(povm, povm, state)
        e = povm.elements
        expected = np.einsum("xa,yb->xyab", e[:, :, 0, 0], e[:, :, 0, 0])
        assert np.max(np.abs(table.p - expected)) <= 1e-12

    def test_completeness_sums(self):
        functional, povm, state = construction_pair(5, 2)
        table = quantum_prob_pure(povm, povm, state)
        sums = table.p.sum(axis=(2, 3))
        assert np.max(np.abs(sums - 1.0)) <= 1e-10

    def test_dimension_mismatch(self):
        _, povm, _ = construction_pair(2, 0)
        with pytest.raises(ScenarioMismatchError):
            quantum_prob_pure(povm, povm, build_state(maximally_entangled=5))


class TestDeterministicProb:
    def test_single_cell(self):
        scenario = Scenario(1, 1)
        s = DeterministicStrategy(scenario, (0,))
        table = deterministic_prob(s, s)
        assert table.p.shape == (1, 1, 1, 1)
        assert table.p[0, 0, 0, 0] == 1.0

    def test_always_nonsignalling(self):
        rng = np.random.default_rng(1)
        scenario = Scenario(3, 4)
        for _ in range(10):
            sa = DeterministicStrategy(scenario, tuple(rng.integers(0, 4, 3)))
            sb = DeterministicStrategy(scenario, tuple(rng.integers(0, 4, 3)))
            ok, residual = check_nonsignalling(deterministic_prob(sa, sb))
            assert ok and residual == 0.0


class TestZeta1:
    def test_plain_ratio(self):
        m = chsh_game()
        assert zeta1(m, 2.0, 1.0) == 2.0

    def test_chsh_value(self):
        m = chsh_game()
        assert zeta1(m, 0.85355339, 0.75) == pytest.approx(1.13807, abs=1e-4)

    def test_zero_numerator(self):
        assert zeta1(chsh_game(), 0.0, 0.5) == 0.0

    def test_degenerate_denominator(self):
        with pytest.raises(UndefinedRatioError):
            zeta1(chsh_game(), 1.0, 0.0)


class TestBandWidth:
    def test_construction_width_comparison(self):
        # the all-(n+1) outputs strategy pairs to zero against the padded
        # functional, so max/min width and the absolute value are comparable
        for seed in range(5):
            signs = gen_signs(3, seed)
            m = build_bell(signs)
            last = m.scenario.n_outputs - 1
            p0 = deterministic_prob(
                DeterministicStrategy(m.scenario, (last,) * 3),
                DeterministicStrategy(m.scenario, (last,) * 3),
            )
            assert pair(m, p0) == 0.0
            result = classical_value_exact(m)
            width = result.max_value - result.min_value
            c_abs = result.value
            assert c_abs <= width + 1e-12
            assert width <= 2.0 * c_abs + 1e-12


class TestJson:
    def test_functional_round_trip(self):
        m = chsh_game()
        again = functional_from_json(functional_to_json(m))
        assert again.scenario == m.scenario
        assert np.array_equal(again.coeffs, m.coeffs)

    def test_table_round_trip(self):
        scenario = Scenario(2, 2)
        table = uniform_table(scenario)
        again = table_from_json(table_to_json(table))
        assert np.array_equal(again.p, table.p)

    def test_malformed(self):
        with pytest.raises(ValueError):
            functional_from_json(json.dumps({"n_inputs": 2}))

    def test_table_invariants(self):
        scenario = Scenario(1, 2)
        with pytest.raises(ValueError):
            ProbabilityTable(scenario, np.full(scenario.shape, 0.3))
        with pytest.raises(ValueError):
            ProbabilityTable(scenario, np.array([[[[1.5, -0.5], [0.0, 0.0]]]]))
