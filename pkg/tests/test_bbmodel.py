import math

import numpy as np
import pytest

from ctxcert.bbmodel import (
    BBPreparation,
    PureOnticState,
    bb_indicator,
    bb_meas_noncontextuality_property,
    bb_prep_contextuality_demo,
    bb_sample,
    bb_simulate,
)
from ctxcert.ontomodel import IndicatorSet, is_outcome_deterministic
from ctxcert.operational import hexagon_state_vectors, hexagon_theory
from ctxcert.qmath import Effect, Povm, born_probability, identity, pure_density


@pytest.fixture(scope="module")
def vectors():
    return hexagon_state_vectors()


@pytest.fixture(scope="module")
def antipodal_pvm(vectors):
    return Povm(
        (Effect(pure_density(vectors["a"]).matrix), Effect(pure_density(vectors["A"]).matrix))
    )


class TestPureOnticState:
    def test_canonical_phase_identifies_rays(self, vectors):
        base = PureOnticState(vectors["b"])
        rotated = PureOnticState(np.exp(1.3j) * vectors["b"])
        assert base.same_ray(rotated)
        assert np.abs(base.psi - rotated.psi).max() <= 1e-12

    def test_leading_zero_component_is_skipped(self):
        state = PureOnticState(np.array([0.0, -1.0]))
        assert state.psi[1] == 1.0

    def test_unnormalized_vectors_rejected(self):
        with pytest.raises(ValueError):
            PureOnticState(np.array([1.0, 1.0]))


class TestIndicator:
    def test_eigenstate_is_certain(self, vectors, antipodal_pvm):
        probs = bb_indicator(antipodal_pvm, PureOnticState(vectors["a"]))
        assert probs == pytest.approx([1.0, 0.0], abs=1e-15)

    def test_neighboring_state_splits_one_to_three(self, vectors, antipodal_pvm):
        probs = bb_indicator(antipodal_pvm, PureOnticState(vectors["b"]))
        assert probs == pytest.approx([0.25, 0.75], abs=1e-15)

    def test_coin_povm_is_flat_for_every_ray(self, vectors):
        coin = Povm((Effect(identity(2) / 2), Effect(identity(2) / 2)))
        for name in "aAbBcC":
            probs = bb_indicator(coin, PureOnticState(vectors[name]))
            assert probs == pytest.approx([0.5, 0.5], abs=1e-15)

    def test_matches_born_rule_exactly(self, vectors):
        theory = hexagon_theory()
        for meas in theory.measurements.values():
            for name in "aAbBcC":
                state = PureOnticState(vectors[name])
                expected = [
                    born_probability(state.density(), e) for e in meas.povm.effects
                ]
                assert bb_indicator(meas.povm, state) == pytest.approx(expected, abs=0)

    def test_off_eigenstate_grid_fails_outcome_determinism(self, vectors, antipodal_pvm):
        grid = [PureOnticState(vectors[name]) for name in "aAbBcC"]
        columns = np.column_stack([bb_indicator(antipodal_pvm, s) for s in grid])
        assert not is_outcome_deterministic(IndicatorSet(columns))

    def test_dimension_checked(self):
        qutrit = Povm((Effect(identity(3)),))
        with pytest.raises(ValueError):
            bb_indicator(qutrit, PureOnticState(np.array([1.0, 0.0])))


class TestSampling:
    def test_pure_preparation_yields_copies(self, vectors):
        prep = BBPreparation(((1.0, PureOnticState(vectors["c"])),))
        draws = bb_sample(prep, 25, seed=1)
        assert len(draws) == 25
        assert all(s.same_ray(PureOnticState(vectors["c"])) for s in draws)

    def test_balanced_mixture_frequency_within_three_sigma(self, vectors):
        prep = BBPreparation(
            ((0.5, PureOnticState(vectors["a"])), (0.5, PureOnticState(vectors["A"])))
        )
        n = 100_000
        draws = bb_sample(prep, n, seed=99)
        first = sum(1 for s in draws if s.same_ray(PureOnticState(vectors["a"])))
        sigma = math.sqrt(0.25 / n)
        assert abs(first / n - 0.5) <= 3 * sigma

    def test_same_seed_reproduces_the_sequence(self, vectors):
        prep = BBPreparation(
            ((0.3, PureOnticState(vectors["a"])), (0.7, PureOnticState(vectors["b"])))
        )
        first = bb_sample(prep, 500, seed=42)
        second = bb_sample(prep, 500, seed=42)
        assert all(x.same_ray(y) for x, y in zip(first, second))

    def test_sample_count_validated(self, vectors):
        prep = BBPreparation(((1.0, PureOnticState(vectors["a"])),))
        with pytest.raises(ValueError):
            bb_sample(prep, 0, seed=1)


class TestSimulation:
    def test_eigenstate_measurement_is_exact(self, vectors, antipodal_pvm):
        prep = BBPreparation(((1.0, PureOnticState(vectors["a"])),))
        report = bb_simulate(prep, antipodal_pvm, 10_000, seed=5)
        assert report.frequencies == (1.0, 0.0)
        assert report.max_abs_dev == 0.0

    def test_mixed_preparation_matches_born_within_three_sigma(self, vectors):
        prep = BBPreparation(
            ((0.5, PureOnticState(vectors["a"])), (0.5, PureOnticState(vectors["A"])))
        )
        povm = Povm(
            (
                Effect(pure_density(vectors["b"]).matrix),
                Effect(pure_density(vectors["B"]).matrix),
            )
        )
        report = bb_simulate(prep, povm, 100_000, seed=11)
        assert report.born == pytest.approx((0.5, 0.5), abs=1e-12)
        assert report.within_sigma(3.0)

    def test_tilted_state_frequency(self, vectors, antipodal_pvm):
        prep = BBPreparation(((1.0, PureOnticState(vectors["b"])),))
        report = bb_simulate(prep, antipodal_pvm, 100_000, seed=13)
        sigma = math.sqrt(0.25 * 0.75 / report.n)
        assert abs(report.frequencies[0] - 0.25) <= 3 * sigma

    def test_seed_determinism_of_reports(self, vectors, antipodal_pvm):
        prep = BBPreparation(
            ((0.5, PureOnticState(vectors["a"])), (0.5, PureOnticState(vectors["A"])))
        )
        a = bb_simulate(prep, antipodal_pvm, 2_000, seed=21)
        b = bb_simulate(prep, antipodal_pvm, 2_000, seed=21)
        assert a.to_json() == b.to_json()

    def test_four_sigma_bound_holds_for_most_seeds(self, vectors):
        prep = BBPreparation(
            ((0.5, PureOnticState(vectors["a"])), (0.5, PureOnticState(vectors["A"])))
        )
        povm = Povm(
            (
                Effect(pure_density(vectors["b"]).matrix),
                Effect(pure_density(vectors["B"]).matrix),
            )
        )
        outcomes = [
            bb_simulate(prep, povm, 100_000, seed=seed).within_sigma(4.0)
            for seed in range(30)
        ]
        assert sum(outcomes) / len(outcomes) >= 0.99


class TestStructuralDemonstrations:
    def test_preparation_contextuality(self):
        report = bb_prep_contextuality_demo()
        assert report.operationally_equivalent
        assert report.shared_rays == 0
        assert report.total_variation == pytest.approx(1.0, abs=0)
        assert report.preparation_contextual

    def test_measurement_noncontextuality_over_random_decompositions(self):
        report = bb_meas_noncontextuality_property(trials=100, seed=3)
        assert report.trials == 100
        assert report.max_abs_dev <= 1e-12
        assert report.holds

    def test_declared_mixture_context_equals_direct_coin(self, vectors):
        theory = hexagon_theory()
        mixed = theory.measurements["M"].povm
        coin = theory.measurements["Mtrivial"].povm
        for name in "aAbBcC":
            state = PureOnticState(vectors[name])
            assert bb_indicator(mixed, state) == pytest.approx(
                bb_indicator(coin, state), abs=1e-12
            )
