import numpy as np
import pytest

from ctxcert.ontomodel import (
    Distribution,
    IndicatorSet,
    OntModel,
    OnticSpace,
    StateView,
    TransitionMatrix,
    classify_state_view,
    compose,
    disjoint,
    evolve,
    is_outcome_deterministic,
    model_reproduces_theory,
    outcome_determinism_from_prep_nc,
    predict,
    support,
)
from ctxcert.operational import (
    Measurement,
    OperationalTheory,
    Preparation,
    hexagon_states,
    hexagon_theory,
)
from ctxcert.qmath import Effect, Povm


def _delta(index: int, size: int) -> Distribution:
    w = np.zeros(size)
    w[index] = 1.0
    return Distribution(w)


def _deterministic_xi(outcomes_per_point: list[int], outcome_count: int) -> IndicatorSet:
    values = np.zeros((outcome_count, len(outcomes_per_point)))
    for point, outcome in enumerate(outcomes_per_point):
        values[outcome, point] = 1.0
    return IndicatorSet(values)


class TestPredict:
    def test_constant_indicator_gives_fair_coin(self):
        mu = Distribution(np.array([0.2, 0.3, 0.5]))
        xi = IndicatorSet(np.full((2, 3), 0.5))
        assert predict(mu, None, xi) == pytest.approx([0.5, 0.5], abs=1e-15)

    def test_point_mass_with_deterministic_indicators(self):
        mu = _delta(1, 3)
        xi = _deterministic_xi([0, 2, 1], 3)
        assert predict(mu, None, xi) == pytest.approx([0.0, 0.0, 1.0], abs=0)

    def test_cyclic_shift_preserves_uniformity(self):
        mu = Distribution(np.full(3, 1 / 3))
        gamma = TransitionMatrix(np.roll(np.eye(3), 1, axis=0))
        xi = _deterministic_xi([0, 1, 2], 3)
        assert predict(mu, gamma, xi) == pytest.approx([1 / 3] * 3, abs=1e-15)

    def test_size_mismatch_raises(self):
        with pytest.raises(ValueError):
            predict(_delta(0, 2), None, IndicatorSet(np.full((2, 3), 0.5)))

    def test_output_is_a_probability_vector(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n, k = int(rng.integers(1, 6)), int(rng.integers(1, 4))
            w = rng.random(n)
            mu = Distribution(w / w.sum())
            raw = rng.random((k, n))
            xi = IndicatorSet(raw / raw.sum(axis=0, keepdims=True))
            g = rng.random((n, n))
            gamma = TransitionMatrix(g / g.sum(axis=0, keepdims=True))
            probs = predict(mu, gamma, xi)
            assert probs.min() >= -1e-12
            assert probs.sum() == pytest.approx(1.0, abs=1e-8)

    def test_transition_composition_associates(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n = int(rng.integers(2, 5))
            w = rng.random(n)
            mu = Distribution(w / w.sum())
            mats = []
            for _ in range(2):
                g = rng.random((n, n))
                mats.append(TransitionMatrix(g / g.sum(axis=0, keepdims=True)))
            raw = rng.random((2, n))
            xi = IndicatorSet(raw / raw.sum(axis=0, keepdims=True))
            chained = predict(mu, compose(mats[1], mats[0]), xi)
            staged = predict(evolve(mats[0], mu), mats[1], xi)
            assert chained == pytest.approx(staged, abs=1e-12)


class TestSupportAndDisjointness:
    def test_point_mass_support(self):
        assert support(_delta(2, 5)) == {2}

    def test_uniform_support(self):
        assert support(Distribution(np.full(4, 0.25))) == {0, 1, 2, 3}

    def test_threshold_drops_trace_mass(self):
        mu = Distribution(np.array([0.5, 1e-15, 0.5]))
        assert support(mu, tol=1e-12) == {0, 2}

    def test_point_masses_at_distinct_points_are_disjoint(self):
        assert disjoint(_delta(0, 4), _delta(3, 4))

    def test_identical_distributions_overlap(self):
        mu = Distribution(np.array([0.5, 0.5]))
        assert not disjoint(mu, mu)

    def test_split_against_remainder(self):
        assert disjoint(
            Distribution(np.array([0.5, 0.5, 0.0])), Distribution(np.array([0.0, 0.0, 1.0]))
        )

    def test_disjoint_iff_supports_disjoint_away_from_threshold(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            mask_a = rng.random(n) < 0.5
            mask_b = rng.random(n) < 0.5
            wa = np.where(mask_a, rng.uniform(0.1, 1.0, n), 0.0)
            wb = np.where(mask_b, rng.uniform(0.1, 1.0, n), 0.0)
            if wa.sum() == 0 or wb.sum() == 0:
                continue
            mu, nu = Distribution(wa / wa.sum()), Distribution(wb / wb.sum())
            assert disjoint(mu, nu) == (not (support(mu) & support(nu)))


class TestOutcomeDeterminism:
    def test_constant_half_half_is_not_deterministic(self):
        assert not is_outcome_deterministic(IndicatorSet(np.full((2, 3), 0.5)))

    def test_point_coded_set_is_deterministic(self):
        assert is_outcome_deterministic(_deterministic_xi([0, 1, 2, 0], 3))

    def test_third_fractions_are_not_deterministic(self):
        values = np.array([[2 / 3, 1.0], [1 / 3, 0.0]])
        assert not is_outcome_deterministic(IndicatorSet(values))

    def test_deterministic_columns_are_one_hot(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            n, k = int(rng.integers(1, 6)), int(rng.integers(2, 5))
            xi = _deterministic_xi(list(rng.integers(0, k, size=n)), k)
            assert is_outcome_deterministic(xi)
            assert np.all(xi.values.sum(axis=0) == 1.0)
            assert np.all((xi.values == 0.0) | (xi.values == 1.0))


class TestStateView:
    @staticmethod
    def _orthogonality():
        states = hexagon_states()
        return lambda x, y: bool(
            np.abs(states[x].matrix @ states[y].matrix).max() < 1e-12
        )

    def test_per_state_deltas_give_the_ontic_view(self):
        labels = list("aAbBcC")
        model = OntModel(
            OnticSpace(6), prep_map={l: _delta(i, 6) for i, l in enumerate(labels)}
        )
        report = classify_state_view(model, labels, self._orthogonality())
        assert report.view is StateView.ONTIC
        assert not report.vacuous

    def test_overlap_exactly_on_nonorthogonal_pairs_gives_the_epistemic_view(self):
        model = OntModel(
            OnticSpace(3),
            prep_map={
                "a": Distribution(np.array([1.0, 0.0, 0.0])),
                "A": Distribution(np.array([0.0, 1.0, 0.0])),
                "b": Distribution(np.array([0.25, 0.5, 0.25])),
            },
        )
        report = classify_state_view(model, ["a", "A", "b"], self._orthogonality())
        assert report.view is StateView.EPISTEMIC

    def test_mixed_behavior_is_neither(self):
        model = OntModel(
            OnticSpace(2),
            prep_map={
                "a": Distribution(np.array([1.0, 0.0])),
                "A": Distribution(np.array([1.0, 0.0])),
                "b": Distribution(np.array([0.0, 1.0])),
            },
        )
        report = classify_state_view(model, ["a", "A", "b"], self._orthogonality())
        assert report.view is StateView.NEITHER

    def test_single_label_is_vacuously_epistemic(self):
        model = OntModel(OnticSpace(2), prep_map={"a": _delta(0, 2)})
        report = classify_state_view(model, ["a"], self._orthogonality())
        assert report.view is StateView.EPISTEMIC
        assert report.vacuous

    def test_unknown_label_raises(self):
        model = OntModel(OnticSpace(2), prep_map={"a": _delta(0, 2)})
        with pytest.raises(KeyError):
            classify_state_view(model, ["a", "missing"], self._orthogonality())


def _antipodal_theory() -> OperationalTheory:
    states = hexagon_states()
    return OperationalTheory(
        preparations=[Preparation("a", states["a"]), Preparation("A", states["A"])],
        measurements=[
            Measurement(
                "Ma", Povm((Effect(states["a"].matrix), Effect(states["A"].matrix)))
            )
        ],
    )


def _two_point_model(swap: bool = False) -> OntModel:
    outcomes = [1, 0] if swap else [0, 1]
    return OntModel(
        OnticSpace(2),
        prep_map={"a": _delta(0, 2), "A": _delta(1, 2)},
        meas_map={"Ma": _deterministic_xi(outcomes, 2)},
    )


class TestModelReproducesTheory:
    def test_exact_two_point_model(self):
        report = model_reproduces_theory(_two_point_model(), _antipodal_theory())
        assert report.max_deviation == 0.0
        assert report.ok

    def test_swapped_indicators_fail_maximally(self):
        report = model_reproduces_theory(_two_point_model(swap=True), _antipodal_theory())
        assert report.max_deviation == pytest.approx(1.0, abs=0)
        failing = {(f.prep, f.transf, f.meas) for f in report.failures}
        assert ("a", None, "Ma") in failing

    def test_empty_theory_passes_vacuously(self):
        report = model_reproduces_theory(_two_point_model(), OperationalTheory())
        assert report.ok and report.max_deviation == 0.0

    def test_missing_label_raises(self):
        model = OntModel(OnticSpace(2), prep_map={"a": _delta(0, 2)})
        with pytest.raises(KeyError):
            model_reproduces_theory(model, _antipodal_theory())

    def test_transformation_triples_are_verified_too(self):
        import math

        from ctxcert.operational import Transformation
        from ctxcert.qmath import unitary_channel, unitary_rotation_y

        base = _antipodal_theory()
        theory = OperationalTheory(
            preparations=list(base.preparations.values()),
            measurements=list(base.measurements.values()),
            transformations=[
                Transformation("half-turn", unitary_channel(unitary_rotation_y(math.pi)))
            ],
        )
        swap = TransitionMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        model = _two_point_model()
        model.transf_map["half-turn"] = swap
        report = model_reproduces_theory(model, theory, tol=1e-12)
        assert report.ok
        # A transition matrix that fails to move the distributions is caught.
        stuck = _two_point_model()
        stuck.transf_map["half-turn"] = TransitionMatrix(np.eye(2))
        report = model_reproduces_theory(stuck, theory, tol=1e-12)
        assert not report.ok
        assert any(f.transf == "half-turn" for f in report.failures)

    def test_full_hexagon_model_via_response_functions(self):
        # A 6-point model with Born-rule response functions reproduces all
        # preparation/measurement statistics but is preparation-contextual
        # about it (mixtures handled by explicit distributions).
        from ctxcert.qmath import born_probability

        theory = hexagon_theory()
        labels = list("aAbBcC")
        states = {l: theory.preparations[l].rho for l in labels}
        prep_map = {l: _delta(i, 6) for i, l in enumerate(labels)}
        prep_map["aA"] = Distribution(np.array([0.5, 0.5, 0, 0, 0, 0]))
        prep_map["bB"] = Distribution(np.array([0, 0, 0.5, 0.5, 0, 0]))
        prep_map["cC"] = Distribution(np.array([0, 0, 0, 0, 0.5, 0.5]))
        prep_map["abc"] = Distribution(np.array([1, 0, 1, 0, 1, 0]) / 3)
        prep_map["ABC"] = Distribution(np.array([0, 1, 0, 1, 0, 1]) / 3)
        meas_map = {}
        for m_label, meas in theory.measurements.items():
            rows = [
                [born_probability(states[l], e) for l in labels] for e in meas.povm.effects
            ]
            meas_map[m_label] = IndicatorSet(np.array(rows))
        sub_theory = OperationalTheory(
            preparations=list(theory.preparations.values()),
            measurements=list(theory.measurements.values()),
        )
        model = OntModel(OnticSpace(6), prep_map=prep_map, meas_map=meas_map)
        report = model_reproduces_theory(model, sub_theory, tol=1e-12)
        assert report.ok


class TestOutcomeDeterminismDerivation:
    @staticmethod
    def _conforming_model() -> OntModel:
        return OntModel(
            OnticSpace(2),
            prep_map={
                "a": _delta(0, 2),
                "A": _delta(1, 2),
                "I/d": Distribution(np.array([0.5, 0.5])),
            },
            meas_map={"Ma": _deterministic_xi([0, 1], 2)},
        )

    def test_conforming_two_point_model_passes_all_steps(self):
        report = outcome_determinism_from_prep_nc(
            self._conforming_model(), "Ma", ["a", "A"], d=2
        )
        assert report.passed
        assert [s.name for s in report.steps] == [
            "disjoint-supports",
            "support-union-covers-space",
            "mixture-sum",
            "indicators-idempotent",
        ]

    def test_ray_style_model_fails_the_support_union_step(self):
        # Point masses on 2 of 4 ontic points, with the mixed state spread
        # over the same 2: the union never covers the whole space.
        from ctxcert.qmath import born_probability

        states = hexagon_states()
        labels = list("aAbB")
        rows = [
            [born_probability(states[l], Effect(states["a"].matrix)) for l in labels],
            [born_probability(states[l], Effect(states["A"].matrix)) for l in labels],
        ]
        model = OntModel(
            OnticSpace(4),
            prep_map={
                "a": _delta(0, 4),
                "A": _delta(1, 4),
                "I/d": Distribution(np.array([0.5, 0.5, 0.0, 0.0])),
            },
            meas_map={"Ma": IndicatorSet(np.array(rows))},
        )
        report = outcome_determinism_from_prep_nc(model, "Ma", ["a", "A"], d=2)
        assert not report.passed
        assert report.failing_step == "support-union-covers-space"

    def test_degenerate_one_dimensional_case_passes(self):
        model = OntModel(
            OnticSpace(1),
            prep_map={"only": _delta(0, 1), "I/d": _delta(0, 1)},
            meas_map={"M": IndicatorSet(np.array([[1.0]]))},
        )
        report = outcome_determinism_from_prep_nc(model, "M", ["only"], d=1)
        assert report.passed

    def test_random_conforming_models_always_pass(self):
        rng = np.random.default_rng(37)
        for _ in range(25):
            d = int(rng.integers(2, 4))
            block_sizes = rng.integers(1, 4, size=d)
            n = int(block_sizes.sum())
            prep_map = {}
            outcomes = []
            start = 0
            for k in range(d):
                block = slice(start, start + int(block_sizes[k]))
                w = np.zeros(n)
                w[block] = rng.uniform(0.2, 1.0, int(block_sizes[k]))
                w /= w.sum()
                prep_map[f"p{k}"] = Distribution(w)
                outcomes.extend([k] * int(block_sizes[k]))
                start += int(block_sizes[k])
            prep_map["I/d"] = Distribution(
                sum(prep_map[f"p{k}"].weights for k in range(d)) / d
            )
            model = OntModel(
                OnticSpace(n),
                prep_map=prep_map,
                meas_map={"M": _deterministic_xi(outcomes, d)},
            )
            report = outcome_determinism_from_prep_nc(
                model, "M", [f"p{k}" for k in range(d)], d=d
            )
            assert report.passed, report

    def test_overlapping_supports_fail_the_first_step(self):
        model = OntModel(
            OnticSpace(2),
            prep_map={
                "a": Distribution(np.array([0.6, 0.4])),
                "A": Distribution(np.array([0.4, 0.6])),
                "I/d": Distribution(np.array([0.5, 0.5])),
            },
            meas_map={"Ma": _deterministic_xi([0, 1], 2)},
        )
        report = outcome_determinism_from_prep_nc(model, "Ma", ["a", "A"], d=2)
        assert report.failing_step == "disjoint-supports"


class TestValidationAndJson:
    def test_distribution_must_normalize(self):
        with pytest.raises(ValueError):
            Distribution(np.array([0.5, 0.6]))
        with pytest.raises(ValueError):
            Distribution(np.array([1.5, -0.5]))

    def test_indicator_columns_must_normalize(self):
        with pytest.raises(ValueError):
            IndicatorSet(np.array([[0.5, 0.2], [0.4, 0.8]]))

    def test_transition_columns_must_normalize(self):
        with pytest.raises(ValueError):
            TransitionMatrix(np.array([[0.5, 0.0], [0.4, 1.0]]))

    def test_model_size_consistency_enforced(self):
        with pytest.raises(ValueError):
            OntModel(OnticSpace(3), prep_map={"a": _delta(0, 2)})

    def test_json_roundtrip(self):
        model = _two_point_model()
        model.transf_map["swap"] = TransitionMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        doc = OntModel.from_json(model.to_json()).to_json()
        assert doc == model.to_json()
