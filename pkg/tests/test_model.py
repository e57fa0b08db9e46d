import numpy as np
import pytest

from vqclass.encoding import EncodingConfig, encode
from vqclass.model import (
    CLASS_NAMES,
    EnsembleModel,
    ModelParams,
    circuit_ops,
    init_ensemble,
    layer,
    predict,
    predict_batch,
    score,
    score_all,
    score_matrix,
)
from vqclass.statevector import (
    basis_state,
    expectation_z,
    full_unitary_oracle,
    zero_state,
)

# regression snapshot: init_ensemble(seed=42, n_layers=2) on amplitude/3-qubit
# encoding, input arange(1, 9) — computed once and frozen
SNAPSHOT_INPUT = np.arange(1.0, 9.0)
SNAPSHOT_SCORES = (
    -0.22926206608143324,
    -0.11728357772574355,
    -0.1336015242948454,
    -0.17779903801157854,
)


def small_encoding():
    return EncodingConfig(scheme="amplitude", n_qubits=3, input_dim=8)


class TestLayer:
    def test_zero_angles_on_ground_state(self):
        state = zero_state(2)
        layer(state, np.zeros((2, 3)))
        np.testing.assert_array_equal(state.amps, [1, 0, 0, 0])

    def test_zero_angles_on_10_matches_oracle(self):
        # the CNOT ring moves |10> through |11> to |01>; the expected state
        # comes from the independent full-unitary construction
        ops = circuit_ops(np.zeros((1, 2, 3)), 2)
        expected = full_unitary_oracle(ops, 2) @ basis_state(2, 0b10).amps
        state = basis_state(2, 0b10)
        layer(state, np.zeros((2, 3)))
        np.testing.assert_allclose(state.amps, expected, atol=1e-15)

    def test_single_qubit_skips_entangler(self):
        state = zero_state(1)
        layer(state, np.array([[0.0, np.pi, 0.0]]))
        assert abs(state.amps[1]) ** 2 == pytest.approx(1.0, abs=1e-15)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            layer(zero_state(2), np.zeros((3, 3)))


class TestCircuitShape:
    def test_gate_counts_and_round_order(self):
        n_layers, n_qubits = 4, 3
        ops = circuit_ops(np.zeros((n_layers, n_qubits, 3)), n_qubits)
        names = [op[0] for op in ops]
        assert names.count("rot") == n_layers * n_qubits
        assert names.count("cnot") == n_layers * n_qubits
        per_layer = len(names) // n_layers
        for l in range(n_layers):
            chunk = names[l * per_layer:(l + 1) * per_layer]
            assert chunk == ["rot"] * n_qubits + ["cnot"] * n_qubits

    def test_cnot_ring_wiring(self):
        ops = circuit_ops(np.zeros((1, 3, 3)), 3)
        rings = [op[1] for op in ops if op[0] == "cnot"]
        assert rings == [(0, 1), (1, 2), (2, 0)]

    def test_one_qubit_has_no_entanglers(self):
        ops = circuit_ops(np.zeros((2, 1, 3)), 1)
        assert all(op[0] == "rot" for op in ops)


class TestScore:
    def test_identity_circuit_on_ground_state(self):
        params = ModelParams(angles=np.zeros((2, 2, 3)))
        assert score(params, zero_state(2), 2) == 1.0

    def test_oracle_value_after_cnot(self):
        # zero angles, qubit 0 prepared in |1>: the layer's ring still acts,
        # so the score is the oracle-computed post-circuit <Z_0>
        params = ModelParams(angles=np.zeros((1, 2, 3)))
        ops = circuit_ops(params.angles, 2)
        final = full_unitary_oracle(ops, 2) @ basis_state(2, 0b10).amps
        probs = np.abs(final) ** 2
        signs = 1 - 2 * ((np.arange(4) >> 1) & 1)
        expected = float((probs * signs).sum())
        assert score(params, basis_state(2, 0b10), 1) == pytest.approx(
            expected, abs=1e-15)

    def test_bounded_without_bias(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            params = ModelParams(angles=rng.uniform(-np.pi, np.pi, (3, 3, 3)))
            state = basis_state(3, int(rng.integers(8)))
            assert -1.0 - 1e-12 <= score(params, state, 3) <= 1.0 + 1e-12

    def test_bias_shifts_score(self):
        angles = np.zeros((1, 1, 3))
        plain = score(ModelParams(angles=angles), zero_state(1), 1)
        biased = score(ModelParams(angles=angles, bias=0.25), zero_state(1), 1)
        assert biased == plain + 0.25

    def test_layer_count_mismatch_rejected(self):
        params = ModelParams(angles=np.zeros((2, 2, 3)))
        with pytest.raises(ValueError):
            score(params, zero_state(2), 3)


class TestEnsemble:
    def test_init_shapes_and_range(self):
        model = init_ensemble(small_encoding(), n_layers=2, seed=0)
        assert len(model.classifiers) == 4
        for params in model.classifiers:
            assert params.angles.shape == (2, 3, 3)
            assert np.all(np.abs(params.angles) <= 0.1)
            assert params.bias is None

    def test_init_is_seeded(self):
        a = init_ensemble(small_encoding(), n_layers=2, seed=9)
        b = init_ensemble(small_encoding(), n_layers=2, seed=9)
        c = init_ensemble(small_encoding(), n_layers=2, seed=10)
        for pa, pb in zip(a.classifiers, b.classifiers):
            np.testing.assert_array_equal(pa.angles, pb.angles)
        assert any(not np.array_equal(pa.angles, pc.angles)
                   for pa, pc in zip(a.classifiers, c.classifiers))

    def test_with_bias(self):
        model = init_ensemble(small_encoding(), n_layers=1, seed=0,
                              with_bias=True)
        assert all(params.bias == 0.0 for params in model.classifiers)

    def test_exactly_four_classifiers_enforced(self):
        model = init_ensemble(small_encoding(), n_layers=1, seed=0)
        with pytest.raises(ValueError):
            EnsembleModel(classifiers=model.classifiers[:3],
                          encoding=small_encoding(), n_layers=1)

    def test_label_map_must_be_distinct(self):
        model = init_ensemble(small_encoding(), n_layers=1, seed=0)
        with pytest.raises(ValueError):
            EnsembleModel(classifiers=list(model.classifiers),
                          encoding=small_encoding(), n_layers=1,
                          label_map=("a", "a", "b", "c"))

    def test_default_label_order(self):
        model = init_ensemble(small_encoding(), n_layers=1, seed=0)
        assert tuple(model.label_map) == ("none", "infection", "ischaemia",
                                          "both")
        assert tuple(CLASS_NAMES) == tuple(model.label_map)


class TestScoreAll:
    def test_identical_classifiers_identical_scores(self):
        base = init_ensemble(small_encoding(), n_layers=2, seed=3)
        clone = base.classifiers[0]
        model = EnsembleModel(classifiers=[clone.copy() for _ in range(4)],
                              encoding=small_encoding(), n_layers=2)
        scores = score_all(model, SNAPSHOT_INPUT)
        assert len(set(scores.tolist())) == 1

    def test_frozen_regression_snapshot(self):
        model = init_ensemble(small_encoding(), n_layers=2, seed=42)
        scores = score_all(model, SNAPSHOT_INPUT)
        assert tuple(float(s) for s in scores) == SNAPSHOT_SCORES

    def test_amplitude_scaling_invariance(self):
        model = init_ensemble(small_encoding(), n_layers=2, seed=42)
        np.testing.assert_array_equal(score_all(model, SNAPSHOT_INPUT),
                                      score_all(model, 2.0 * SNAPSHOT_INPUT))

    def test_repeat_calls_bit_identical(self):
        model = init_ensemble(small_encoding(), n_layers=2, seed=42)
        np.testing.assert_array_equal(score_all(model, SNAPSHOT_INPUT),
                                      score_all(model, SNAPSHOT_INPUT))


class TestBatchPaths:
    def test_score_matrix_matches_score_all_rows(self):
        model = init_ensemble(small_encoding(), n_layers=2, seed=5)
        rng = np.random.default_rng(11)
        features = rng.standard_normal((6, 8))
        matrix = score_matrix(model, features)
        for i in range(6):
            np.testing.assert_array_equal(matrix[i], score_all(model,
                                                               features[i]))

    def test_predict_batch_matches_predict(self):
        model = init_ensemble(small_encoding(), n_layers=2, seed=5)
        rng = np.random.default_rng(12)
        features = rng.standard_normal((10, 8))
        batch = predict_batch(model, features)
        singles = [predict(model, row) for row in features]
        np.testing.assert_array_equal(batch, singles)


class TestPredict:
    def test_unique_max(self, monkeypatch):
        model = init_ensemble(small_encoding(), n_layers=1, seed=0)
        monkeypatch.setattr("vqclass.model.score_all",
                            lambda m, x: np.array([0.9, -0.5, -0.2, -0.8]))
        assert predict(model, SNAPSHOT_INPUT) == 0

    def test_tie_breaks_to_lowest_index(self, monkeypatch):
        model = init_ensemble(small_encoding(), n_layers=1, seed=0)
        monkeypatch.setattr("vqclass.model.score_all",
                            lambda m, x: np.array([0.3, 0.3, -1.0, -1.0]))
        assert predict(model, SNAPSHOT_INPUT) == 0

    def test_rescaled_input_same_prediction(self):
        model = init_ensemble(small_encoding(), n_layers=2, seed=8)
        rng = np.random.default_rng(13)
        for _ in range(10):
            x = rng.standard_normal(8)
            assert predict(model, x) == predict(model, 7.3 * x)


class TestModelParams:
    def test_non_finite_angles_rejected(self):
        angles = np.zeros((1, 2, 3))
        angles[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            ModelParams(angles=angles)

    def test_copy_is_independent(self):
        params = ModelParams(angles=np.zeros((1, 2, 3)))
        clone = params.copy()
        clone.angles[0, 0, 0] = 1.0
        assert params.angles[0, 0, 0] == 0.0
