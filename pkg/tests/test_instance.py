#!/usr/bin/env python3
"""
Tests for problem instances, the seeded generator and instance JSON I/O.
"""

import json
import math

import numpy as np
import pytest

from snl.errors import InstanceValidationError, InvalidConfigError, SchemaError
from snl.instance import (
    SCHEMA_VERSION,
    GeneratorConfig,
    GroundTruth,
    NoiseModel,
    ProblemInstance,
    generate_instance,
    load_instance,
    make_symmetric_pair_fixture,
    make_two_sensor_fixture,
    save_instance,
    unanchored_sensors,
)
from snl.primal import squared_residuals


def complete_config(n=5, seed=0, sigma=0.0):
    return GeneratorConfig(
        n_sensors=n,
        region_lo=(0.0, 0.0),
        region_hi=(1.0, 1.0),
        anchors=((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)),
        radio_range=10.0,
        noise_sigma=sigma,
        seed=seed,
    )


class TestProblemInstance:
    """Test ProblemInstance construction and validation."""

    def test_counts_and_properties(self):
        """Test the sizes reported by a valid instance."""
        inst, _ = make_two_sensor_fixture()

        assert inst.dim == 2
        assert inst.n_sensors == 2
        assert inst.n_anchors == 4
        assert inst.n_vars == 4
        assert inst.n_sensor_edges == 1
        assert inst.n_anchor_edges == 4
        assert inst.n_edges == 5
        assert inst.sensor_edges() == [(1, 2, 2.0, 1.0)]
        assert inst.anchor_edges()[2] == (2, 3, 2.0, 1.0)

    def test_internal_indices_are_zero_based(self):
        """Test that stored edge endpoints are 0-based arrays."""
        inst, _ = make_two_sensor_fixture()

        assert inst.sensor_i.tolist() == [0]
        assert inst.sensor_j.tolist() == [1]
        assert inst.anchor_k.tolist() == [0, 1, 2, 3]

    def test_arrays_are_read_only(self):
        """Test that an instance cannot be mutated through its arrays."""
        inst, _ = make_two_sensor_fixture()

        with pytest.raises(ValueError):
            inst.sensor_dist[0] = 3.0

    def test_rejects_unordered_sensor_edge(self):
        """Test that sensor edges must satisfy i < j."""
        with pytest.raises(InstanceValidationError, match="i < j"):
            ProblemInstance(2, 2, [(0.0, 0.0)], sensor_edges=[(2, 1, 1.0, 1.0)])

    def test_rejects_duplicate_edges(self):
        """Test that duplicate sensor and anchor edges are rejected."""
        with pytest.raises(InstanceValidationError, match="duplicate"):
            ProblemInstance(2, 2, [(0.0, 0.0)], sensor_edges=[(1, 2, 1.0, 1.0), (1, 2, 1.5, 1.0)])
        with pytest.raises(InstanceValidationError, match="duplicate"):
            ProblemInstance(2, 1, [(0.0, 0.0)], anchor_edges=[(1, 1, 1.0, 1.0), (1, 1, 1.0, 2.0)])

    def test_rejects_out_of_range_index(self):
        """Test that sensor and anchor indices must be in range."""
        with pytest.raises(InstanceValidationError, match="out of range"):
            ProblemInstance(2, 2, [(0.0, 0.0)], sensor_edges=[(1, 3, 1.0, 1.0)])
        with pytest.raises(InstanceValidationError, match="out of range"):
            ProblemInstance(2, 1, [(0.0, 0.0)], anchor_edges=[(1, 2, 1.0, 1.0)])

    def test_rejects_bad_distance_and_weight(self):
        """Test that distances must be finite and >= 0 and weights > 0."""
        with pytest.raises(InstanceValidationError, match="distance"):
            ProblemInstance(2, 2, [(0.0, 0.0)], sensor_edges=[(1, 2, -1.0, 1.0)])
        with pytest.raises(InstanceValidationError, match="distance"):
            ProblemInstance(2, 2, [(0.0, 0.0)], sensor_edges=[(1, 2, math.nan, 1.0)])
        with pytest.raises(InstanceValidationError, match="weight"):
            ProblemInstance(2, 2, [(0.0, 0.0)], sensor_edges=[(1, 2, 1.0, 0.0)])

    def test_rejects_bad_dimensions(self):
        """Test dimension and anchor shape validation."""
        with pytest.raises(InstanceValidationError):
            ProblemInstance(0, 2, [])
        with pytest.raises(InstanceValidationError):
            ProblemInstance(2, 0, [(0.0, 0.0)])
        with pytest.raises(InstanceValidationError):
            ProblemInstance(2, 1, [(0.0, 0.0, 0.0)])
        with pytest.raises(InstanceValidationError):
            ProblemInstance(2, 1, [(math.inf, 0.0)])

    def test_validation_errors_are_value_errors(self):
        """Test that callers catching ValueError still see instance errors."""
        with pytest.raises(ValueError):
            ProblemInstance(2, 2, [(0.0, 0.0)], sensor_edges=[(1, 1, 1.0, 1.0)])

    def test_instance_without_edges(self):
        """Test that an instance with no measured pairs is valid."""
        inst = ProblemInstance(2, 3, [(0.0, 0.0)])

        assert inst.n_edges == 0
        assert inst.sensor_edges() == []


class TestGenerator:
    """Test the seeded radio-range generator."""

    def test_same_seed_reproduces_instance(self):
        """Test that a seed reproduces the instance bit for bit."""
        first, truth_a = generate_instance(complete_config(seed=11, sigma=0.001))
        second, truth_b = generate_instance(complete_config(seed=11, sigma=0.001))

        assert first == second
        assert truth_a == truth_b

    def test_different_seeds_differ(self):
        """Test that different seeds give different placements."""
        _, truth_a = generate_instance(complete_config(seed=1))
        _, truth_b = generate_instance(complete_config(seed=2))

        assert not np.allclose(truth_a.positions, truth_b.positions)

    def test_large_range_gives_complete_graph(self):
        """Test that a range beyond the region diameter measures every pair."""
        inst, _ = generate_instance(complete_config(n=6))

        assert inst.n_sensor_edges == 15
        assert inst.n_anchor_edges == 24

    def test_zero_range_gives_no_edges(self):
        """Test that range 0 measures nothing."""
        cfg = GeneratorConfig(
            n_sensors=4, region_lo=(0.0, 0.0), region_hi=(1.0, 1.0),
            anchors=((0.5, 0.5),), radio_range=0.0, seed=5,
        )
        inst, _ = generate_instance(cfg)

        assert inst.n_edges == 0

    def test_noiseless_distances_are_exact(self):
        """Test that sigma 0 reproduces true distances."""
        inst, truth = generate_instance(complete_config(n=5, seed=3))
        sensor_res, anchor_res = squared_residuals(inst, truth.flat())

        assert np.max(np.abs(sensor_res)) < 1e-12
        assert np.max(np.abs(anchor_res)) < 1e-12

    def test_sensors_inside_region(self):
        """Test that sensors are drawn inside the region."""
        _, truth = generate_instance(complete_config(n=50, seed=9))

        assert np.all(truth.positions >= 0.0)
        assert np.all(truth.positions <= 1.0)

    def test_invalid_configs(self):
        """Test generator configuration validation."""
        with pytest.raises(InvalidConfigError):
            GeneratorConfig(0, (0.0, 0.0), (1.0, 1.0), ((0.0, 0.0),), 1.0)
        with pytest.raises(InvalidConfigError):
            GeneratorConfig(3, (0.0, 0.0), (0.0, 1.0), ((0.0, 0.0),), 1.0)
        with pytest.raises(InvalidConfigError):
            GeneratorConfig(3, (0.0, 0.0), (1.0, 1.0), (), 1.0)
        with pytest.raises(InvalidConfigError):
            GeneratorConfig(3, (0.0, 0.0), (1.0, 1.0), ((0.0, 0.0),), -0.1)
        with pytest.raises(InvalidConfigError):
            GeneratorConfig(3, (0.0, 0.0), (1.0, 1.0), ((0.0, 0.0),), 1.0, noise_sigma=-1.0)

    def test_with_seed_and_diameter(self):
        """Test config helpers."""
        cfg = complete_config(seed=1)

        assert cfg.with_seed(8).seed == 8
        assert cfg.with_seed(8).n_sensors == cfg.n_sensors
        assert cfg.diameter() == pytest.approx(math.sqrt(2.0))


class TestNoiseModel:
    """Test the multiplicative distance noise."""

    def test_zero_sigma_is_identity(self):
        """Test that sigma 0 copies the distances."""
        distances = np.array([0.5, 1.0, 2.0])
        noised = NoiseModel(0.0).apply(distances, np.random.default_rng(0))

        assert np.array_equal(noised, distances)
        assert noised is not distances

    def test_noise_is_nonnegative_and_small(self):
        """Test that noised distances stay >= 0 and near the truth."""
        distances = np.full(1000, 1.0)
        noised = NoiseModel(0.001).apply(distances, np.random.default_rng(1))

        assert np.all(noised >= 0)
        assert np.max(np.abs(noised - 1.0)) < 0.01

    def test_negative_sigma_rejected(self):
        """Test sigma validation."""
        with pytest.raises(InvalidConfigError):
            NoiseModel(-0.1)


class TestFixtures:
    """Test the built-in fixtures."""

    def test_two_sensor_truth_has_zero_residual(self):
        """Test that the two-sensor truth measures every distance exactly."""
        inst, truth = make_two_sensor_fixture()
        sensor_res, anchor_res = squared_residuals(inst, truth.flat())

        assert np.allclose(sensor_res, 0.0, atol=1e-12)
        assert np.allclose(anchor_res, 0.0, atol=1e-12)

    def test_symmetric_pair_truth(self):
        """Test the one-sensor, two-anchor fixture."""
        inst, truth = make_symmetric_pair_fixture(1.0, 2.0)
        _, anchor_res = squared_residuals(inst, truth.flat())

        assert inst.n_sensors == 1
        assert inst.n_anchor_edges == 2
        assert truth.positions[0, 0] == pytest.approx(math.sqrt(3.0))
        assert np.allclose(anchor_res, 0.0, atol=1e-12)

    def test_symmetric_pair_needs_b_above_a(self):
        """Test that b <= a is rejected."""
        with pytest.raises(InvalidConfigError):
            make_symmetric_pair_fixture(2.0, 1.0)


class TestUnanchoredSensors:
    """Test structural localizability diagnostics."""

    def test_anchored_instance(self):
        """Test that every sensor of the fixture is anchored."""
        inst, _ = make_two_sensor_fixture()

        assert unanchored_sensors(inst) == []

    def test_detached_component(self):
        """Test that a component without anchor edges is reported."""
        inst = ProblemInstance(
            2, 4, [(0.0, 0.0)],
            sensor_edges=[(1, 2, 1.0, 1.0), (3, 4, 1.0, 1.0)],
            anchor_edges=[(2, 1, 1.0, 1.0)],
        )

        assert unanchored_sensors(inst) == [3, 4]


class TestInstanceIO:
    """Test instance JSON serialization."""

    def test_round_trip_with_truth(self):
        """Test save then load with ground truth."""
        inst, truth = generate_instance(complete_config(seed=4, sigma=0.001))
        loaded, loaded_truth = load_instance(save_instance(inst, truth))

        assert loaded == inst
        assert loaded_truth == truth

    def test_round_trip_without_truth(self):
        """Test that ground truth is optional."""
        inst, _ = make_two_sensor_fixture()
        loaded, truth = load_instance(save_instance(inst))

        assert loaded == inst
        assert truth is None

    def test_document_layout(self):
        """Test the top-level fields of the document."""
        inst, truth = make_two_sensor_fixture()
        document = json.loads(save_instance(inst, truth))

        assert document["schema"] == SCHEMA_VERSION
        assert document["sensor_edges"] == [[1, 2, 2.0, 1.0]]
        assert document["ground_truth"] == [[-1.0, 0.0], [1.0, 0.0]]

    def test_missing_field(self):
        """Test that a missing field raises SchemaError."""
        inst, _ = make_two_sensor_fixture()
        document = json.loads(save_instance(inst))
        del document["anchor_edges"]

        with pytest.raises(SchemaError, match="anchor_edges"):
            load_instance(json.dumps(document).encode())

    def test_unknown_schema(self):
        """Test that an unknown schema version is rejected."""
        inst, _ = make_two_sensor_fixture()
        document = json.loads(save_instance(inst))
        document["schema"] = "canonical-snl/99"

        with pytest.raises(SchemaError, match="schema"):
            load_instance(json.dumps(document).encode())

    def test_invalid_json(self):
        """Test that malformed bytes raise SchemaError."""
        with pytest.raises(SchemaError):
            load_instance(b"{not json")

    def test_bad_edge_row(self):
        """Test that malformed edge rows raise SchemaError."""
        inst, _ = make_two_sensor_fixture()
        document = json.loads(save_instance(inst))
        document["sensor_edges"] = [[1, 2, 2.0]]

        with pytest.raises(SchemaError):
            load_instance(json.dumps(document).encode())

    def test_truth_shape_mismatch(self):
        """Test that ground truth must match the instance."""
        inst, _ = make_two_sensor_fixture()
        document = json.loads(save_instance(inst))
        document["ground_truth"] = [[0.0, 0.0]]

        with pytest.raises(InstanceValidationError):
            load_instance(json.dumps(document).encode())

    def test_truth_must_match_on_save(self):
        """Test that save_instance rejects a mismatched truth."""
        inst, _ = make_two_sensor_fixture()

        with pytest.raises(InstanceValidationError):
            save_instance(inst, GroundTruth([[0.0, 0.0]]))
