#!/usr/bin/env python3
"""
Tests for the named instance presets.
"""

import math

import numpy as np
import pytest

from snl.errors import InvalidConfigError
from snl.presets import (
    S18Preset,
    S20Preset,
    S50Preset,
    S200Preset,
    TwoSensorPreset,
    create_preset,
    list_presets,
)


class TestPresetFactory:
    """Test the create_preset factory."""

    def test_list_presets(self):
        """Test the names in protocol order."""
        assert list_presets() == ["two-sensor", "s18", "s20", "s50", "s200"]

    @pytest.mark.parametrize("name,cls", [
        ("two-sensor", TwoSensorPreset),
        ("s18", S18Preset),
        ("s20", S20Preset),
        ("s50", S50Preset),
        ("s200", S200Preset),
    ])
    def test_create_preset(self, name, cls):
        """Test that every name builds its class."""
        preset = create_preset(name)

        assert isinstance(preset, cls)
        assert preset.name == name

    def test_unknown_preset(self):
        """Test that an unknown name raises InvalidConfigError."""
        with pytest.raises(InvalidConfigError, match="Unknown preset: s1000"):
            create_preset("s1000")


class TestPresetInstances:
    """Test the instances the presets build."""

    def test_two_sensor_is_fixed(self):
        """Test that the two-sensor preset ignores the seed."""
        preset = create_preset("two-sensor")
        first, _ = preset.build(1)
        second, _ = preset.build(2)

        assert not preset.random
        assert preset.radio_range is None
        assert first == second

    def test_s18_complete_and_noiseless(self):
        """Test the 18-sensor protocol: complete graph, exact distances."""
        inst, truth = create_preset("s18").build(3)

        assert inst.n_sensors == 18
        assert inst.n_sensor_edges == 18 * 17 // 2
        assert inst.n_anchor_edges == 18 * 4
        assert np.all(np.abs(truth.positions) <= 0.5)
        for i, j, dist in zip(inst.sensor_i, inst.sensor_j, inst.sensor_dist):
            assert dist == pytest.approx(np.linalg.norm(truth.positions[i] - truth.positions[j]), abs=1e-15)

    def test_s18_anchors(self):
        """Test the anchors (±0.45, ±0.45)."""
        inst, _ = create_preset("s18").build(0)

        assert sorted(map(tuple, inst.anchors.tolist())) == [
            (-0.45, -0.45), (-0.45, 0.45), (0.45, -0.45), (0.45, 0.45),
        ]
        assert math.isinf(create_preset("s18").radio_range)

    @pytest.mark.parametrize("name,n,radio_range", [("s20", 20, 0.4), ("s50", 50, 0.3), ("s200", 200, 0.3)])
    def test_noisy_protocols(self, name, n, radio_range):
        """Test size, range and noise of the unit-square protocols."""
        preset = create_preset(name)
        inst, truth = preset.build(1)

        assert inst.n_sensors == n
        assert inst.n_anchors == 4
        assert preset.radio_range == radio_range
        assert preset.noise_sigma == 0.001
        for i, j in zip(inst.sensor_i, inst.sensor_j):
            assert np.linalg.norm(truth.positions[i] - truth.positions[j]) <= radio_range

    def test_seeds_differ(self):
        """Test that random presets depend on the seed and repeat for a seed."""
        preset = create_preset("s20")

        assert preset.build(1)[0] == preset.build(1)[0]
        assert preset.build(1)[0] != preset.build(2)[0]
