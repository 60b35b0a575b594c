#!/usr/bin/env python3
"""
Named instance presets for the localization protocols.
Each preset knows how to build its instance and ground truth.
"""

import math
from abc import ABC, abstractmethod
from typing import List, Optional, Tuple

from .errors import InvalidConfigError
from .instance import GeneratorConfig, GroundTruth, ProblemInstance, generate_instance, make_two_sensor_fixture

UNIT_SQUARE_CORNERS = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))


class InstancePreset(ABC):
    """Abstract base class for instance presets."""

    name = "preset"
    description = ""

    @property
    def random(self) -> bool:
        """Whether the preset depends on a seed."""
        return True

    @property
    def radio_range(self) -> Optional[float]:
        """Radio range of the protocol (None for fixed geometries)."""
        return None

    @property
    def noise_sigma(self) -> float:
        return 0.0

    @abstractmethod
    def build(self, seed: int = 0) -> Tuple[ProblemInstance, GroundTruth]:
        """
        Build the preset instance.

        Args:
            seed: generator seed (ignored by fixed presets)

        Returns:
            (instance, ground truth)
        """
        pass


class TwoSensorPreset(InstancePreset):
    """The two-sensor, four-anchor worked example."""

    name = "two-sensor"
    description = "2 sensors, 4 anchors, all distances 2"

    @property
    def random(self) -> bool:
        return False

    def build(self, seed: int = 0) -> Tuple[ProblemInstance, GroundTruth]:
        return make_two_sensor_fixture()


class ProtocolPreset(InstancePreset):
    """A random radio-range protocol described by a GeneratorConfig."""

    def __init__(self, config: GeneratorConfig):
        self.config = config

    @property
    def radio_range(self) -> Optional[float]:
        return self.config.radio_range

    @property
    def noise_sigma(self) -> float:
        return self.config.noise_sigma

    def build(self, seed: int = 0) -> Tuple[ProblemInstance, GroundTruth]:
        return generate_instance(self.config.with_seed(seed))


class S18Preset(ProtocolPreset):
    """18 sensors in [−0.5, 0.5]², anchors (±0.45, ±0.45), complete graph, noiseless."""

    name = "s18"
    description = "18 sensors, complete graph, noiseless"

    def __init__(self):
        super().__init__(GeneratorConfig(
            n_sensors=18,
            region_lo=(-0.5, -0.5),
            region_hi=(0.5, 0.5),
            anchors=((0.45, 0.45), (-0.45, 0.45), (0.45, -0.45), (-0.45, -0.45)),
            radio_range=math.inf,
            noise_sigma=0.0,
        ))


class S20Preset(ProtocolPreset):
    """20 sensors in the unit square, corner anchors, range 0.4, sigma 0.001."""

    name = "s20"
    description = "20 sensors, range 0.4, sigma 0.001"

    def __init__(self):
        super().__init__(GeneratorConfig(
            n_sensors=20,
            region_lo=(0.0, 0.0),
            region_hi=(1.0, 1.0),
            anchors=UNIT_SQUARE_CORNERS,
            radio_range=0.4,
            noise_sigma=0.001,
        ))


class S50Preset(ProtocolPreset):
    """Reduced large protocol: 50 sensors, range 0.3, sigma 0.001."""

    name = "s50"
    description = "50 sensors, range 0.3, sigma 0.001"

    def __init__(self):
        super().__init__(GeneratorConfig(
            n_sensors=50,
            region_lo=(0.0, 0.0),
            region_hi=(1.0, 1.0),
            anchors=UNIT_SQUARE_CORNERS,
            radio_range=0.3,
            noise_sigma=0.001,
        ))


class S200Preset(ProtocolPreset):
    """200 sensors in the unit square, range 0.3, sigma 0.001."""

    name = "s200"
    description = "200 sensors, range 0.3, sigma 0.001"

    def __init__(self):
        super().__init__(GeneratorConfig(
            n_sensors=200,
            region_lo=(0.0, 0.0),
            region_hi=(1.0, 1.0),
            anchors=UNIT_SQUARE_CORNERS,
            radio_range=0.3,
            noise_sigma=0.001,
        ))


_PRESETS = {
    preset.name: preset
    for preset in (TwoSensorPreset, S18Preset, S20Preset, S50Preset, S200Preset)
}


def list_presets() -> List[str]:
    """Names accepted by create_preset, in protocol order."""
    return list(_PRESETS)


def create_preset(name: str) -> InstancePreset:
    """
    Factory function to create a preset by name.

    Args:
        name: one of list_presets()

    Returns:
        InstancePreset instance

    Raises:
        InvalidConfigError: If the name is unknown
    """
    if name not in _PRESETS:
        raise InvalidConfigError(f"Unknown preset: {name} (choose from {', '.join(_PRESETS)})")
    return _PRESETS[name]()
