#!/usr/bin/env python3
"""
Localization problem instances, seeded generators, noise model and JSON I/O.

Indices in the public API and on disk are 1-based, matching the way sensor
and anchor labels are written in the localization literature. Internally
edge endpoints are stored as 0-based numpy index arrays.
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InstanceValidationError, InvalidConfigError, SchemaError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "canonical-snl/1"

# Named substreams of the per-instance seed sequence. The generator is
# numpy's PCG64 seeded through SeedSequence(seed, spawn_key=(stream,)), so an
# instance reproduces bit for bit on any platform numpy supports.
POSITION_STREAM = 0
NOISE_STREAM = 1
DELTA_STREAM = 2

SensorEdge = Tuple[int, int, float, float]
AnchorEdge = Tuple[int, int, float, float]


def seeded_stream(seed: int, stream: int) -> np.random.Generator:
    """
    Create the generator for one named substream of a seed.

    Args:
        seed: 64-bit integer seed (negative values are taken modulo 2**64)
        stream: substream id (POSITION_STREAM, NOISE_STREAM, DELTA_STREAM)

    Returns:
        numpy Generator backed by PCG64
    """
    sequence = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(stream,))
    return np.random.Generator(np.random.PCG64(sequence))


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class ProblemInstance:
    """A sensor network localization instance with sparse edge sets."""

    def __init__(
        self,
        dim: int,
        n_sensors: int,
        anchors: Sequence[Sequence[float]],
        sensor_edges: Iterable[SensorEdge] = (),
        anchor_edges: Iterable[AnchorEdge] = (),
    ):
        """
        Build and validate an instance.

        Args:
            dim: spatial dimension d >= 1
            n_sensors: number of unknown sensors n >= 1
            anchors: m anchor points in R^d
            sensor_edges: (i, j, d_ij, w_ij) with 1 <= i < j <= n
            anchor_edges: (i, k, e_ik, q_ik) with 1 <= i <= n, 1 <= k <= m

        Raises:
            InstanceValidationError: If any invariant is violated
        """
        if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)) or dim < 1:
            raise InstanceValidationError(f"dim must be an integer >= 1, got {dim!r}")
        if isinstance(n_sensors, bool) or not isinstance(n_sensors, (int, np.integer)) or n_sensors < 1:
            raise InstanceValidationError(f"n_sensors must be an integer >= 1, got {n_sensors!r}")
        self._dim = int(dim)
        self._n = int(n_sensors)

        anchor_array = np.asarray(anchors, dtype=float)
        if anchor_array.size == 0:
            anchor_array = np.zeros((0, self._dim))
        if anchor_array.ndim != 2 or anchor_array.shape[1] != self._dim:
            raise InstanceValidationError(f"anchors must be points in R^{self._dim}")
        if not np.all(np.isfinite(anchor_array)):
            raise InstanceValidationError("anchor coordinates must be finite")
        self._anchors = _readonly(anchor_array.copy())

        self._si, self._sj, self._d, self._w = self._parse_sensor_edges(list(sensor_edges))
        self._ai, self._ak, self._e, self._q = self._parse_anchor_edges(list(anchor_edges))

    def _parse_sensor_edges(self, edges: List[SensorEdge]):
        seen = set()
        rows = []
        for edge in edges:
            if len(edge) != 4:
                raise InstanceValidationError(f"sensor edge must be (i, j, dist, weight), got {edge!r}")
            i, j, dist, weight = edge
            i, j = self._index(i, self._n, "sensor"), self._index(j, self._n, "sensor")
            if not i < j:
                raise InstanceValidationError(f"sensor edge ({i}, {j}) must satisfy i < j")
            if (i, j) in seen:
                raise InstanceValidationError(f"duplicate sensor edge ({i}, {j})")
            seen.add((i, j))
            rows.append((i - 1, j - 1, self._distance(dist, (i, j)), self._weight(weight, (i, j))))
        return self._columns(rows)

    def _parse_anchor_edges(self, edges: List[AnchorEdge]):
        seen = set()
        rows = []
        m = self._anchors.shape[0]
        for edge in edges:
            if len(edge) != 4:
                raise InstanceValidationError(f"anchor edge must be (i, k, dist, weight), got {edge!r}")
            i, k, dist, weight = edge
            i, k = self._index(i, self._n, "sensor"), self._index(k, m, "anchor")
            if (i, k) in seen:
                raise InstanceValidationError(f"duplicate anchor edge ({i}, {k})")
            seen.add((i, k))
            rows.append((i - 1, k - 1, self._distance(dist, (i, k)), self._weight(weight, (i, k))))
        return self._columns(rows)

    @staticmethod
    def _columns(rows):
        if not rows:
            empty_int = np.zeros(0, dtype=np.int64)
            empty = np.zeros(0)
            return tuple(_readonly(a) for a in (empty_int, empty_int.copy(), empty, empty.copy()))
        first, second, dist, weight = zip(*rows)
        return (
            _readonly(np.array(first, dtype=np.int64)),
            _readonly(np.array(second, dtype=np.int64)),
            _readonly(np.array(dist, dtype=float)),
            _readonly(np.array(weight, dtype=float)),
        )

    @staticmethod
    def _index(value, upper: int, kind: str) -> int:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise InstanceValidationError(f"{kind} index must be an integer, got {value!r}")
        if not 1 <= value <= upper:
            raise InstanceValidationError(f"{kind} index {value} out of range 1..{upper}")
        return int(value)

    @staticmethod
    def _distance(value, edge) -> float:
        value = float(value)
        if not math.isfinite(value) or value < 0:
            raise InstanceValidationError(f"distance on edge {edge} must be finite and >= 0, got {value}")
        return value

    @staticmethod
    def _weight(value, edge) -> float:
        value = float(value)
        if not math.isfinite(value) or value <= 0:
            raise InstanceValidationError(f"weight on edge {edge} must be finite and > 0, got {value}")
        return value

    @property
    def dim(self) -> int:
        """Spatial dimension d."""
        return self._dim

    @property
    def n_sensors(self) -> int:
        """Number of unknown sensors n."""
        return self._n

    @property
    def n_anchors(self) -> int:
        """Number of anchors m."""
        return self._anchors.shape[0]

    @property
    def n_vars(self) -> int:
        """Length n·d of the stacked position vector."""
        return self._n * self._dim

    @property
    def anchors(self) -> np.ndarray:
        """Anchor coordinates, shape (m, d)."""
        return self._anchors

    @property
    def sensor_i(self) -> np.ndarray:
        """0-based first endpoints of the sensor edges."""
        return self._si

    @property
    def sensor_j(self) -> np.ndarray:
        """0-based second endpoints of the sensor edges."""
        return self._sj

    @property
    def sensor_dist(self) -> np.ndarray:
        """Measured sensor-sensor distances d_ij."""
        return self._d

    @property
    def sensor_weight(self) -> np.ndarray:
        """Sensor edge weights w_ij."""
        return self._w

    @property
    def anchor_i(self) -> np.ndarray:
        """0-based sensor endpoints of the anchor edges."""
        return self._ai

    @property
    def anchor_k(self) -> np.ndarray:
        """0-based anchor endpoints of the anchor edges."""
        return self._ak

    @property
    def anchor_dist(self) -> np.ndarray:
        """Measured sensor-anchor distances e_ik."""
        return self._e

    @property
    def anchor_weight(self) -> np.ndarray:
        """Anchor edge weights q_ik."""
        return self._q

    @property
    def n_sensor_edges(self) -> int:
        return self._si.shape[0]

    @property
    def n_anchor_edges(self) -> int:
        return self._ai.shape[0]

    @property
    def n_edges(self) -> int:
        """Total number of measured pairs |A_d| + |A_e|."""
        return self.n_sensor_edges + self.n_anchor_edges

    def sensor_edges(self) -> List[SensorEdge]:
        """Sensor edges as 1-based (i, j, d_ij, w_ij) tuples."""
        return [
            (int(i) + 1, int(j) + 1, float(d), float(w))
            for i, j, d, w in zip(self._si, self._sj, self._d, self._w)
        ]

    def anchor_edges(self) -> List[AnchorEdge]:
        """Anchor edges as 1-based (i, k, e_ik, q_ik) tuples."""
        return [
            (int(i) + 1, int(k) + 1, float(e), float(q))
            for i, k, e, q in zip(self._ai, self._ak, self._e, self._q)
        ]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (
            self._dim == other._dim
            and self._n == other._n
            and np.array_equal(self._anchors, other._anchors)
            and self.sensor_edges() == other.sensor_edges()
            and self.anchor_edges() == other.anchor_edges()
        )

    def __repr__(self) -> str:
        return (
            f"ProblemInstance(dim={self._dim}, n_sensors={self._n}, n_anchors={self.n_anchors}, "
            f"sensor_edges={self.n_sensor_edges}, anchor_edges={self.n_anchor_edges})"
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert the instance to the JSON document layout (without ground truth)."""
        return {
            "schema": SCHEMA_VERSION,
            "dim": self._dim,
            "n_sensors": self._n,
            "anchors": self._anchors.tolist(),
            "sensor_edges": [list(edge) for edge in self.sensor_edges()],
            "anchor_edges": [list(edge) for edge in self.anchor_edges()],
        }


class GroundTruth:
    """True sensor locations paired with an instance."""

    def __init__(self, positions: Sequence[Sequence[float]]):
        """
        Args:
            positions: n points in R^d
        """
        array = np.asarray(positions, dtype=float)
        if array.ndim != 2 or array.shape[0] < 1:
            raise InstanceValidationError("ground truth must be a non-empty list of points")
        if not np.all(np.isfinite(array)):
            raise InstanceValidationError("ground truth coordinates must be finite")
        self._positions = _readonly(array.copy())

    @property
    def positions(self) -> np.ndarray:
        """True positions, shape (n, d)."""
        return self._positions

    @property
    def n_sensors(self) -> int:
        return self._positions.shape[0]

    def flat(self) -> np.ndarray:
        """Stacked position vector y = [x_1, ..., x_n]."""
        return self._positions.reshape(-1).copy()

    def check_matches(self, inst: ProblemInstance) -> None:
        """Raise if the truth does not pair with ``inst``."""
        if self._positions.shape != (inst.n_sensors, inst.dim):
            raise InstanceValidationError(
                f"ground truth has shape {self._positions.shape}, "
                f"instance needs ({inst.n_sensors}, {inst.dim})"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroundTruth):
            return NotImplemented
        return np.array_equal(self._positions, other._positions)


class NoiseModel:
    """Multiplicative Gaussian distance noise: d = d_true · |1 + ν|, ν ~ N(0, σ²)."""

    def __init__(self, sigma: float = 0.001):
        if not math.isfinite(sigma) or sigma < 0:
            raise InvalidConfigError(f"noise sigma must be finite and >= 0, got {sigma}")
        self.sigma = float(sigma)

    def apply(self, true_distances: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """
        Noise a batch of true distances.

        Args:
            true_distances: exact pair distances
            rng: generator for the noise substream

        Returns:
            Noised distances, always >= 0 (exact copies when sigma is 0)
        """
        true_distances = np.asarray(true_distances, dtype=float)
        if self.sigma == 0:
            return true_distances.copy()
        factors = np.abs(1.0 + rng.normal(0.0, self.sigma, size=true_distances.shape))
        return true_distances * factors


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of a random localization protocol."""

    n_sensors: int
    region_lo: Tuple[float, ...]
    region_hi: Tuple[float, ...]
    anchors: Tuple[Tuple[float, ...], ...]
    radio_range: float
    noise_sigma: float = 0.001
    seed: int = 0
    default_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "region_lo", tuple(float(v) for v in self.region_lo))
        object.__setattr__(self, "region_hi", tuple(float(v) for v in self.region_hi))
        object.__setattr__(self, "anchors", tuple(tuple(float(v) for v in a) for a in self.anchors))
        if self.n_sensors < 1:
            raise InvalidConfigError(f"n_sensors must be >= 1, got {self.n_sensors}")
        if len(self.region_lo) == 0 or len(self.region_lo) != len(self.region_hi):
            raise InvalidConfigError("region bounds must be non-empty and of equal dimension")
        if any(hi <= lo for lo, hi in zip(self.region_lo, self.region_hi)):
            raise InvalidConfigError(f"empty region {self.region_lo}..{self.region_hi}")
        if not self.anchors:
            raise InvalidConfigError("at least one anchor is required")
        if any(len(a) != self.dim for a in self.anchors):
            raise InvalidConfigError(f"anchors must be points in R^{self.dim}")
        if math.isnan(self.radio_range) or self.radio_range < 0:
            raise InvalidConfigError(f"radio_range must be >= 0, got {self.radio_range}")
        if not math.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise InvalidConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not math.isfinite(self.default_weight) or self.default_weight <= 0:
            raise InvalidConfigError(f"default_weight must be > 0, got {self.default_weight}")

    @property
    def dim(self) -> int:
        return len(self.region_lo)

    def with_seed(self, seed: int) -> "GeneratorConfig":
        """Copy of this configuration with another seed."""
        return GeneratorConfig(
            n_sensors=self.n_sensors,
            region_lo=self.region_lo,
            region_hi=self.region_hi,
            anchors=self.anchors,
            radio_range=self.radio_range,
            noise_sigma=self.noise_sigma,
            seed=seed,
            default_weight=self.default_weight,
        )

    def diameter(self) -> float:
        """Diagonal length of the sensor region."""
        return float(np.linalg.norm(np.subtract(self.region_hi, self.region_lo)))


def generate_instance(cfg: GeneratorConfig) -> Tuple[ProblemInstance, GroundTruth]:
    """
    Draw a random instance following a radio-range protocol.

    Sensors are uniform in the region. A pair is measured iff its true
    distance is within ``cfg.radio_range``; each measured distance is noised
    with NoiseModel(cfg.noise_sigma).

    Args:
        cfg: generator configuration

    Returns:
        (instance, ground truth)
    """
    lo = np.asarray(cfg.region_lo)
    hi = np.asarray(cfg.region_hi)
    anchors = np.asarray(cfg.anchors, dtype=float)
    position_rng = seeded_stream(cfg.seed, POSITION_STREAM)
    noise_rng = seeded_stream(cfg.seed, NOISE_STREAM)
    noise = NoiseModel(cfg.noise_sigma)

    truth = lo + (hi - lo) * position_rng.random((cfg.n_sensors, cfg.dim))

    first, second = np.triu_indices(cfg.n_sensors, k=1)
    pair_dist = np.linalg.norm(truth[first] - truth[second], axis=1)
    keep = pair_dist <= cfg.radio_range
    first, second, pair_dist = first[keep], second[keep], pair_dist[keep]

    sensor_idx, anchor_idx = np.meshgrid(np.arange(cfg.n_sensors), np.arange(len(anchors)), indexing="ij")
    sensor_idx, anchor_idx = sensor_idx.reshape(-1), anchor_idx.reshape(-1)
    anchor_pair_dist = np.linalg.norm(truth[sensor_idx] - anchors[anchor_idx], axis=1)
    keep = anchor_pair_dist <= cfg.radio_range
    sensor_idx, anchor_idx, anchor_pair_dist = sensor_idx[keep], anchor_idx[keep], anchor_pair_dist[keep]

    measured = noise.apply(np.concatenate([pair_dist, anchor_pair_dist]), noise_rng)
    sensor_measured = measured[: len(pair_dist)]
    anchor_measured = measured[len(pair_dist):]

    weight = cfg.default_weight
    inst = ProblemInstance(
        dim=cfg.dim,
        n_sensors=cfg.n_sensors,
        anchors=anchors,
        sensor_edges=[
            (int(i) + 1, int(j) + 1, float(dist), weight)
            for i, j, dist in zip(first, second, sensor_measured)
        ],
        anchor_edges=[
            (int(i) + 1, int(k) + 1, float(dist), weight)
            for i, k, dist in zip(sensor_idx, anchor_idx, anchor_measured)
        ],
    )
    logger.debug("generated %r from seed %d", inst, cfg.seed)
    return inst, GroundTruth(truth)


def make_two_sensor_fixture() -> Tuple[ProblemInstance, GroundTruth]:
    """
    The symmetric two-sensor, four-anchor network.

    Anchors (−2, ±√3) are measured from sensor 1 and (2, ±√3) from sensor 2,
    every distance is 2 and every weight 1. The only zero-residual placement
    is x_1 = (−1, 0), x_2 = (1, 0).
    """
    root3 = math.sqrt(3.0)
    inst = ProblemInstance(
        dim=2,
        n_sensors=2,
        anchors=[(-2.0, root3), (-2.0, -root3), (2.0, root3), (2.0, -root3)],
        sensor_edges=[(1, 2, 2.0, 1.0)],
        anchor_edges=[(1, 1, 2.0, 1.0), (1, 2, 2.0, 1.0), (2, 3, 2.0, 1.0), (2, 4, 2.0, 1.0)],
    )
    return inst, GroundTruth([(-1.0, 0.0), (1.0, 0.0)])


def make_symmetric_pair_fixture(a: float = 1.0, b: float = 2.0, weight: float = 1.0) -> Tuple[ProblemInstance, GroundTruth]:
    """
    One sensor measured at distance b from anchors (0, ±a).

    The two placements (±√(b²−a²), 0) are both exact; the returned truth is
    the one on the positive axis.

    Raises:
        InvalidConfigError: If b <= a (no placement off the anchor axis)
    """
    if not 0 < a < b:
        raise InvalidConfigError(f"need 0 < a < b, got a={a}, b={b}")
    inst = ProblemInstance(
        dim=2,
        n_sensors=1,
        anchors=[(0.0, a), (0.0, -a)],
        anchor_edges=[(1, 1, b, weight), (1, 2, b, weight)],
    )
    return inst, GroundTruth([(math.sqrt(b * b - a * a), 0.0)])


def unanchored_sensors(inst: ProblemInstance) -> List[int]:
    """
    Sensors whose connected component has no anchor edge.

    Args:
        inst: problem instance

    Returns:
        Sorted 1-based sensor indices that no dual point can localize
    """
    n = inst.n_sensors
    graph = coo_matrix(
        (np.ones(inst.n_sensor_edges), (inst.sensor_i, inst.sensor_j)), shape=(n, n)
    )
    _, labels = connected_components(graph, directed=False)
    anchored = set(labels[inst.anchor_i].tolist())
    return [i + 1 for i in range(n) if labels[i] not in anchored]


def save_instance(inst: ProblemInstance, truth: Optional[GroundTruth] = None) -> bytes:
    """
    Serialize an instance (and optional ground truth) to UTF-8 JSON.

    Floats are written with the shortest representation that round-trips.
    """
    document = inst.to_dict()
    if truth is not None:
        truth.check_matches(inst)
        document["ground_truth"] = truth.positions.tolist()
    return json.dumps(document, indent=1).encode("utf-8")


def _require(document: Dict[str, Any], key: str):
    if key not in document:
        raise SchemaError(f"missing required field {key!r}")
    return document[key]


def _edge_rows(value, key: str) -> List[Tuple[int, int, float, float]]:
    if not isinstance(value, list):
        raise SchemaError(f"{key!r} must be a list")
    rows = []
    for row in value:
        if not isinstance(row, list) or len(row) != 4:
            raise SchemaError(f"{key!r} entries must be [index, index, dist, weight], got {row!r}")
        first, second, dist, weight = row
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (first, second)):
            raise SchemaError(f"{key!r} indices must be integers, got {row!r}")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (dist, weight)):
            raise SchemaError(f"{key!r} distance and weight must be numbers, got {row!r}")
        rows.append((first, second, float(dist), float(weight)))
    return rows


def load_instance(data: bytes) -> Tuple[ProblemInstance, Optional[GroundTruth]]:
    """
    Parse a document written by save_instance.

    Raises:
        SchemaError: If the document is malformed or has an unknown schema
        InstanceValidationError: If the instance violates its invariants
    """
    try:
        document = json.loads(data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError(f"invalid instance document: {e}")
    if not isinstance(document, dict):
        raise SchemaError("instance document must be a JSON object")

    schema = _require(document, "schema")
    if schema != SCHEMA_VERSION:
        raise SchemaError(f"unknown schema version {schema!r}")
    anchors = _require(document, "anchors")
    if not isinstance(anchors, list):
        raise SchemaError("'anchors' must be a list of points")

    inst = ProblemInstance(
        dim=_require(document, "dim"),
        n_sensors=_require(document, "n_sensors"),
        anchors=anchors,
        sensor_edges=_edge_rows(_require(document, "sensor_edges"), "sensor_edges"),
        anchor_edges=_edge_rows(_require(document, "anchor_edges"), "anchor_edges"),
    )
    truth = None
    if document.get("ground_truth") is not None:
        truth = GroundTruth(document["ground_truth"])
        truth.check_matches(inst)
    return inst, truth
