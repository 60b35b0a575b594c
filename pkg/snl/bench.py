#!/usr/bin/env python3
"""
Benchmark sweeps over presets and seeds, with external baseline ingestion.
"""

import json
import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence

import pandas as pd

from .ascent import SolverConfig
from .errors import BaselineSchemaError, InvalidConfigError
from .presets import create_preset
from .solver import solve, verify

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["instance_id", "n", "m", "range", "sigma", "rmsd", "gap", "status", "stage", "time_s"]
BASELINE_COLUMNS = ["baseline_rmsd", "baseline_time_s"]


@dataclass
class BenchRow:
    """One (instance, solver) cell of a benchmark table."""

    instance_id: str
    n: int
    m: int
    range: Optional[float]
    sigma: float
    rmsd: Optional[float]
    gap: Optional[float]
    status: str
    stage: str
    time_s: float
    verified: bool = True


def instance_id(preset: str, seed: int) -> str:
    """Identifier of a benchmark cell, e.g. ``s20-3``."""
    return f"{preset}-{seed}"


def parse_seeds(text: str) -> List[int]:
    """
    Parse a seed list: ``7``, ``1,4,9`` or an inclusive range ``1..10``.

    Raises:
        InvalidConfigError: If the text is not a seed list
    """
    seeds: List[int] = []
    for part in str(text).split(","):
        part = part.strip()
        match = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", part)
        if match:
            lo, hi = int(match.group(1)), int(match.group(2))
            if hi < lo:
                raise InvalidConfigError(f"empty seed range {part}")
            seeds.extend(range(lo, hi + 1))
        elif re.fullmatch(r"-?\d+", part):
            seeds.append(int(part))
        else:
            raise InvalidConfigError(f"invalid seed list: {text!r}")
    return seeds


def run_cell(preset_name: str, seed: int, cfg: SolverConfig) -> BenchRow:
    """Generate, solve and verify one benchmark cell."""
    preset = create_preset(preset_name)
    inst, truth = preset.build(seed)
    report = solve(inst, cfg, truth=truth)
    record = verify(inst, report)
    logger.info("%s: %s in %.3fs", instance_id(preset_name, seed), report.status, report.wall_time_s)
    return BenchRow(
        instance_id=instance_id(preset_name, seed if preset.random else 0),
        n=inst.n_sensors,
        m=inst.n_anchors,
        range=preset.radio_range,
        sigma=preset.noise_sigma,
        rmsd=report.rmsd,
        gap=report.gap,
        status=report.status,
        stage=report.stage,
        time_s=report.wall_time_s,
        verified=record.passed,
    )


def run_bench(
    presets: Sequence[str],
    seeds: Iterable[int],
    cfg: Optional[SolverConfig] = None,
    jobs: int = 1,
) -> pd.DataFrame:
    """
    Sweep presets × seeds, one solve per cell.

    Fixed presets run once regardless of the seed list.

    Args:
        presets: preset names
        seeds: generator seeds
        cfg: solver configuration
        jobs: worker processes (1 runs inline)

    Returns:
        DataFrame with BENCH_COLUMNS (plus ``verified``), sorted by instance_id
    """
    cfg = cfg or SolverConfig()
    seeds = list(seeds)
    cells = []
    for name in presets:
        preset = create_preset(name)
        for seed in (seeds if preset.random else [0]):
            cells.append((name, seed))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            rows = list(executor.map(run_cell, [c[0] for c in cells], [c[1] for c in cells], [cfg] * len(cells)))
    else:
        rows = [run_cell(name, seed, cfg) for name, seed in cells]

    frame = pd.DataFrame([asdict(row) for row in rows], columns=BENCH_COLUMNS + ["verified"])
    order = sorted(range(len(cells)), key=lambda i: (cells[i][0], cells[i][1]))
    return frame.iloc[order].reset_index(drop=True)


def load_baseline(data) -> pd.DataFrame:
    """
    Parse an external baseline results document.

    The layout is ``{"rows": [{"instance_id", "rmsd", "wall_time_s"}, ...]}``.

    Returns:
        DataFrame with columns instance_id, baseline_rmsd, baseline_time_s

    Raises:
        BaselineSchemaError: If the document does not match the layout
    """
    try:
        document = json.loads(data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise BaselineSchemaError(f"invalid baseline document: {e}")
    if not isinstance(document, dict) or not isinstance(document.get("rows"), list):
        raise BaselineSchemaError("baseline document must be an object with a 'rows' list")

    records = []
    for row in document["rows"]:
        if not isinstance(row, dict):
            raise BaselineSchemaError(f"baseline row must be an object, got {row!r}")
        missing = {"instance_id", "rmsd", "wall_time_s"} - set(row)
        if missing:
            raise BaselineSchemaError(f"baseline row missing {sorted(missing)}: {row!r}")
        try:
            records.append({
                "instance_id": str(row["instance_id"]),
                "baseline_rmsd": float(row["rmsd"]),
                "baseline_time_s": float(row["wall_time_s"]),
            })
        except (TypeError, ValueError) as e:
            raise BaselineSchemaError(f"baseline row has a non-numeric value: {row!r} ({e})")
    frame = pd.DataFrame(records, columns=["instance_id"] + BASELINE_COLUMNS)
    if frame["instance_id"].duplicated().any():
        raise BaselineSchemaError("baseline has duplicate instance ids")
    return frame


def merge_baseline(frame: pd.DataFrame, baseline: pd.DataFrame) -> pd.DataFrame:
    """Left-join baseline columns onto bench rows by instance_id."""
    return frame.merge(baseline, on="instance_id", how="left")


def to_csv(frame: pd.DataFrame) -> str:
    """Render the bench table with the published column order."""
    columns = BENCH_COLUMNS + [c for c in BASELINE_COLUMNS if c in frame.columns]
    table = frame[columns].copy()
    table["range"] = table["range"].map(lambda r: "" if r is None or (isinstance(r, float) and math.isnan(r)) else r)
    return table.to_csv(index=False, lineterminator="\n")
