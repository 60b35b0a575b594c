#!/usr/bin/env python3
"""
Solve reports and verification records, with their JSON form.
"""

import json
from typing import Any, Dict, List, Optional

import numpy as np

from .dual import DualPoint
from .errors import SchemaError

REPORT_SCHEMA = "canonical-snl-report/1"

CRITICAL_POINT = "critical-point-in-cone"
PERTURBED_SOLUTION = "perturbed-solution"
NO_INTERIOR = "no-interior-critical-point"
MAX_ITERS = "max-iters"
TRIVIAL = "trivial"
STATUSES = (CRITICAL_POINT, PERTURBED_SOLUTION, NO_INTERIOR, MAX_ITERS, TRIVIAL)
STAGES = ("none", "linear", "quadratic")


def _array(value) -> Optional[np.ndarray]:
    return None if value is None else np.asarray(value, dtype=float).reshape(-1)


def _list(value: Optional[np.ndarray]) -> Optional[List[float]]:
    return None if value is None else np.asarray(value, dtype=float).tolist()


class CheckResult:
    """Outcome of one verification check."""

    def __init__(self, name: str, passed: bool, value: float, tolerance: float):
        self.name = name
        self.passed = bool(passed)
        self.value = float(value)
        self.tolerance = float(tolerance)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "value": self.value, "tolerance": self.tolerance}

    def __repr__(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        return f"CheckResult({self.name}: {mark}, {self.value:.3e} vs {self.tolerance:.3e})"


class VerificationRecord:
    """Pass/fail record of the checks run by verify."""

    def __init__(self, checks: Optional[List[CheckResult]] = None, note: Optional[str] = None):
        self.checks = list(checks or [])
        self.note = note

    @property
    def passed(self) -> bool:
        """True when every check passed."""
        return all(check.passed for check in self.checks)

    def get(self, name: str) -> Optional[CheckResult]:
        """Look up a check by name."""
        for check in self.checks:
            if check.name == name:
                return check
        return None

    def failed(self) -> List[str]:
        """Names of the failed checks."""
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "note": self.note, "checks": [check.to_dict() for check in self.checks]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VerificationRecord":
        checks = [
            CheckResult(c["name"], c["passed"], c["value"], c["tolerance"])
            for c in data.get("checks", [])
        ]
        return cls(checks, note=data.get("note"))


class SolveReport:
    """Result of solving one instance: placement, certificate and diagnostics."""

    def __init__(
        self,
        status: str,
        stage: str,
        dim: int,
        positions: Optional[np.ndarray] = None,
        dual_opt: Optional[DualPoint] = None,
        primal_value: Optional[float] = None,
        dual_value: Optional[float] = None,
        objective: Optional[float] = None,
        rmsd: Optional[float] = None,
        iterations: int = 0,
        wall_time_s: float = 0.0,
        gradient_norm: Optional[float] = None,
        delta: Optional[np.ndarray] = None,
        rho: float = 0.0,
        mu: float = 0.0,
        y_anchor: Optional[np.ndarray] = None,
        config: Optional[Dict[str, Any]] = None,
        diagnostics: Optional[Dict[str, Any]] = None,
    ):
        """
        Args:
            status: one of STATUSES
            stage: perturbation stage that produced the certificate (none, linear, quadratic)
            dim: spatial dimension, used to lay positions out as points
            positions: recovered placement ȳ (flat)
            dual_opt: dual point paired with positions
            primal_value: objective of the certified problem at ȳ
            dual_value: dual value at dual_opt
            objective: unperturbed objective Π(ȳ)
            rmsd: distance to ground truth, when known
            iterations: total accepted ascent steps over all stages
            wall_time_s: wall-clock seconds spent solving
            gradient_norm: ∞-norm of the dual gradient at dual_opt
            delta: linear perturbation of the certified problem
            rho: proximal weight of the certified problem (0 outside the quadratic stage)
            mu: cone relaxation of the certified problem
            y_anchor: proximal center y_k of the certified problem
            config: SolverConfig.to_dict() of the run
            diagnostics: free-form details (unanchored sensors, stage history)
        """
        if status not in STATUSES:
            raise ValueError(f"Unknown status: {status}")
        if stage not in STAGES:
            raise ValueError(f"Unknown stage: {stage}")
        self.status = status
        self.stage = stage
        self.dim = int(dim)
        self.positions = _array(positions)
        self.dual_opt = dual_opt
        self.primal_value = primal_value
        self.dual_value = dual_value
        self.objective = objective
        self.rmsd = rmsd
        self.iterations = int(iterations)
        self.wall_time_s = float(wall_time_s)
        self.gradient_norm = gradient_norm
        self.delta = _array(delta)
        self.rho = float(rho)
        self.mu = float(mu)
        self.y_anchor = _array(y_anchor)
        self.config = dict(config or {})
        self.diagnostics = dict(diagnostics or {})
        self.verification: Optional[VerificationRecord] = None

    @property
    def gap(self) -> Optional[float]:
        """primal_value − dual_value, when both are known."""
        if self.primal_value is None or self.dual_value is None:
            return None
        return self.primal_value - self.dual_value

    @property
    def succeeded(self) -> bool:
        """Whether the status carries a certificate (or the instance was trivial)."""
        return self.status in (CRITICAL_POINT, PERTURBED_SOLUTION, TRIVIAL)

    def points(self) -> Optional[np.ndarray]:
        """Positions as an (n, d) array."""
        return None if self.positions is None else self.positions.reshape(-1, self.dim)

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        """
        Convert the report to its JSON layout.

        Args:
            include_timing: drop wall_time_s when False (for determinism checks)
        """
        data = {
            "schema": REPORT_SCHEMA,
            "status": self.status,
            "stage": self.stage,
            "dim": self.dim,
            "positions": None if self.positions is None else self.points().tolist(),
            "primal": self.primal_value,
            "dual": self.dual_value,
            "gap": self.gap,
            "objective": self.objective,
            "rmsd": self.rmsd,
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
            "dual_point": None if self.dual_opt is None else self.dual_opt.to_dict(),
            "delta": _list(self.delta),
            "rho": self.rho,
            "mu": self.mu,
            "y_anchor": _list(self.y_anchor),
            "config": self.config,
            "diagnostics": self.diagnostics,
            "verification": None if self.verification is None else self.verification.to_dict(),
        }
        if include_timing:
            data["wall_time_s"] = self.wall_time_s
        return data

    def to_json(self) -> str:
        """Convert the report to a JSON string."""
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, json_str) -> "SolveReport":
        """
        Create a report from a JSON string written by to_json.

        Raises:
            SchemaError: If the document is malformed or has an unknown schema
        """
        try:
            data = json.loads(json_str)
        except (TypeError, json.JSONDecodeError) as e:
            raise SchemaError(f"invalid report document: {e}")
        if not isinstance(data, dict) or data.get("schema") != REPORT_SCHEMA:
            raise SchemaError(f"unknown report schema {data.get('schema') if isinstance(data, dict) else None!r}")
        try:
            report = cls(
                status=data["status"],
                stage=data["stage"],
                dim=data["dim"],
                positions=data.get("positions"),
                dual_opt=DualPoint.from_dict(data["dual_point"]) if data.get("dual_point") else None,
                primal_value=data.get("primal"),
                dual_value=data.get("dual"),
                objective=data.get("objective"),
                rmsd=data.get("rmsd"),
                iterations=data.get("iterations", 0),
                wall_time_s=data.get("wall_time_s", 0.0),
                gradient_norm=data.get("gradient_norm"),
                delta=data.get("delta"),
                rho=data.get("rho", 0.0),
                mu=data.get("mu", 0.0),
                y_anchor=data.get("y_anchor"),
                config=data.get("config"),
                diagnostics=data.get("diagnostics"),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise SchemaError(f"invalid report document: {e}")
        if data.get("verification"):
            report.verification = VerificationRecord.from_dict(data["verification"])
        return report

    def __repr__(self) -> str:
        return f"SolveReport(status={self.status}, stage={self.stage}, gap={self.gap}, rmsd={self.rmsd})"
