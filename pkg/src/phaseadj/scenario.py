"""
Scenario and result files.

Both are JSON objects.  A scenario holds::

    {
      "positions": [0.0, 0.3, ...],          # wavelengths
      "gains": [1.12, 1.10, ...],            # or "weights": [[re, im], ...]
      "theta0_deg": -30.0,
      "thetaC_deg": 52.0,
      "rhoC_db": -30.0,                      # or "null" for an exact null
      "psiC_rad": 1.25                       # optional
    }

With ``gains`` the starting weight is ``g * a(theta0)``.  A result file keeps
the scenario under ``"scenario"`` and adds ``w_new`` (``[re, im]`` pairs),
``psi_used``, ``residual``, ``achieved_level_db`` and ``distortion_db``.
Floats are written with ``repr`` precision so every value reads back
bit-for-bit.
"""
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adjuster import AdjustmentReport, AdjustmentSpec
from .array_model import ArrayGeometry, build_preassigned_weight
from .errors import PhaseAdjustError

NULL_LEVEL = "null"


class ScenarioError(PhaseAdjustError, ValueError):
    """Malformed scenario or result file; the message names the field."""


def _number(obj, key, required=True):
    if key not in obj:
        if required:
            raise ScenarioError(f"missing field '{key}'")
        return None
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ScenarioError(f"field '{key}' must be a finite number, got {val!r}")
    return float(val)


def _real_list(obj, key):
    val = obj[key]
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"field '{key}' must be a list of numbers") from None
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ScenarioError(f"field '{key}' must be a non-empty list of finite numbers")
    return arr


def _complex_list(obj, key):
    val = obj[key]
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"field '{key}' must be a list of [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0 or not np.all(np.isfinite(arr)):
        raise ScenarioError(f"field '{key}' must be a non-empty list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _pairs(w):
    return [[float(c.real), float(c.imag)] for c in np.asarray(w, dtype=complex)]


@dataclass
class Scenario:
    positions: np.ndarray
    theta0_deg: float
    thetaC_deg: float
    rhoC_db: Optional[float]
    gains: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    psiC_rad: Optional[float] = None

    def __post_init__(self):
        if (self.gains is None) == (self.weights is None):
            raise ScenarioError("exactly one of 'gains' and 'weights' must be given")
        n = len(self.positions)
        other = self.gains if self.gains is not None else self.weights
        if len(other) != n:
            name = "gains" if self.gains is not None else "weights"
            raise ScenarioError(f"field '{name}' has {len(other)} entries for {n} positions")

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.positions)

    @property
    def w_pre(self) -> np.ndarray:
        if self.weights is not None:
            return np.asarray(self.weights, dtype=complex)
        return build_preassigned_weight(self.geometry, self.gains,
                                        math.radians(self.theta0_deg))

    @property
    def spec(self) -> AdjustmentSpec:
        return AdjustmentSpec.from_degrees(self.theta0_deg, self.thetaC_deg,
                                           self.rhoC_db, self.psiC_rad)

    @classmethod
    def from_dict(cls, obj) -> "Scenario":
        if not isinstance(obj, dict):
            raise ScenarioError("scenario must be a JSON object")
        if "positions" not in obj:
            raise ScenarioError("missing field 'positions'")
        positions = _real_list(obj, "positions")
        gains = weights = None
        if "gains" in obj and "weights" in obj:
            raise ScenarioError("fields 'gains' and 'weights' are mutually exclusive")
        if "gains" in obj:
            gains = _real_list(obj, "gains")
            if np.any(gains <= 0):
                raise ScenarioError("field 'gains' must be strictly positive")
        elif "weights" in obj:
            weights = _complex_list(obj, "weights")
        else:
            raise ScenarioError("one of fields 'gains' or 'weights' is required")
        if "rhoC_db" not in obj:
            raise ScenarioError("missing field 'rhoC_db'")
        rho = obj["rhoC_db"]
        if rho == NULL_LEVEL:
            rho_db = None
        else:
            rho_db = _number(obj, "rhoC_db")
        return cls(
            positions=positions,
            theta0_deg=_number(obj, "theta0_deg"),
            thetaC_deg=_number(obj, "thetaC_deg"),
            rhoC_db=rho_db,
            gains=gains,
            weights=weights,
            psiC_rad=_number(obj, "psiC_rad", required=False),
        )

    def to_dict(self) -> dict:
        out = {"positions": [float(p) for p in self.positions]}
        if self.gains is not None:
            out["gains"] = [float(g) for g in self.gains]
        else:
            out["weights"] = _pairs(self.weights)
        out["theta0_deg"] = float(self.theta0_deg)
        out["thetaC_deg"] = float(self.thetaC_deg)
        out["rhoC_db"] = NULL_LEVEL if self.rhoC_db is None else float(self.rhoC_db)
        if self.psiC_rad is not None:
            out["psiC_rad"] = float(self.psiC_rad)
        return out

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.to_dict() == other.to_dict()


@dataclass
class ResultFile:
    scenario: Scenario
    w_new: np.ndarray
    psi_used: float
    residual: float
    achieved_level_db: float
    distortion_db: float

    @classmethod
    def from_report(cls, scenario: Scenario, report: AdjustmentReport) -> "ResultFile":
        return cls(scenario, report.w_new, report.psi_used, report.residual,
                   report.level_db, report.distortion)

    def to_dict(self) -> dict:
        level = self.achieved_level_db
        return {
            "scenario": self.scenario.to_dict(),
            "w_new": _pairs(self.w_new),
            "psi_used": float(self.psi_used),
            "residual": float(self.residual),
            "achieved_level_db": "-inf" if level == -math.inf else float(level),
            "distortion_db": float(self.distortion_db),
        }

    @classmethod
    def from_dict(cls, obj) -> "ResultFile":
        if not isinstance(obj, dict) or "scenario" not in obj:
            raise ScenarioError("result file needs a 'scenario' object")
        scenario = Scenario.from_dict(obj["scenario"])
        if "w_new" not in obj:
            raise ScenarioError("missing field 'w_new'")
        w_new = _complex_list(obj, "w_new")
        if w_new.size != len(scenario.positions):
            raise ScenarioError(
                f"field 'w_new' has {w_new.size} entries for {len(scenario.positions)} positions")
        level = obj.get("achieved_level_db")
        level = -math.inf if level == "-inf" else _number(obj, "achieved_level_db")
        return cls(scenario, w_new, _number(obj, "psi_used"), _number(obj, "residual"),
                   level, _number(obj, "distortion_db"))


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from None


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    return Scenario.from_dict(_read_json(path))


def save_scenario(path, scenario: Scenario):
    _write_json(path, scenario.to_dict())


def load_result(path) -> ResultFile:
    return ResultFile.from_dict(_read_json(path))


def save_result(path, result: ResultFile):
    _write_json(path, result.to_dict())


def load_any(path):
    """Read either file kind; returns a :class:`ResultFile` or a :class:`Scenario`."""
    obj = _read_json(path)
    if isinstance(obj, dict) and "w_new" in obj:
        return ResultFile.from_dict(obj)
    return Scenario.from_dict(obj)
