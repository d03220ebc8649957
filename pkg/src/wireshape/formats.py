"""On-disk formats.

Angles are degrees at this boundary and radians everywhere else. Degrees are
written with 14 significant digits so that re-reading and re-writing a file
reproduces it byte for byte.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .calibration import calibrate
from .machine import MachineLimits
from .wire import ActionProgram, ActionStep, BendLaw, Centerline, WireSpec

SCHEMA_VERSION = 1
CENTERLINE_HEADER = ["k", "x_mm", "y_mm", "z_mm"]


class FormatError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + msg)


def deg_out(rad: float) -> float:
    return float(f"{math.degrees(rad):.14g}")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, e.lineno, e.colno) from None


def _build(cls, data: dict, what: str):
    if not isinstance(data, dict):
        raise FormatError(f"{what} must be an object")
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise FormatError(f"unknown {what} field(s): {', '.join(sorted(extra))}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise FormatError(f"invalid {what}: {e}") from None


# action program

def program_to_dict(p: ActionProgram) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "units": {"angle": "deg", "length": "mm"},
        "wire": {
            "diameter_mm": p.wire.diameter,
            "shapeable_length_mm": p.wire.shapeable_length,
            "total_length_mm": p.wire.total_length,
            "segment_length_mm": p.wire.segment_length,
            "n": p.wire.n,
        },
        "steps": [{"k": s.k, "phi_deg": deg_out(s.phi), "beta": s.beta, "delta_mm": s.delta}
                  for s in p.steps],
    }


def wire_from_dict(d: dict) -> WireSpec:
    try:
        return WireSpec(diameter=d["diameter_mm"], shapeable_length=d["shapeable_length_mm"],
                        total_length=d["total_length_mm"], segment_length=d["segment_length_mm"],
                        n=d["n"])
    except KeyError as e:
        raise FormatError(f"wire is missing {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise FormatError(f"invalid wire: {e}") from None


def wire_to_dict(w: WireSpec) -> dict:
    return program_to_dict(ActionProgram(w))["wire"]


def program_from_dict(d: dict) -> ActionProgram:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise FormatError(f"unsupported schema_version {d.get('schema_version')!r}")
    wire = wire_from_dict(d.get("wire", {}))
    steps = []
    for i, s in enumerate(d.get("steps", []), start=1):
        try:
            steps.append(ActionStep(s["k"], math.radians(s["phi_deg"]), s["beta"], s["delta_mm"]))
        except KeyError as e:
            raise FormatError(f"step {i} is missing {e.args[0]!r}") from None
        except (TypeError, ValueError) as e:
            raise FormatError(f"step {i}: {e}") from None
    try:
        return ActionProgram(wire, tuple(steps))
    except ValueError as e:
        raise FormatError(str(e)) from None


def program_to_json(p: ActionProgram) -> str:
    return _dumps(program_to_dict(p))


def program_from_json(text: str) -> ActionProgram:
    return program_from_dict(_loads(text))


# centerline

def centerline_to_csv(c: Centerline) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CENTERLINE_HEADER)
    for k, (x, y, z) in enumerate(c.points):
        w.writerow([k, repr(float(x)), repr(float(y)), repr(float(z))])
    return buf.getvalue()


def centerline_from_csv(text: str) -> Centerline:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != CENTERLINE_HEADER:
        raise FormatError(f"expected header {','.join(CENTERLINE_HEADER)}", 1, 1)
    pts = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 4:
            raise FormatError(f"expected 4 columns, got {len(row)}", lineno, 1)
        try:
            k = int(row[0])
        except ValueError:
            raise FormatError(f"bad index {row[0]!r}", lineno, 1) from None
        if k != len(pts):
            raise FormatError(f"expected k={len(pts)}, got {k}", lineno, 1)
        xyz = []
        col = len(row[0]) + 2
        for cell in row[1:]:
            try:
                xyz.append(float(cell))
            except ValueError:
                raise FormatError(f"bad coordinate {cell!r}", lineno, col) from None
            col += len(cell) + 1
        pts.append(xyz)
    try:
        return Centerline(np.array(pts, dtype=float).reshape(-1, 3))
    except ValueError as e:
        raise FormatError(str(e)) from None


# project configuration

def _default_law() -> BendLaw:
    # 10 x 2 mm test arc with a mean chord of 18.7 mm
    return BendLaw.constant(1.0, calibrate(2.0, 10, [18.7]).theta_star)


@dataclass(frozen=True)
class ProjectConfig:
    wire: WireSpec = field(default_factory=WireSpec)
    bend_law: BendLaw = field(default_factory=_default_law)
    machine: MachineLimits = field(default_factory=MachineLimits)
    beta_nominal: float = 1.0


def config_to_json(cfg: ProjectConfig) -> str:
    return _dumps({
        "schema_version": SCHEMA_VERSION,
        "units": {"angle": "deg", "length": "mm"},
        "wire": wire_to_dict(cfg.wire),
        "bend_law": [[b, deg_out(t)] for b, t in cfg.bend_law.table],
        "machine": asdict(cfg.machine),
        "beta_nominal": cfg.beta_nominal,
    })


def config_from_json(text: str) -> ProjectConfig:
    d = _loads(text)
    if not isinstance(d, dict):
        raise FormatError("config must be an object")
    if d.get("schema_version") != SCHEMA_VERSION:
        raise FormatError(f"unsupported schema_version {d.get('schema_version')!r}")
    default = ProjectConfig()
    wire = wire_from_dict(d["wire"]) if "wire" in d else default.wire
    law = default.bend_law
    if "bend_law" in d:
        try:
            law = BendLaw(tuple((b, math.radians(t)) for b, t in d["bend_law"]))
        except (TypeError, ValueError) as e:
            raise FormatError(f"invalid bend_law: {e}") from None
    machine = _build(MachineLimits, d["machine"], "machine") if "machine" in d else default.machine
    beta = d.get("beta_nominal", default.beta_nominal)
    if not isinstance(beta, (int, float)) or not 0 < beta <= 1:
        raise FormatError("beta_nominal must lie in (0, 1]")
    return ProjectConfig(wire, law, machine, float(beta))
