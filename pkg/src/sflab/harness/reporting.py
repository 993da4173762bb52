"""Reports and bit-stable persistence.

All writers produce byte-identical output for identical inputs: JSON
objects are emitted with sorted keys and no incidental whitespace, and
every float is formatted with %.17g (shortest exact form up to 17
significant digits).  Reports deliberately carry no timestamps or solve
times; the environment fingerprint covers configuration and library
versions only.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..lyapunov import PotentialTrace
from ..optimizers import Trajectory
from ..pep.curve import CurvePoint

__all__ = [
    "fmt_float",
    "canonical_json",
    "config_hash",
    "CheckResult",
    "Report",
    "trajectory_csv",
    "trajectory_dump",
    "potential_csv",
    "curve_csv",
    "export",
]


def fmt_float(x: float) -> str:
    if x != x:  # NaN
        return ""
    return "%.17g" % x


def _canon(obj):
    if isinstance(obj, dict):
        return "{" + ",".join(
            f"{json.dumps(str(k))}:{_canon(v)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))
        ) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "null"
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return fmt_float(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _canon(obj.tolist())
    raise ConfigError(f"cannot serialize object of type {type(obj).__name__}")


def canonical_json(obj) -> str:
    return _canon(obj) + "\n"


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


@dataclass
class CheckResult:
    """Outcome of one verification check.

    A failed inequality check always carries the first violating step
    and both sides (measured vs bound).  ``skip`` means the check could
    not be evaluated; the cause lives in ``detail['cause']``.
    """

    check: str
    status: str                     # pass | fail | skip
    measured: float | None = None
    bound: float | None = None
    slack: float | None = None
    first_violation_t: int | None = None
    seeds: list[int] | None = None
    detail: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "measured": self.measured,
            "bound": self.bound,
            "slack": self.slack,
            "first_violation_t": self.first_violation_t,
            "seeds": self.seeds,
            "detail": self.detail,
        }


@dataclass
class Report:
    config: dict
    checks: list[CheckResult]
    fingerprint: dict

    @property
    def overall(self) -> str:
        return "fail" if any(c.status == "fail" for c in self.checks) else "pass"

    def to_record(self) -> dict:
        return {
            "config": self.config,
            "fingerprint": self.fingerprint,
            "checks": [c.to_record() for c in self.checks],
            "overall": self.overall,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_record())


def make_fingerprint(cfg: dict, solver: str | None = None) -> dict:
    import cvxpy

    from .. import __version__

    fp = {
        "config_sha256": config_hash(cfg),
        "sflab": __version__,
        "numpy": np.__version__,
        "cvxpy": cvxpy.__version__,
    }
    if solver is not None:
        fp["solver"] = solver
    return fp


# -- CSV / binary writers ---------------------------------------------------

TRAJECTORY_COLUMNS = "t,f_x,grad_norm_sq,delta_norm_sq,eta_t,c_t1,beta_t"
POTENTIAL_COLUMNS = "t,A_t,V_t,descent_residual,delta_coeff"
CURVE_COLUMNS = "t,tau,weighted_tau,status"


def trajectory_csv(traj: Trajectory) -> str:
    dsq = traj.delta_norm_sq
    lines = [TRAJECTORY_COLUMNS]
    for t in range(traj.T + 1):
        lines.append(",".join([
            str(t),
            fmt_float(traj.f_x[t]),
            fmt_float(traj.grad_x_norm_sq[t]),
            fmt_float(dsq[t]),
            fmt_float(traj.schedule.eta(t)),
            fmt_float(traj.schedule.c(t)),
            fmt_float(traj.schedule.beta_at(t)),
        ]))
    return "\n".join(lines) + "\n"


def trajectory_dump(traj: Trajectory, path: str | Path) -> None:
    """Full-vector dump: flat little-endian float64, row-major, with a
    JSON sidecar describing array shapes and offsets (in elements)."""
    path = Path(path)
    arrays = {"xs": traj.xs, "oracle_grads": traj.oracle_grads}
    if traj.zs is not None:
        arrays["zs"] = traj.zs
    if traj.ys is not None:
        arrays["ys"] = traj.ys
    sidecar: dict = {"dtype": "<f8", "order": "C", "arrays": {}}
    offset = 0
    blobs = []
    for name, arr in sorted(arrays.items()):
        a = np.ascontiguousarray(arr, dtype="<f8")
        sidecar["arrays"][name] = {"shape": list(a.shape), "offset": offset}
        offset += a.size
        blobs.append(a.tobytes())
    path.write_bytes(b"".join(blobs))
    path.with_suffix(path.suffix + ".json").write_text(canonical_json(sidecar))


def potential_csv(trace: PotentialTrace) -> str:
    lines = [POTENTIAL_COLUMNS]
    for t in range(len(trace.V)):
        if math.isnan(trace.V[t]) and math.isnan(trace.A[t]):
            continue
        lines.append(",".join([
            str(t),
            fmt_float(trace.A[t]),
            fmt_float(trace.V[t]),
            fmt_float(trace.descent_residual[t]),
            fmt_float(trace.delta_coeff[t]),
        ]))
    return "\n".join(lines) + "\n"


def curve_csv(points: list[CurvePoint]) -> str:
    lines = [CURVE_COLUMNS]
    for p in points:
        lines.append(",".join([
            str(p.t),
            fmt_float(p.tau) if p.tau is not None else "",
            fmt_float(p.weighted) if p.weighted is not None else "",
            p.status,
        ]))
    return "\n".join(lines) + "\n"


def export(obj, path: str | Path, format: str) -> Path:
    """Write a report, trajectory, potential trace or curve to disk.

    Formats: 'json' or 'csv' (plus the binary trajectory dump via
    :func:`trajectory_dump`).  Unknown formats and unsupported
    combinations are rejected before anything is written.
    """
    if format not in ("json", "csv"):
        raise ConfigError(f"unknown export format {format!r} (expected 'json' or 'csv')")
    path = Path(path)

    if isinstance(obj, Report):
        if format == "csv":
            header = "check,status,measured,bound,slack,first_violation_t"
            rows = [header] + [
                ",".join([
                    c.check,
                    c.status,
                    fmt_float(c.measured) if c.measured is not None else "",
                    fmt_float(c.bound) if c.bound is not None else "",
                    fmt_float(c.slack) if c.slack is not None else "",
                    str(c.first_violation_t) if c.first_violation_t is not None else "",
                ])
                for c in obj.checks
            ]
            text = "\n".join(rows) + "\n"
        else:
            text = obj.to_json()
    elif isinstance(obj, Trajectory):
        text = trajectory_csv(obj) if format == "csv" else canonical_json(
            {"columns": TRAJECTORY_COLUMNS.split(","),
             "rows": [[float(v) if i else int(v) for i, v in enumerate(line.split(","))]
                      for line in trajectory_csv(obj).strip().split("\n")[1:]]})
    elif isinstance(obj, PotentialTrace):
        if format != "csv":
            raise ConfigError("potential traces export as csv")
        text = potential_csv(obj)
    elif isinstance(obj, list) and obj and isinstance(obj[0], CurvePoint):
        if format == "csv":
            text = curve_csv(obj)
        else:
            text = canonical_json([
                {"t": p.t, "tau": p.tau, "weighted_tau": p.weighted, "status": p.status}
                for p in obj
            ])
    elif isinstance(obj, dict):
        if format != "json":
            raise ConfigError("plain records export as json")
        text = canonical_json(obj)
    else:
        raise ConfigError(f"cannot export object of type {type(obj).__name__}")

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    return path
