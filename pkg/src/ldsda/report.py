"""Run reports (JSON) and lattice tables (CSV).

Reports carry no wall-clock fields unless timing is requested, so two runs
with the same inputs serialize to identical bytes.
"""
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from . import __version__
from .search import Stats

SCHEMA_VERSION = 1


@dataclass
class RunReport:
    command: str
    status: str
    objective: Optional[float] = None
    z: Optional[Tuple[int, ...]] = None
    certificate: Optional[str] = None
    counters: Dict[str, int] = field(default_factory=dict)
    trajectory: List[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    booleans: Optional[Dict[str, bool]] = None
    error: Optional[dict] = None
    extra: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION
    version: str = __version__

    def to_dict(self):
        d = asdict(self)
        d["z"] = list(self.z) if self.z is not None else None
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        if d.get("z") is not None:
            d["z"] = tuple(d["z"])
        d["trajectory"] = [dict(e, point=list(e["point"])) for e in d.get("trajectory", [])]
        return cls(**d)

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


def _finite(v):
    return v if v is not None and math.isfinite(v) else None


def trajectory_rows(trajectory, timing=False):
    rows = []
    for e in trajectory:
        row = {"point": list(e.point), "phase": e.phase, "status": e.status,
               "value": _finite(e.value), "accepted": e.accepted}
        if timing:
            row["elapsed"] = e.elapsed
        rows.append(row)
    return rows


def counters(stats: Stats):
    return asdict(stats)


def search_report(result, config, timing=False, elapsed=None):
    rep = RunReport(
        command="solve",
        status="budget_exhausted" if result.certificate == "budget-exhausted" else "ok",
        objective=_finite(result.f),
        z=tuple(result.z),
        certificate=result.certificate,
        counters=counters(result.stats),
        trajectory=trajectory_rows(result.trajectory, timing),
        config=dict(config),
        booleans=result.booleans,
    )
    if timing and elapsed is not None:
        rep.extra["wall_time"] = elapsed
    return rep


def error_report(command, status, kind, message, config=None):
    return RunReport(command=command, status=status, config=dict(config or {}),
                     error={"type": kind, "message": message})


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def load_report(path):
    with open(path, encoding="utf-8") as fh:
        return RunReport.from_dict(json.load(fh))


def lattice_csv(table):
    """CSV text: ``z_1..z_n,status,objective`` with rows in lexicographic order."""
    if not table:
        raise ValueError("lattice table is empty")
    n = len(table[0].z)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"z_{j}" for j in range(1, n + 1)] + ["status", "objective"])
    for row in sorted(table, key=lambda r: r.z):
        value = "" if row.value is None or not math.isfinite(row.value) else repr(float(row.value))
        w.writerow(list(row.z) + [row.status.upper(), value])
    return buf.getvalue()


def emit_lattice_csv(table, path):
    write_text(path, lattice_csv(table))
