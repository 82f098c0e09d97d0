"""Experiment configuration, reports and deterministic CSV/JSON emission."""

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import GridSpec

__all__ = ["ExperimentConfig", "NormReport", "emit_report", "load_report"]


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    return v


@dataclass
class ExperimentConfig:
    """Everything needed to rerun an experiment."""

    experiment: str
    grid: GridSpec = field(default_factory=lambda: GridSpec(1, 1024))
    resolutions: list = field(default_factory=list)
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output: str = "."
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.grid, dict):
            self.grid = GridSpec(**self.grid)
        res = [int(r) for r in self.resolutions]
        for r in res:
            if r < 16 or r & (r - 1):
                raise ValueError(f"resolution {r} is not a power of two >= 16")
        if any(b <= a for a, b in zip(res, res[1:])):
            raise ValueError("resolutions must be strictly ascending")
        self.resolutions = res
        self.seed = int(self.seed)

    @classmethod
    def from_dict(cls, d):
        known = {"experiment", "grid", "resolutions", "seed", "tolerances", "output", "params"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        d = asdict(self)
        d["grid"] = self.grid.to_dict()
        return _clean(d)

    def tolerance(self, name, default):
        return float(self.tolerances.get(name, default))


@dataclass
class NormReport:
    """Rows of per-run values plus named acceptance gates.

    Every row carries the ``resolution`` and ``seed`` that produced it.
    """

    experiment: str
    parameters: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    gates: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def add_row(self, resolution, seed, **values):
        row = {"resolution": int(resolution), "seed": int(seed)}
        row.update(_clean(values))
        self.rows.append(row)
        return row

    def gate(self, name, passed, value=None, threshold=None, **extra):
        g = {"passed": bool(passed), "value": _clean(value), "threshold": _clean(threshold)}
        g.update(_clean(extra))
        self.gates[name] = g
        return bool(passed)

    @property
    def passed(self):
        return all(g["passed"] for g in self.gates.values())

    def to_dict(self):
        return _clean({"experiment": self.experiment, "parameters": self.parameters,
                       "rows": self.rows, "gates": self.gates, "notes": self.notes})

    @classmethod
    def from_dict(cls, d):
        return cls(d["experiment"], d.get("parameters", {}), d.get("rows", []),
                   d.get("gates", {}), d.get("notes", {}))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _csv_text(rows):
    cols = sorted({k for r in rows for k in r}) or ["resolution", "seed"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def emit_report(report, out_dir, formats=("csv", "json")):
    """Write ``<experiment>.csv`` (rows) and ``<experiment>.json`` (everything).

    Output is deterministic: sorted columns and keys, ``repr`` floats.
    Returns the list of written paths.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir!r}: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise OSError(f"output directory {out_dir!r} is not writable")
    paths = []
    stem = os.path.join(out_dir, report.experiment)
    for fmt in formats:
        if fmt == "csv":
            text = _csv_text(report.to_dict()["rows"])
        elif fmt == "json":
            text = json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
        else:
            raise ValueError(f"unknown format {fmt!r}")
        path = f"{stem}.{fmt}"
        with open(path, "w", newline="") as fh:
            fh.write(text)
        paths.append(path)
    return paths


def load_report(path):
    with open(path) as fh:
        return NormReport.from_dict(json.load(fh))
