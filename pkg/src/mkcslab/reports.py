"""Report objects, JSON/CSV serialisation, seeding and atomic writes."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__

SCHEMA_VERSION = 1

RNG_RULE = (
    "substream(i) = numpy.random.Generator(PCG64(SeedSequence([seed, i]))); "
    "matrix entries are generator.integers(0, 2, size=(d, n)) in row-major order"
)


def substream(seed: int, i: int) -> np.random.Generator:
    """Independent generator for work item ``i`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, i])))


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


@dataclass
class CensusReport:
    kind: str
    params: dict
    results: dict
    checks: dict[str, bool]
    rows: list[dict] = field(default_factory=list)
    mode: str = "exhaustive"
    config: dict | None = None
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def payload(self, include_timestamp: bool = True) -> dict:
        prov = {"tool": "mkcslab", "version": __version__, "schema": SCHEMA_VERSION,
                "rng": RNG_RULE}
        if include_timestamp:
            prov["timestamp"] = self.timestamp
        out = {
            "kind": self.kind,
            "mode": self.mode,
            "params": self.params,
            "results": self.results,
            "checks": self.checks,
            "passed": self.passed,
            "rows": self.rows,
            "provenance": prov,
        }
        if self.config is not None:
            out["config"] = self.config
        return _plain(out)

    def to_json(self, include_timestamp: bool = True) -> str:
        return json.dumps(self.payload(include_timestamp), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        """Flat projection: one line per row of ``rows``, params repeated."""
        rows = [{**_plain(self.params), **_plain(r)} for r in self.rows]
        buf = io.StringIO()
        if not rows:
            return ""
        fields = list(dict.fromkeys(k for r in rows for k in r))
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                             for k, v in r.items()})
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to ``path`` via a temp file in the same directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
