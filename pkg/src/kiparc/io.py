"""CSV tables, dataset loading and run manifests."""
from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DataError, OutputError
from .estimation.dataset import SCHEMAS, Dataset

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
WEIGHT_COLUMN = "weight"


def format_number(value):
    """Locale-independent text with 12 significant digits."""
    if isinstance(value, str):
        return value
    return f"{float(value) + 0.0:.12g}"


@dataclass(frozen=True)
class Table:
    """One CSV file: ``columns`` names and equal-length ``data`` columns.

    ``header`` entries become ``# key: value`` lines, in insertion order.
    """

    name: str
    columns: tuple
    data: tuple
    header: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.columns) != len(self.data):
            raise ValueError("one data column per column name")
        if len({len(c) for c in self.data}) > 1:
            raise ValueError("data columns must have equal length")

    def render(self):
        lines = [f"# {k}: {v}" for k, v in self.header.items()]
        lines.append(",".join(self.columns))
        for row in zip(*self.data):
            lines.append(",".join(format_number(v) for v in row))
        return "\n".join(lines) + "\n"


def format_params(params):
    """``key=value`` pairs joined by ``; `` for a header line."""
    return "; ".join(f"{k}={format_number(v)}" for k, v in params.items())


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """Provenance of one run; ``files`` holds name, byte count and sha256 per output."""

    scenario: str
    config: dict
    tool_version: str
    timestamp: str
    seed: int
    files: tuple
    inputs: tuple = ()

    def to_json(self):
        doc = asdict(self)
        doc["files"] = list(doc["files"])
        doc["inputs"] = list(doc["inputs"])
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def read(cls, path):
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        doc["files"] = tuple(doc["files"])
        doc["inputs"] = tuple(doc.get("inputs", ()))
        return cls(**doc)


def _atomic_write(path, text):
    tmp = path.with_name(path.name + ".part")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def export_artifacts(results, output_dir, *, force=False, provenance=None):
    """Write ``results`` (a list of :class:`Table`) and then the manifest.

    The manifest is written last, so its presence marks a completed run.
    Existing outputs are only replaced with ``force``; on any write failure
    the files of this run are removed.

    Parameters
    ----------
    provenance : dict, optional
        ``scenario``, ``config``, ``tool_version``, ``seed`` and ``inputs``
        for the manifest.

    Returns
    -------
    list of Path
        The CSV files followed by the manifest.
    """
    if not results:
        raise ValueError("nothing to export")
    names = [t.name for t in results]
    if len(set(names)) != len(names) or MANIFEST_NAME in names:
        raise ValueError("table names must be unique and differ from the manifest")
    out = Path(output_dir)
    targets = [out / n for n in names]
    manifest_path = out / MANIFEST_NAME
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc}") from exc
    existing = [p for p in (*targets, manifest_path) if p.exists()]
    if existing and not force:
        raise OutputError(
            f"{existing[0]} exists; pass --force to overwrite (export_artifacts(force=True))"
        )
    written = []
    try:
        # an old manifest must not vouch for files that are about to change
        manifest_path.unlink(missing_ok=True)
        files = []
        for table, path in zip(results, targets):
            _atomic_write(path, table.render())
            written.append(path)
            files.append({"name": path.name, "bytes": path.stat().st_size, "sha256": sha256_file(path)})
        prov = dict(provenance or {})
        manifest = RunManifest(
            scenario=prov.get("scenario", ""),
            config=prov.get("config", {}),
            tool_version=prov.get("tool_version", ""),
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            seed=int(prov.get("seed", 0)),
            files=tuple(files),
            inputs=tuple(prov.get("inputs", ())),
        )
        _atomic_write(manifest_path, manifest.to_json())
    except OSError as exc:
        for path in written:
            path.unlink(missing_ok=True)
        raise OutputError(f"writing outputs to {out} failed: {exc}") from exc
    return [*targets, manifest_path]


def _parse_header(line, lineno):
    cols = [c.strip() for c in line.split(",")]
    if any(not c for c in cols):
        raise DataError("empty column name in header", lineno)
    if len(set(cols)) != len(cols):
        raise DataError("duplicate column names in header", lineno)
    return cols


def load_dataset(path, kind):
    """Read a CSV file into a validated :class:`Dataset` of ``kind``.

    Lines starting with ``#`` are metadata (``# key: value``) and are kept in
    ``Dataset.meta``. The first other non-blank line names the columns; an
    optional ``weight`` column supplies inverse-variance weights.

    Raises
    ------
    DataError
        With the offending line number for malformed rows, or naming the
        missing or unexpected columns.
    """
    if kind not in SCHEMAS:
        raise DataError(f"unknown dataset kind {kind!r}")
    coord_names, value_names = SCHEMAS[kind]
    meta, header, rows, header_line = {}, None, [], 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if sep:
                    meta[key.strip()] = value.strip()
                continue
            if header is None:
                header, header_line = _parse_header(line, lineno), lineno
                continue
            fields = line.split(",")
            if len(fields) != len(header):
                raise DataError(f"expected {len(header)} fields, found {len(fields)}", lineno)
            try:
                row = [float(f) for f in fields]
            except ValueError:
                raise DataError(f"non-numeric field in {line!r}", lineno) from None
            if WEIGHT_COLUMN in header and not row[header.index(WEIGHT_COLUMN)] > 0:
                raise DataError("weights must be strictly positive", lineno)
            rows.append(row)
    if header is None:
        raise DataError(f"{path}: no column header found")
    missing = [c for c in coord_names if c not in header]
    if missing:
        raise DataError(f"missing columns for {kind}: {', '.join(missing)}", header_line)
    allowed = set(coord_names) | set(value_names) | {WEIGHT_COLUMN}
    unknown = [c for c in header if c not in allowed]
    if unknown:
        raise DataError(f"unexpected columns for {kind}: {', '.join(unknown)}", header_line)
    if not any(v in header for v in value_names):
        raise DataError(f"{kind} needs one of the columns: {', '.join(value_names)}", header_line)
    if not rows:
        raise DataError(f"{path}: no data rows")
    table = np.array(rows, dtype=float)
    col = {name: table[:, k] for k, name in enumerate(header)}
    data = Dataset(
        kind=kind,
        coordinates={c: col[c] for c in coord_names},
        values={v: col[v] for v in value_names if v in col},
        weights=col.get(WEIGHT_COLUMN),
        meta=meta,
    )
    log.info("loaded %d rows of %s data from %s", len(data), kind, path)
    for name, arr in (*data.coordinates.items(), *data.values.items()):
        finite = arr[np.isfinite(arr)]
        if finite.size:
            log.info("  %s in [%.6g, %.6g]", name, finite.min(), finite.max())
    return data
