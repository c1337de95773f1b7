"""On-disk formats: datasets (line-delimited text) and run reports (JSON).

Dataset file::

    #gradualft-dataset format_version=1 feature_dim=3 num_classes=2
    in<TAB>1<TAB><TAB>0.5<TAB>-1.25<TAB>3.0
    out<TAB>0<TAB>en<TAB>...

Columns are domain tag, label, source (empty when absent) and the feature
values.  Floats are written with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from ..datamodel import Dataset, Domain, validate_dataset
from ..gradual import RunReport

DATASET_MAGIC = "#gradualft-dataset"
DATASET_VERSION = 1
REPORT_VERSION = 1

_HEADER = re.compile(
    r"#gradualft-dataset format_version=(\d+) feature_dim=(\d+) num_classes=(\d+)"
)


class DatasetFormatError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


def save_dataset(d: Dataset, path) -> None:
    lines = [f"{DATASET_MAGIC} format_version={DATASET_VERSION} "
             f"feature_dim={d.feature_dim} num_classes={d.num_classes}"]
    for i in range(len(d)):
        src = "" if d.source is None or d.source[i] is None else str(d.source[i])
        if "\t" in src or "\n" in src:
            raise ValueError(f"example {i}: source may not contain tabs or newlines")
        fields = [Domain(int(d.domain[i])).tag, str(int(d.y[i])), src]
        fields.extend(repr(float(v)) for v in d.X[i])
        lines.append("\t".join(fields))
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path) -> Dataset:
    text = Path(path).read_text()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetFormatError(path, 1, "missing header line")
    m = _HEADER.fullmatch(lines[0].strip())
    if not m:
        raise DatasetFormatError(path, 1, f"bad header {lines[0]!r}")
    version, feature_dim, num_classes = (int(g) for g in m.groups())
    if version != DATASET_VERSION:
        raise DatasetFormatError(path, 1, f"unsupported format_version {version}")

    X, y, dom, src = [], [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 3 + feature_dim:
            raise DatasetFormatError(
                path, lineno, f"expected {3 + feature_dim} fields, found {len(parts)}")
        try:
            domain = Domain.from_tag(parts[0])
            label = int(parts[1])
            feats = [float(v) for v in parts[3:]]
        except ValueError as e:
            raise DatasetFormatError(path, lineno, str(e)) from None
        if not all(np.isfinite(feats)):
            raise DatasetFormatError(path, lineno, "non-finite feature value")
        if not 0 <= label < num_classes:
            raise DatasetFormatError(path, lineno, f"label {label} outside [0, {num_classes})")
        X.append(feats)
        y.append(label)
        dom.append(int(domain))
        src.append(parts[2] or None)

    if not X:
        return Dataset.empty(feature_dim, num_classes)
    d = Dataset(np.array(X), y, dom, feature_dim, num_classes,
                source=None if all(s is None for s in src) else src)
    problems = validate_dataset(d)
    if problems:
        raise DatasetFormatError(path, 1, "; ".join(problems))
    return d


def report_to_json(r: RunReport) -> str:
    doc = {"format": "gradualft-run-report", "format_version": REPORT_VERSION, "status": "ok"}
    doc.update(r.to_dict())
    return json.dumps(doc, indent=1) + "\n"


def failure_to_json(regime: str, seed: int, error: str) -> str:
    doc = {
        "format": "gradualft-run-report",
        "format_version": REPORT_VERSION,
        "status": "failed",
        "regime": regime,
        "seed": seed,
        "error": error,
    }
    return json.dumps(doc, indent=1) + "\n"


def read_report_file(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "gradualft-run-report":
        raise ValueError(f"{path}: not a run report")
    if doc.get("format_version") != REPORT_VERSION:
        raise ValueError(f"{path}: unsupported report version {doc.get('format_version')!r}")
    return doc


def report_from_doc(doc: dict) -> RunReport:
    return RunReport.from_dict(doc)
