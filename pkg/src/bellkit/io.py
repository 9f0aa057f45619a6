"""Dataset, state, model, and operator files: JSON schemas, parsing with
field-level diagnostics, and a canonical writer.

Parsing is split from domain validation on purpose: structural problems
(bad JSON, missing or unknown fields, wrong types) raise ParseError, while
value-level problems (probabilities out of range, bad sums) surface as
ValueError from the domain types.  The command line maps the two to
different exit codes.

The canonical writer emits two-space-indented JSON with a fixed key order
and a trailing newline, so write(parse(f)) is byte-identical for files in
canonical form.
"""
from __future__ import annotations

import hashlib
import json

from .bellstats import EXPERIMENT_KEYS, CoincidenceTable, ExperimentDataset, SinglesTable

SCHEMA_VERSION = 1

SINGLES_KEYS = ("A", "A'", "B", "B'")


class ParseError(ValueError):
    """A structural problem in an input file; ``location`` names the field."""

    def __init__(self, message: str, location: str = ""):
        prefix = f"{location}: " if location else ""
        super().__init__(prefix + message)
        self.location = location


def sha256_of_file(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def canonical_json(obj) -> str:
    """Canonical serialized form: 2-space indent, preserved key order."""
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(str(exc)) from exc


def _require(mapping: dict, key: str, kind, location: str):
    if key not in mapping:
        raise ParseError(f"missing required field {key!r}", location)
    value = mapping[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"field {key!r} must be a number", location)
        return float(value)
    if not isinstance(value, kind):
        raise ParseError(f"field {key!r} must be {kind.__name__}", location)
    return value


def _check_unknown(mapping: dict, allowed, location: str, strict: bool, warnings: list):
    unknown = [k for k in mapping if k not in allowed]
    for key in unknown:
        message = f"{location}: unknown field {key!r}" if location else f"unknown field {key!r}"
        if strict:
            raise ParseError(f"unknown field {key!r}", location)
        warnings.append(message)


def _number_list(value, length: int, location: str) -> list:
    if not isinstance(value, list) or len(value) != length:
        raise ParseError(f"expected a list of {length} numbers", location)
    out = []
    for i, x in enumerate(value):
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise ParseError(f"entry {i} must be a number", location)
        out.append(float(x))
    return out


def _outcome_labels(block: dict, location: str):
    a_labels = block.get("a_labels", ["1", "2"])
    b_labels = block.get("b_labels", ["1", "2"])
    for name, labels in (("a_labels", a_labels), ("b_labels", b_labels)):
        if not isinstance(labels, list) or len(labels) != 2 or not all(isinstance(s, str) for s in labels):
            raise ParseError(f"field {name!r} must be a list of two strings", location)
    return tuple(a_labels), tuple(b_labels)


# ---------------------------------------------------------------------------
# dataset files

def parse_dataset_file(path, strict: bool = False, sum_tol: float = 0.005):
    """Parse a dataset file into an ExperimentDataset.

    Returns (dataset, warnings).  ``sum_tol`` is the accepted deviation of
    each table's probability sum from 1 (rounded published tables need the
    loose default).
    """
    doc = _load_json(path)
    warnings: list = []
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    _check_unknown(
        doc,
        {"schema_version", "experiment", "n_subjects", "coincidence", "singles"},
        "",
        strict,
        warnings,
    )
    version = _require(doc, "schema_version", int, "")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version}")
    name = _require(doc, "experiment", str, "")
    n_subjects = doc.get("n_subjects")
    if n_subjects is not None and (not isinstance(n_subjects, int) or n_subjects <= 0):
        raise ParseError("field 'n_subjects' must be a positive integer")
    coincidence = _require(doc, "coincidence", dict, "")

    tables = {}
    for key in EXPERIMENT_KEYS:
        if key not in coincidence:
            raise ParseError(f"missing coincidence block {key!r}", "coincidence")
        block = coincidence[key]
        location = f"coincidence.{key}"
        if not isinstance(block, dict):
            raise ParseError("block must be an object", location)
        _check_unknown(
            block, {"a_labels", "b_labels", "probabilities", "counts"}, location, strict, warnings
        )
        a_labels, b_labels = _outcome_labels(block, location)
        has_probs = "probabilities" in block
        has_counts = "counts" in block
        if has_probs == has_counts:
            raise ParseError("block needs exactly one of 'probabilities' or 'counts'", location)
        if has_counts:
            raw = block["counts"]
            if (
                not isinstance(raw, list)
                or len(raw) != 4
                or not all(isinstance(c, int) and not isinstance(c, bool) for c in raw)
            ):
                raise ParseError("field 'counts' must be a list of 4 integers", location)
            if n_subjects is None:
                raise ParseError("counts blocks require 'n_subjects'", location)
            tables[key] = CoincidenceTable.from_counts(
                key, tuple(raw), n_subjects, a_labels=a_labels, b_labels=b_labels
            )
        else:
            probs = _number_list(block["probabilities"], 4, location)
            tables[key] = CoincidenceTable(
                key, *probs, a_labels=a_labels, b_labels=b_labels, sum_tol=sum_tol
            )
    extra_blocks = [k for k in coincidence if k not in EXPERIMENT_KEYS]
    for key in extra_blocks:
        message = f"coincidence: unknown block {key!r}"
        if strict:
            raise ParseError(f"unknown block {key!r}", "coincidence")
        warnings.append(message)

    singles = None
    if "singles" in doc:
        raw_singles = doc["singles"]
        if not isinstance(raw_singles, dict):
            raise ParseError("field 'singles' must be an object")
        probabilities = {}
        labels = {}
        for side, entry in raw_singles.items():
            location = f"singles.{side}"
            if side not in SINGLES_KEYS:
                if strict:
                    raise ParseError(f"unknown side {side!r}", "singles")
                warnings.append(f"singles: unknown side {side!r}")
                continue
            if not isinstance(entry, dict):
                raise ParseError("entry must be an object", location)
            _check_unknown(entry, {"labels", "probabilities"}, location, strict, warnings)
            pair = _number_list(_require(entry, "probabilities", list, location), 2, location)
            probabilities[side] = tuple(pair)
            if "labels" in entry:
                side_labels = entry["labels"]
                if not isinstance(side_labels, list) or len(side_labels) != 2:
                    raise ParseError("field 'labels' must be a list of two strings", location)
                labels[side] = tuple(side_labels)
        singles = SinglesTable(probabilities=probabilities, labels=labels)

    dataset = ExperimentDataset(name=name, tables=tables, singles=singles, n_subjects=n_subjects)
    return dataset, warnings


def dataset_to_dict(dataset: ExperimentDataset) -> dict:
    """Canonical dict form of a dataset (inverse of parse_dataset_file)."""
    doc: dict = {"schema_version": SCHEMA_VERSION, "experiment": dataset.name}
    if dataset.n_subjects is not None:
        doc["n_subjects"] = dataset.n_subjects
    coincidence = {}
    for key in EXPERIMENT_KEYS:
        table = dataset.tables[key]
        block: dict = {}
        if table.a_labels != ("1", "2") or table.b_labels != ("1", "2"):
            block["a_labels"] = list(table.a_labels)
            block["b_labels"] = list(table.b_labels)
        if table.counts is not None:
            block["counts"] = list(table.counts)
        else:
            block["probabilities"] = [table.p11, table.p12, table.p21, table.p22]
        coincidence[key] = block
    doc["coincidence"] = coincidence
    if dataset.singles is not None:
        singles = {}
        for side in SINGLES_KEYS:
            if side not in dataset.singles.probabilities:
                continue
            entry: dict = {}
            if side in dataset.singles.labels:
                entry["labels"] = list(dataset.singles.labels[side])
            entry["probabilities"] = list(dataset.singles.probabilities[side])
            singles[side] = entry
        doc["singles"] = singles
    return doc


def write_dataset_file(dataset: ExperimentDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(dataset_to_dict(dataset)))


# ---------------------------------------------------------------------------
# state, model, and operator files (plain-structure layer; domain objects
# are built in modelfit)

def _parse_polar_vector(entry: dict, dim: int, location: str, strict: bool, warnings: list,
                        extra_keys: frozenset = frozenset()) -> dict:
    if not isinstance(entry, dict):
        raise ParseError("expected an object with amplitudes and phases", location)
    _check_unknown(entry, {"amplitudes", "phases_deg"} | extra_keys, location, strict, warnings)
    return {
        "amplitudes": _number_list(_require(entry, "amplitudes", list, location), dim, location),
        "phases_deg": _number_list(_require(entry, "phases_deg", list, location), dim, location),
    }


def parse_state_file(path, strict: bool = False):
    """Parse a state file into a plain dict; returns (content, warnings)."""
    doc = _load_json(path)
    warnings: list = []
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    _check_unknown(
        doc, {"schema_version", "kind", "amplitudes", "phases_deg", "provenance"}, "", strict, warnings
    )
    version = _require(doc, "schema_version", int, "")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version}")
    kind = doc.get("kind", "state")
    if kind != "state":
        raise ParseError(f"expected kind 'state', got {kind!r}")
    content = _parse_polar_vector(
        doc, 4, "", strict, warnings, extra_keys=frozenset({"schema_version", "kind", "provenance"})
    )
    provenance = doc.get("provenance", "user")
    if provenance not in ("reference", "fitted", "user"):
        raise ParseError(f"unknown provenance {provenance!r}")
    content["provenance"] = provenance
    return content, warnings


def state_to_dict(amplitudes, phases_deg, provenance: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "state",
        "amplitudes": [float(a) for a in amplitudes],
        "phases_deg": [float(p) for p in phases_deg],
        "provenance": provenance,
    }


def parse_model_file(path, strict: bool = False):
    """Parse a model file (state + four measurement bases) into plain dicts."""
    doc = _load_json(path)
    warnings: list = []
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    _check_unknown(doc, {"schema_version", "kind", "state", "measurements"}, "", strict, warnings)
    version = _require(doc, "schema_version", int, "")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version}")
    kind = doc.get("kind", "model")
    if kind != "model":
        raise ParseError(f"expected kind 'model', got {kind!r}")
    content: dict = {"state": None, "measurements": {}}
    if "state" in doc:
        state_block = doc["state"]
        location = "state"
        if not isinstance(state_block, dict):
            raise ParseError("must be an object", location)
        state = _parse_polar_vector(
            state_block, 4, location, strict, warnings, extra_keys=frozenset({"provenance"})
        )
        provenance = state_block.get("provenance", "user")
        if provenance not in ("reference", "fitted", "user"):
            raise ParseError(f"unknown provenance {provenance!r}", location)
        state["provenance"] = provenance
        content["state"] = state
    measurements = _require(doc, "measurements", dict, "")
    for key in EXPERIMENT_KEYS:
        if key not in measurements:
            raise ParseError(f"missing measurement block {key!r}", "measurements")
        block = measurements[key]
        location = f"measurements.{key}"
        if not isinstance(block, dict):
            raise ParseError("must be an object", location)
        _check_unknown(
            block, {"a_labels", "b_labels", "eigenvalues", "eigenvectors"}, location, strict, warnings
        )
        a_labels, b_labels = _outcome_labels(block, location)
        eigenvalues = _number_list(_require(block, "eigenvalues", list, location), 4, location)
        raw_vectors = _require(block, "eigenvectors", list, location)
        if len(raw_vectors) != 4:
            raise ParseError("field 'eigenvectors' must list four vectors", location)
        vectors = [
            _parse_polar_vector(v, 4, f"{location}.eigenvectors[{i}]", strict, warnings)
            for i, v in enumerate(raw_vectors)
        ]
        content["measurements"][key] = {
            "a_labels": a_labels,
            "b_labels": b_labels,
            "eigenvalues": eigenvalues,
            "eigenvectors": vectors,
        }
    unknown_blocks = [k for k in measurements if k not in EXPERIMENT_KEYS]
    for key in unknown_blocks:
        if strict:
            raise ParseError(f"unknown measurement block {key!r}", "measurements")
        warnings.append(f"measurements: unknown block {key!r}")
    return content, warnings


def model_to_dict(state_entry, measurement_entries: dict) -> dict:
    """Canonical dict form of a model file.

    ``state_entry`` is None or (amplitudes, phases_deg, provenance);
    ``measurement_entries`` maps experiment keys to dicts with a_labels,
    b_labels, eigenvalues, and eigenvectors given as (amplitudes, phases)
    pairs.
    """
    doc: dict = {"schema_version": SCHEMA_VERSION, "kind": "model"}
    if state_entry is not None:
        amplitudes, phases_deg, provenance = state_entry
        doc["state"] = {
            "amplitudes": [float(a) for a in amplitudes],
            "phases_deg": [float(p) for p in phases_deg],
            "provenance": provenance,
        }
    measurements = {}
    for key in EXPERIMENT_KEYS:
        entry = measurement_entries[key]
        block = {
            "a_labels": list(entry["a_labels"]),
            "b_labels": list(entry["b_labels"]),
            "eigenvalues": [float(v) for v in entry["eigenvalues"]],
            "eigenvectors": [
                {
                    "amplitudes": [float(a) for a in amps],
                    "phases_deg": [float(p) for p in phases],
                }
                for amps, phases in entry["eigenvectors"]
            ],
        }
        measurements[key] = block
    doc["measurements"] = measurements
    return doc


def parse_operator_file(path, strict: bool = False):
    """Parse an operator file into a 4x4 complex matrix (as nested lists)."""
    doc = _load_json(path)
    warnings: list = []
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    _check_unknown(doc, {"schema_version", "kind", "matrix"}, "", strict, warnings)
    version = _require(doc, "schema_version", int, "")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version}")
    kind = doc.get("kind", "operator")
    if kind != "operator":
        raise ParseError(f"expected kind 'operator', got {kind!r}")
    matrix = _require(doc, "matrix", list, "")
    if len(matrix) != 4:
        raise ParseError("field 'matrix' must have 4 rows")
    rows = []
    for i, row in enumerate(matrix):
        if not isinstance(row, list) or len(row) != 4:
            raise ParseError(f"row {i} must have 4 entries", "matrix")
        entries = []
        for j, cell in enumerate(row):
            if not isinstance(cell, list) or len(cell) != 2:
                raise ParseError(f"entry ({i},{j}) must be a [re, im] pair", "matrix")
            re, im = cell
            for part in (re, im):
                if not isinstance(part, (int, float)) or isinstance(part, bool):
                    raise ParseError(f"entry ({i},{j}) must hold numbers", "matrix")
            entries.append(complex(float(re), float(im)))
        rows.append(entries)
    return rows, warnings


def operator_to_dict(matrix) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "operator",
        "matrix": [[[float(cell.real), float(cell.imag)] for cell in row] for row in matrix],
    }
