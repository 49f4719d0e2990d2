"""File formats.

* prediction pairs: CSV with header
  ``model_id,individual_id,value_original,value_flipped[,label]``
* response matrix: CSV, first row ``model_id,<individual ids...>``, then one
  row per model
* fit reports / parameter sets / manifests: JSON with ``format_version``
* ICC curves: long CSV ``individual_id,theta,response`` plus a
  ``<name>.meta.json`` sidecar

Floats are written with ``repr`` so every value reads back bit-exactly.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from fairirt.analysis import DisentangleRecord, IndividualSummary, ModelSummary, tabulate_icc
from fairirt.errors import FormatError, InputError
from fairirt.fit import FitConfig, FitReport
from fairirt.irt import FitParameters, ResponseMatrix
from fairirt.metrics import PredictionPairRecord

FORMAT_VERSION = 1
PAIR_COLUMNS = ("model_id", "individual_id", "value_original", "value_flipped")


def _num(x) -> str:
    return repr(float(x))


def _open_for_write(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from None


def _open_for_read(path):
    try:
        return open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def _parse_float(text, what, errors, line):
    try:
        val = float(text)
    except (TypeError, ValueError):
        errors.append(f"line {line}: {what} {text!r} is not a number")
        return None
    if not math.isfinite(val):
        errors.append(f"line {line}: {what} {text!r} is not finite")
        return None
    return val


# ---------------------------------------------------------------------------
# prediction pairs
# ---------------------------------------------------------------------------

def read_prediction_pairs(path) -> list[PredictionPairRecord]:
    """Parse a prediction-pair CSV; every malformed row is reported at once."""
    with _open_for_read(path) as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in PAIR_COLUMNS if c not in header]
        if missing:
            raise FormatError(f"{path}: missing required column(s) {missing}")
        has_label = "label" in header
        records, errors, seen = [], [], {}
        for row in reader:
            line = reader.line_num
            if None in row or any(row.get(c) is None for c in PAIR_COLUMNS):
                errors.append(f"line {line}: wrong number of fields")
                continue
            model, ind = row["model_id"].strip(), row["individual_id"].strip()
            if not model or not ind:
                errors.append(f"line {line}: empty model_id or individual_id")
                continue
            vo = _parse_float(row["value_original"], "value_original", errors, line)
            vf = _parse_float(row["value_flipped"], "value_flipped", errors, line)
            label = None
            if has_label and (row.get("label") or "").strip() != "":
                text = row["label"].strip()
                if text not in ("0", "1"):
                    errors.append(f"line {line}: label {text!r} is not 0 or 1")
                    continue
                label = int(text)
            key = (model, ind)
            if key in seen:
                errors.append(f"line {line}: duplicate pair ({model}, {ind}), first seen on line {seen[key]}")
                continue
            seen[key] = line
            if vo is None or vf is None:
                continue
            records.append(PredictionPairRecord(model, ind, vo, vf, label))
    if errors:
        raise FormatError(f"{path}: " + "; ".join(errors))
    if not records:
        raise FormatError(f"{path}: no records")
    return records


def write_prediction_pairs(records, path):
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        with_label = any(r.label is not None for r in records)
        w.writerow(PAIR_COLUMNS + (("label",) if with_label else ()))
        for r in records:
            row = [r.model_id, r.individual_id, _num(r.value_original), _num(r.value_flipped)]
            if with_label:
                row.append("" if r.label is None else str(r.label))
            w.writerow(row)


# ---------------------------------------------------------------------------
# response matrix
# ---------------------------------------------------------------------------

def write_response_matrix(matrix: ResponseMatrix, path):
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model_id", *matrix.individual_ids])
        for mid, row in zip(matrix.model_ids, matrix.values):
            w.writerow([mid, *(_num(x) for x in row)])


def read_response_matrix(path) -> ResponseMatrix:
    with _open_for_read(path) as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise FormatError(f"{path}: need a header row and at least one data row")
    header = rows[0]
    individuals = header[1:]
    width = len(header)
    models, values, errors = [], [], []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            errors.append(f"line {k}: expected {width} fields, got {len(row)} (ragged row)")
            continue
        models.append(row[0])
        values.append([_parse_float(x, "value", errors, k) for x in row[1:]])
    if errors:
        raise FormatError(f"{path}: " + "; ".join(errors))
    try:
        return ResponseMatrix.from_values(np.array(values, dtype=float), models, individuals)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------

def _write_json(doc, path):
    with _open_for_write(path) as fh:
        json.dump(doc, fh, indent=1, allow_nan=False)
        fh.write("\n")


def _read_json(path, kind):
    with _open_for_read(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: truncated or malformed JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    if kind is not None and doc.get("kind") != kind:
        raise FormatError(f"{path}: expected a {kind!r} document, got {doc.get('kind')!r}")
    return doc


def _require(doc, path, *keys):
    missing = [k for k in keys if k not in doc]
    if missing:
        raise FormatError(f"{path}: missing field(s) {missing}")


def parameters_to_dict(params: FitParameters, model_ids=(), individual_ids=()):
    return {
        "model_ids": list(model_ids),
        "individual_ids": list(individual_ids),
        "abilities": [float(x) for x in params.abilities],
        "difficulties": [float(x) for x in params.difficulties],
        "discriminations": [float(x) for x in params.discriminations],
        "rasch_constrained": bool(params.rasch_constrained),
    }


def _parameters_from_dict(doc, path):
    _require(doc, path, "abilities", "difficulties", "discriminations", "rasch_constrained")
    try:
        return FitParameters.from_arrays(doc["abilities"], doc["difficulties"], doc["discriminations"],
                                         rasch_constrained=doc["rasch_constrained"])
    except (InputError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: invalid parameters ({exc})") from None


def write_parameters(params: FitParameters, path, model_ids=(), individual_ids=()):
    doc = {"format_version": FORMAT_VERSION, "kind": "parameters"}
    doc.update(parameters_to_dict(params, model_ids, individual_ids))
    _write_json(doc, path)


def read_parameters(path) -> FitParameters:
    return _parameters_from_dict(_read_json(path, "parameters"), path)


def write_fit_report(report: FitReport, path):
    doc = {"format_version": FORMAT_VERSION, "kind": "fit_report"}
    doc.update(parameters_to_dict(report.parameters, report.model_ids, report.individual_ids))
    doc.update({
        "final_loss": float(report.final_loss),
        "converged": bool(report.converged),
        "epochs_run": int(report.epochs_run),
        "clamp_count": int(report.clamp_count),
        "config": report.config.to_dict(),
        "loss_trace": [float(x) for x in report.loss_trace],
    })
    _write_json(doc, path)


def read_fit_report(path) -> FitReport:
    doc = _read_json(path, "fit_report")
    _require(doc, path, "final_loss", "converged", "epochs_run", "clamp_count", "config", "loss_trace")
    params = _parameters_from_dict(doc, path)
    try:
        config = FitConfig(**doc["config"])
        trace = np.array(doc["loss_trace"], dtype=float)
        trace.setflags(write=False)
        return FitReport(
            parameters=params,
            final_loss=float(doc["final_loss"]),
            loss_trace=trace,
            converged=bool(doc["converged"]),
            epochs_run=int(doc["epochs_run"]),
            clamp_count=int(doc["clamp_count"]),
            config=config,
            model_ids=tuple(doc.get("model_ids") or ()),
            individual_ids=tuple(doc.get("individual_ids") or ()),
        )
    except (InputError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: invalid fit report ({exc})") from None


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def write_model_summaries(rows: list[ModelSummary], path):
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "model_id", "ability", "mean_fitted_response", "mean_observed_response"])
        for k, r in enumerate(rows, start=1):
            obs = "" if r.mean_observed_response is None else _num(r.mean_observed_response)
            w.writerow([k, r.model_id, _num(r.ability), _num(r.mean_fitted_response), obs])


def write_individual_summaries(rows: list[IndividualSummary], path):
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["individual_id", "difficulty", "discrimination", "flatness", "special"])
        for r in rows:
            w.writerow([r.individual_id, _num(r.difficulty), _num(r.discrimination), _num(r.flatness),
                        "true" if r.special else "false"])


def write_disentangle(records: list[list[DisentangleRecord]], path):
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model_id", "individual_id", "log_delta", "log_theta", "g_value", "flag"])
        for row in records:
            for r in row:
                w.writerow([r.model_id, r.individual_id, _num(r.log_delta), _num(r.log_theta),
                            _num(r.g_value), r.flag.value])


def curve_meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def export_curves(report: FitReport, grid_size, path):
    """Long-format ICC table for every individual plus a metadata sidecar.

    The sidecar records the fitted ability range, i.e. the part of each
    curve actually supported by the evaluated models.
    """
    p = report.parameters
    ids = report.individual_ids or tuple(f"j{j}" for j in range(p.n_individuals))
    tables = [tabulate_icc(p.item(j), grid_size) for j in range(p.n_individuals)]
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["individual_id", "theta", "response"])
        for ind, table in zip(ids, tables):
            for theta, resp in table:
                w.writerow([ind, _num(theta), _num(resp)])
    meta = {
        "format_version": FORMAT_VERSION,
        "kind": "curve_metadata",
        "grid_size": int(grid_size),
        "n_individuals": p.n_individuals,
        "fitted_ability_min": float(p.abilities.min()),
        "fitted_ability_max": float(p.abilities.max()),
        "rasch_constrained": bool(p.rasch_constrained),
    }
    _write_json(meta, curve_meta_path(path))
    return Path(path)


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

MANIFEST_SECTIONS = ("inputs", "simulate", "metric", "fit", "analysis", "output_dir")


def read_manifest(path) -> dict:
    """Load a workspace manifest and resolve its paths against its own folder."""
    path = Path(path)
    doc = _read_json(path, None)
    unknown = [k for k in doc if k not in MANIFEST_SECTIONS + ("format_version", "kind", "description")]
    if unknown:
        raise FormatError(f"{path}: unknown manifest field(s) {unknown}")
    inputs = doc.get("inputs") or {}
    if not isinstance(inputs, dict):
        raise FormatError(f"{path}: 'inputs' must be an object")
    sources = [k for k in ("pairs", "matrix") if k in inputs] + (["simulate"] if "simulate" in doc else [])
    if len(sources) != 1:
        raise FormatError(f"{path}: give exactly one of inputs.pairs, inputs.matrix or simulate (got {sources})")
    base = path.parent
    resolved = dict(doc)
    resolved["inputs"] = {k: str((base / v).resolve()) for k, v in inputs.items()}
    resolved["output_dir"] = str((base / doc.get("output_dir", "out")).resolve())
    for key in ("simulate", "metric", "fit", "analysis"):
        section = doc.get(key, {})
        if not isinstance(section, dict):
            raise FormatError(f"{path}: '{key}' must be an object")
        resolved[key] = section
    return resolved
