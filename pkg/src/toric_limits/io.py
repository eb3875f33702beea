"""JSON formats for configurations, lifts, weights, sequences and point clouds."""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .pointconfig import FLOAT, RATIONAL, PointConfiguration, new_configuration
from .secfan import SequenceSpec
from .subdivision import Subdivision, subdivision_from_facets
from .toric import PointCloud

SIG_DIGITS = 12


class InputError(ValueError):
    """Malformed input; the message names the file, the field and, for syntax errors, the line."""


def read_json(path) -> tuple[dict, str]:
    """Parsed document and the sha256 of the raw bytes."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        data = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise InputError(f"{path}: not UTF-8 text") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return data, hashlib.sha256(raw).hexdigest()


def _field(data, key, where, kind=None):
    if not isinstance(data, dict) or key not in data:
        raise InputError(f"{where}: missing field '{key}'")
    val = data[key]
    if kind is not None and not isinstance(val, kind):
        raise InputError(f"{where}: field '{key}' has the wrong type")
    return val


def parse_number(x, where: str):
    """int, float, or a 'p/q' string; bools are rejected."""
    if isinstance(x, bool):
        raise InputError(f"{where}: expected a number, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InputError(f"{where}: non-finite number")
        return x
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{where}: cannot parse {x!r} as a rational number") from None
    raise InputError(f"{where}: expected a number, got {type(x).__name__}")


def parse_config(data, where: str = "config") -> PointConfiguration:
    dim = _field(data, "dim", where)
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise InputError(f"{where}: field 'dim' must be a positive integer")
    pts = _field(data, "points", where, list)
    mode = data.get("mode")
    if mode is not None and mode not in (RATIONAL, FLOAT):
        raise InputError(f"{where}: field 'mode' must be '{RATIONAL}' or '{FLOAT}'")
    labeled = []
    for k, item in enumerate(pts):
        w = f"{where}: points[{k}]"
        label = _field(item, "label", w, str)
        coord = _field(item, "coord", w, list)
        labeled.append((label, [parse_number(c, f"{w}.coord[{j}]") for j, c in enumerate(coord)]))
    try:
        return new_configuration(dim, labeled, mode)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def config_to_dict(A: PointConfiguration) -> dict:
    return {"dim": A.dim, "mode": A.mode,
            "points": [{"label": lab, "coord": [str(c) if isinstance(c, Fraction) else c for c in coord]}
                       for lab, coord in zip(A.labels, A.coords)]}


def _per_label(A: PointConfiguration, values, where: str, default=None) -> list:
    if isinstance(values, dict):
        unknown = sorted(set(values) - set(A.labels))
        if unknown:
            raise InputError(f"{where}: unknown label {unknown[0]!r}")
        missing = [lab for lab in A.labels if lab not in values]
        if missing and default is None:
            raise InputError(f"{where}: missing value for label {missing[0]!r}")
        return [parse_number(values.get(lab, default), f"{where}[{lab!r}]") for lab in A.labels]
    if isinstance(values, list):
        if len(values) != A.n:
            raise InputError(f"{where}: expected {A.n} values, got {len(values)}")
        return [parse_number(v, f"{where}[{k}]") for k, v in enumerate(values)]
    raise InputError(f"{where}: expected a mapping from labels to numbers")


def parse_lift(data, A: PointConfiguration, where: str = "lift"):
    """{"lift": {label: num}} or a bare mapping/list."""
    vals = data.get("lift", data) if isinstance(data, dict) else data
    return A.function(_per_label(A, vals, f"{where}.lift" if isinstance(data, dict) and "lift" in data else where))


def parse_weight(data, A: PointConfiguration, where: str = "weight") -> np.ndarray:
    """Log-weights from {"weight": {...}} (positive) or {"log_weight": {...}}."""
    if isinstance(data, dict) and "log_weight" in data:
        return np.array([float(x) for x in _per_label(A, data["log_weight"], f"{where}.log_weight")])
    vals = data.get("weight", data) if isinstance(data, dict) else data
    w = [float(x) for x in _per_label(A, vals, f"{where}.weight")]
    bad = [A.labels[k] for k, x in enumerate(w) if not x > 0]
    if bad:
        raise InputError(f"{where}.weight: entry for {bad[0]!r} is not positive")
    return np.log(np.array(w))


def parse_sequence(data, A: PointConfiguration, where: str = "sequence") -> SequenceSpec:
    mode = _field(data, "mode", where, str)
    try:
        if mode == "structured":
            drift = data.get("drift")
            if drift is not None:
                drift = _per_label(A, drift, f"{where}.drift", default=0)
            bounded = data.get("bounded")
            if isinstance(bounded, dict):
                bounded = [bounded.get(lab, "0") for lab in A.labels]
                if set(data["bounded"]) - set(A.labels):
                    raise InputError(f"{where}.bounded: unknown label")
            terms = data.get("terms")
            if isinstance(terms, dict):
                if set(terms) - set(A.labels):
                    raise InputError(f"{where}.terms: unknown label")
                terms = [terms.get(lab, "0") for lab in A.labels]
            elif terms is not None:
                raise InputError(f"{where}: field 'terms' must map labels to expressions")
            if drift is None and bounded is None and terms is None:
                raise InputError(f"{where}: structured sequences need 'drift', 'bounded' or 'terms'")
            return SequenceSpec.structured(A, drift=drift, bounded=bounded, terms=terms,
                                           bound=data.get("bound"), samples=data.get("samples"))
        if mode == "raw":
            values = _field(data, "values", where, list)
            rows = [_per_label(A, v, f"{where}.values[{k}]") for k, v in enumerate(values)]
            return SequenceSpec.raw(A, [[float(x) for x in r] for r in rows])
    except InputError:
        raise
    except (ValueError, SyntaxError, TypeError) as exc:
        raise InputError(f"{where}: {exc}") from None
    raise InputError(f"{where}: field 'mode' must be 'structured' or 'raw'")


def parse_cloud(data, where: str = "cloud") -> PointCloud:
    mesh = _field(data, "mesh", where)
    pts = _field(data, "points", where, list)
    if not pts:
        raise InputError(f"{where}: field 'points' is empty")
    first = _field({"points[0]": pts[0]}, "points[0]", where, dict)
    labels = tuple(first)
    rows = []
    for k, p in enumerate(pts):
        if not isinstance(p, dict) or tuple(p) != labels and set(p) != set(labels):
            raise InputError(f"{where}: points[{k}] has labels different from points[0]")
        rows.append([float(parse_number(p[lab], f"{where}.points[{k}][{lab!r}]")) for lab in labels])
    return PointCloud(labels, np.array(rows), float(parse_number(mesh, f"{where}.mesh")), where)


def parse_subdivision(data, A: PointConfiguration, where: str = "subdivision") -> Subdivision:
    facets = _field(data, "facets", where, list)
    try:
        return subdivision_from_facets(A, facets, data.get("nonparticipating", []))
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def _round(x):
    if isinstance(x, (bool, type(None), str)):
        return x
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIG_DIGITS}g}") if x != 0 else 0.0
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_round(v) for v in x.tolist()]
    return str(x)


def dumps(obj) -> str:
    """Deterministic JSON with floats at 12 significant digits."""
    return json.dumps(_round(obj), indent=2, ensure_ascii=False) + "\n"
