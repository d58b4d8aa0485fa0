"""Config documents and the JSON interchange format.

Matrices are arrays of rows of ``[re, im]`` pairs; plain numbers are accepted
on input as real entries.  Points are lists of coordinates in the same
convention.  Multi-indices are integer arrays.
"""
from __future__ import annotations

import math
from typing import Any, Mapping

import numpy as np
import yaml

from .compare import ComparisonReport, PointResult
from .jets import HoloJet, MatrixJet2
from .kernels import (
    BallKernel,
    ConjugateBy,
    DirectSum,
    KernelModel,
    PowerSeries,
    ProductPolydisc,
    Scale,
    catalog,
)
from .localization import InvariantSet
from .multiindex import enumerate_indices
from .specht import EquivalenceVerdict, MatrixTuple

__all__ = [
    "ConfigError",
    "load_document",
    "encode_complex",
    "decode_complex",
    "encode_matrix",
    "decode_matrix",
    "decode_point",
    "model_from_config",
    "model_to_config",
    "tuple_from_config",
    "jet_to_dict",
    "invariants_to_dict",
    "verdict_to_dict",
    "point_to_dict",
    "report_to_dict",
]


class ConfigError(ValueError):
    pass


def load_document(text: str) -> Any:
    """Parse YAML (JSON is a subset)."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse config: {exc}") from exc


def encode_complex(c) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def decode_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"cannot read {v!r} as a complex number")


def encode_matrix(M) -> list:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[encode_complex(x) for x in row] for row in M]


def decode_matrix(obj) -> np.ndarray:
    if isinstance(obj, (int, float, str)):
        return np.array([[decode_complex(obj)]])
    rows = [[decode_complex(x) for x in row] for row in obj]
    if len({len(r) for r in rows}) > 1:
        raise ConfigError("ragged matrix rows")
    return np.array(rows, dtype=complex)


def decode_point(obj) -> np.ndarray:
    if isinstance(obj, (int, float, str)):
        return np.array([decode_complex(obj)])
    return np.array([decode_complex(c) for c in obj], dtype=complex)


def _require(cfg: Mapping, key: str):
    if key not in cfg:
        raise ConfigError(f"model of type {cfg.get('type')!r} needs '{key}'")
    return cfg[key]


def model_from_config(cfg) -> KernelModel:
    """Build a model descriptor from a config node.

    A bare string names a catalog entry.  Mappings carry a ``type`` key; see
    the README for every variant.
    """
    if isinstance(cfg, str):
        cat = catalog()
        if cfg not in cat:
            raise ConfigError(f"unknown catalog model {cfg!r}; known: {', '.join(cat)}")
        return cat[cfg]
    if not isinstance(cfg, Mapping) or "type" not in cfg:
        raise ConfigError(f"model config must be a catalog name or a mapping with 'type': {cfg!r}")
    kind = cfg["type"]
    try:
        if kind == "catalog":
            return model_from_config(str(_require(cfg, "name")))
        if kind in ("szego", "bergman"):
            lam = 1.0 if kind == "szego" else 2.0
            return ProductPolydisc((lam,) * int(cfg.get("m", 1)))
        if kind == "product_polydisc":
            return ProductPolydisc(tuple(float(x) for x in _require(cfg, "weights")))
        if kind == "ball":
            return BallKernel(int(_require(cfg, "m")), float(_require(cfg, "weight")))
        if kind == "power_series":
            coeffs = {}
            for term in _require(cfg, "terms"):
                key = (tuple(term["P"]), tuple(term["Q"]))
                coeffs[key] = decode_matrix(term["matrix"])
            return PowerSeries(int(_require(cfg, "m")), int(_require(cfg, "n")), coeffs)
        if kind == "direct_sum":
            parts = [model_from_config(p) for p in _require(cfg, "parts")]
            if len(parts) < 2:
                raise ConfigError("direct_sum needs at least two parts")
            out = parts[0]
            for p in parts[1:]:
                out = DirectSum(out, p)
            return out
        if kind == "conjugate":
            inner = model_from_config(_require(cfg, "inner"))
            if "matrix" in cfg:
                return ConjugateBy(inner, decode_matrix(cfg["matrix"]))
            return ConjugateBy(inner, holojet_from_config(_require(cfg, "jet"), inner.m))
        if kind == "scale":
            return Scale(model_from_config(_require(cfg, "inner")), float(_require(cfg, "c")))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind!r} model: {exc}") from exc
    raise ConfigError(f"unknown model type {kind!r}")


def holojet_from_config(cfg: Mapping, m: int) -> HoloJet:
    """``{basepoint, order, derivatives: [{index, matrix}, ...]}``; missing derivatives are 0."""
    d = int(cfg["order"])
    z0 = decode_point(cfg.get("basepoint", [0.0] * m))
    order = enumerate_indices(m, d)
    entries = [(tuple(e["index"]), decode_matrix(e["matrix"])) for e in cfg["derivatives"]]
    n = entries[0][1].shape[0]
    data = np.zeros((len(order), n, n), dtype=complex)
    for I, M in entries:
        data[order.sigma(I)] = M
    return HoloJet(m, n, d, z0, data)


def holojet_to_config(phi: HoloJet) -> dict:
    return {
        "basepoint": [encode_complex(c) for c in phi.z0],
        "order": phi.d,
        "derivatives": [
            {"index": list(I), "matrix": encode_matrix(phi.data[s])}
            for s, I in enumerate(phi.ordering) if np.any(phi.data[s])
        ],
    }


def model_to_config(model: KernelModel) -> dict:
    if isinstance(model, ProductPolydisc):
        return {"type": "product_polydisc", "weights": list(model.weights)}
    if isinstance(model, BallKernel):
        return {"type": "ball", "m": model.m, "weight": model.weight}
    if isinstance(model, PowerSeries):
        return {
            "type": "power_series", "m": model.m, "n": model.n,
            "terms": [
                {"P": list(P), "Q": list(Q), "matrix": encode_matrix(A)}
                for (P, Q), A in model.coeffs.items()
            ],
        }
    if isinstance(model, DirectSum):
        return {"type": "direct_sum", "parts": [model_to_config(model.first), model_to_config(model.second)]}
    if isinstance(model, ConjugateBy):
        out = {"type": "conjugate", "inner": model_to_config(model.inner)}
        if isinstance(model.phi, HoloJet):
            out["jet"] = holojet_to_config(model.phi)
        else:
            out["matrix"] = encode_matrix(model.phi)
        return out
    if isinstance(model, Scale):
        return {"type": "scale", "inner": model_to_config(model.inner), "c": model.c}
    raise ConfigError(f"{type(model).__name__} has no config form")


def tuple_from_config(obj) -> MatrixTuple:
    """``{"labels": [...], "matrices": [...]}`` or a bare list of matrices."""
    if isinstance(obj, Mapping):
        mats = [decode_matrix(M) for M in obj["matrices"]]
        labels = tuple(obj.get("labels", ()))
    else:
        mats, labels = [decode_matrix(M) for M in obj], ()
    if not mats:
        raise ConfigError("empty matrix tuple")
    return MatrixTuple(np.array(mats), labels)


def jet_to_dict(jet: MatrixJet2) -> dict:
    return {
        "m": jet.m, "n": jet.n, "order": jet.d,
        "basepoint": [encode_complex(c) for c in jet.z0],
        "entries": [
            {"I": list(I), "J": list(J), "matrix": encode_matrix(jet.data[s, t])}
            for s, I in enumerate(jet.ordering) for t, J in enumerate(jet.ordering)
        ],
    }


def invariants_to_dict(inv: InvariantSet) -> dict:
    return {
        "m": inv.m, "n": inv.n, "k": inv.k,
        "basepoint": [encode_complex(c) for c in inv.z],
        "entries": [{"I": list(I), "J": list(J), "matrix": encode_matrix(M)} for (I, J), M in inv.items()],
    }


def _float(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else float(x)


def verdict_to_dict(v: EquivalenceVerdict) -> dict:
    out = {
        "status": v.status.value,
        "reason": v.reason,
        "guarantee": v.guarantee,
        "max_len": v.max_len,
        "words_checked": v.words_checked,
        "sufficiency_bound": v.sufficiency_bound,
        "residual": _float(v.residual),
        "certificate": None if v.certificate is None else encode_matrix(v.certificate),
        "witness": None,
    }
    if v.witness is not None:
        a, b = v.witness_values
        out["witness"] = {
            "word": v.witness_text,
            "letters": [[i, st] for i, st in v.witness.letters],
            "values": [encode_complex(a), encode_complex(b)],
        }
    return out


def point_to_dict(r: PointResult, include_timing: bool = False) -> dict:
    out = {
        "index": r.index,
        "z": [encode_complex(c) for c in r.z],
        "k": r.k,
        "status": r.status,
        "distance": _float(r.distance),
        "verdict": None if r.verdict is None else verdict_to_dict(r.verdict),
        "error": r.error,
    }
    if r.invariants is not None:
        out["invariants"] = [invariants_to_dict(x) for x in r.invariants]
    if include_timing:
        out["elapsed_s"] = r.elapsed
    return out


def report_to_dict(report: ComparisonReport, include_timing: bool = False) -> dict:
    summary = report.summary()
    first = summary["first_inequivalent"]
    if first is not None:
        first = {"index": first["index"], "z": [encode_complex(c) for c in first["z"]]}
    summary["first_inequivalent"] = first
    req = report.request
    o = req.options
    return {
        "request": {
            "model_a": model_to_config(req.model_a) if _has_config(req.model_a) else repr(req.model_a),
            "model_b": model_to_config(req.model_b) if _has_config(req.model_b) else repr(req.model_b),
            "k": req.k,
            "path": req.path,
            "tolerances": {"comparison": o.tol, "certificate": o.cert_tol},
            "word_bound": o.word_bound,
            "max_words": o.max_words,
            "seed": o.seed,
        },
        "summary": summary,
        "points": [point_to_dict(r, include_timing) for r in report.records],
    }


def _has_config(model) -> bool:
    try:
        model_to_config(model)
    except ConfigError:
        return False
    return True
