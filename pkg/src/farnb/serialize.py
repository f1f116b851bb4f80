"""Versioned JSON storage for trained auto-encoders and pipelines.

Arrays are written as ``{"shape": [...], "data": [...]}`` with the data in
row-major order; ``NaN`` is written as ``null``.  Floats go through
``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .augment import PipelineModel
from .autoencoder import AEParams, AETrainReport
from .dataset import ColumnSchema, NormalizationModel
from .discretize import DiscretizationModel
from .errors import DataError
from .nb import NBModel, WeightParams

FORMAT_VERSION = 1


def _array(a) -> dict:
    a = np.asarray(a, dtype=float)
    return {"shape": list(a.shape),
            "data": [None if math.isnan(v) else v for v in a.ravel().tolist()]}


def _unarray(obj) -> np.ndarray:
    data = [math.nan if v is None else v for v in obj["data"]]
    return np.array(data, dtype=float).reshape(obj["shape"])


def _schema(schema):
    return [{"name": c.name, "kind": c.kind, "categories": list(c.categories)} for c in schema]


def _unschema(obj):
    return tuple(ColumnSchema(c["name"], c["kind"], tuple(c["categories"])) for c in obj)


def ae_to_dict(params: AEParams) -> dict:
    topo = params.topology
    return {"format": "farnb.ae", "version": FORMAT_VERSION,
            "topology": {"m": topo.m, "k": topo.k, "h": topo.h},
            "arrays": {name: _array(v) for name, v in params.blocks().items()}}


def ae_from_dict(obj) -> AEParams:
    _check_header(obj, "farnb.ae")
    params = AEParams(**{name: _unarray(v) for name, v in obj["arrays"].items()})
    topo = params.topology
    if (topo.m, topo.k, topo.h) != (obj["topology"]["m"], obj["topology"]["k"], obj["topology"]["h"]):
        raise DataError("auto-encoder arrays disagree with the stored topology")
    return params


def pipeline_to_dict(model: PipelineModel) -> dict:
    rep = model.ae_report
    return {
        "format": "farnb.pipeline",
        "version": FORMAT_VERSION,
        "classes": list(model.classes),
        "blocks": list(model.blocks),
        "normalizer": {"schema": _schema(model.normalizer.schema),
                       "minimum": _array(model.normalizer.minimum),
                       "maximum": _array(model.normalizer.maximum)},
        "ae": ae_to_dict(model.ae),
        "ae_report": None if rep is None else
        {"initial_loss": rep.initial_loss, "final_loss": rep.final_loss, "epochs_run": rep.epochs_run},
        "discretizer": {"schema": _schema(model.discretizer.schema),
                        "cut_points": [None if c is None else list(c)
                                       for c in model.discretizer.cut_points],
                        "has_missing": list(model.discretizer.has_missing)},
        "nb": {"log_prior": _array(model.nb.log_prior),
               "log_likelihood": [_array(t) for t in model.nb.log_likelihood],
               "category_counts": list(model.nb.category_counts),
               "class_counts": _array(model.nb.class_counts)},
        "weights": {"W": _array(model.weights.W), "w": _array(model.weights.w),
                    "alpha": model.weights.alpha},
    }


def pipeline_from_dict(obj) -> PipelineModel:
    _check_header(obj, "farnb.pipeline")
    try:
        norm = obj["normalizer"]
        disc = obj["discretizer"]
        nbo = obj["nb"]
        wo = obj["weights"]
        rep = obj["ae_report"]
        return PipelineModel(
            normalizer=NormalizationModel(_unschema(norm["schema"]), _unarray(norm["minimum"]),
                                          _unarray(norm["maximum"])),
            ae=ae_from_dict(obj["ae"]),
            discretizer=DiscretizationModel(
                _unschema(disc["schema"]),
                tuple(None if c is None else tuple(c) for c in disc["cut_points"]),
                tuple(disc["has_missing"])),
            nb=NBModel(_unarray(nbo["log_prior"]),
                       tuple(_unarray(t) for t in nbo["log_likelihood"]),
                       tuple(nbo["category_counts"]), _unarray(nbo["class_counts"])),
            weights=WeightParams(_unarray(wo["W"]), _unarray(wo["w"]), wo["alpha"]),
            blocks=tuple(obj["blocks"]),
            classes=tuple(obj["classes"]),
            ae_report=None if rep is None else AETrainReport(**rep),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed pipeline file: {exc}") from exc


def _check_header(obj, fmt):
    if not isinstance(obj, dict) or obj.get("format") != fmt:
        raise DataError(f"not a {fmt} document")
    if obj.get("version") != FORMAT_VERSION:
        raise DataError(f"unsupported {fmt} version {obj.get('version')!r}")


def _write(path, obj):
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def _read(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc


def save_ae(path, params: AEParams):
    _write(path, ae_to_dict(params))


def load_ae(path) -> AEParams:
    return ae_from_dict(_read(path))


def save_pipeline(path, model: PipelineModel):
    _write(path, pipeline_to_dict(model))


def load_pipeline(path) -> PipelineModel:
    return pipeline_from_dict(_read(path))
