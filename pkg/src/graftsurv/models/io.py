"""Versioned JSON artifacts for fitted models; round-trips are exact."""

from __future__ import annotations

import json

import numpy as np

from graftsurv.exceptions import DataError
from graftsurv.ioutil import atomic_write_text
from graftsurv.models.boosting import GradientBoostedSurvival, RegressionTreeArrays
from graftsurv.models.coxnet import CoxnetSurvival
from graftsurv.models.forest import RandomSurvivalForest, TreeArrays
from graftsurv.survival.stepfunction import StepFunction

FORMAT = "graftsurv-model"
VERSION = 1


def _floats(a):
    return [float(v) for v in np.asarray(a)]


def _ints(a):
    return [int(v) for v in np.asarray(a)]


def _names_out(names):
    return list(names) if names is not None else None


def _names_in(names):
    return tuple(names) if names is not None else None


def save_model(model, path):
    """Serialize a fitted model to a self-describing JSON artifact."""
    if isinstance(model, CoxnetSurvival):
        kind = "coxnet"
        payload = {
            "params": model.get_params(),
            "coef": _floats(model.coef_),
            "coef_std": _floats(model.coef_std_),
            "center": _floats(model.center_),
            "scale": _floats(model.scale_),
            "column_names": _names_out(model.column_names_),
            "n_features_in": int(model.n_features_in_),
            "n_iter": int(model.n_iter_),
            "objective_path": _floats(model.objective_path_),
            "baseline_times": _floats(model.baseline_hazard_.times),
            "baseline_values": _floats(model.baseline_hazard_.values),
        }
    elif isinstance(model, RandomSurvivalForest):
        kind = "rsf"
        payload = {
            "params": model.get_params(),
            "column_names": _names_out(model.column_names_),
            "n_features_in": int(model.n_features_in_),
            "event_times": _floats(model.event_times_),
            "trees": [
                {
                    "feature": _ints(t.feature),
                    "threshold": _floats(t.threshold),
                    "left": _ints(t.left),
                    "right": _ints(t.right),
                    "leaf_ofs": _ints(t.leaf_ofs),
                    "leaf_len": _ints(t.leaf_len),
                    "mortality": _floats(t.mortality),
                    "leaf_times": _floats(t.leaf_times),
                    "leaf_values": _floats(t.leaf_values),
                }
                for t in model.trees_
            ],
        }
    elif isinstance(model, GradientBoostedSurvival):
        kind = "gb"
        payload = {
            "params": model.get_params(),
            "column_names": _names_out(model.column_names_),
            "n_features_in": int(model.n_features_in_),
            "init_score": float(model.init_score_),
            "train_loss": _floats(model.train_loss_),
            "trees": [
                {
                    "feature": _ints(t.feature),
                    "threshold": _floats(t.threshold),
                    "left": _ints(t.left),
                    "right": _ints(t.right),
                    "value": _floats(t.value),
                }
                for t in model.trees_
            ],
        }
    else:
        raise DataError(f"cannot serialize model of type {type(model).__name__}")

    doc = {"format": FORMAT, "version": VERSION, "kind": kind, "payload": payload}
    atomic_write_text(path, json.dumps(doc))


def load_model(path):
    """Inverse of save_model; restores the fitted estimator exactly."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read model artifact {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a model artifact: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise DataError(f"not a model artifact: format {doc.get('format')!r}")
    if doc.get("version") != VERSION:
        raise DataError(f"unsupported artifact version {doc.get('version')!r}")
    kind = doc.get("kind")
    payload = doc["payload"]

    if kind == "coxnet":
        model = CoxnetSurvival(**payload["params"])
        model.coef_ = np.asarray(payload["coef"])
        model.coef_std_ = np.asarray(payload["coef_std"])
        model.center_ = np.asarray(payload["center"])
        model.scale_ = np.asarray(payload["scale"])
        model.column_names_ = _names_in(payload["column_names"])
        model.n_features_in_ = payload["n_features_in"]
        model.n_iter_ = payload["n_iter"]
        model.objective_path_ = np.asarray(payload["objective_path"])
        model.baseline_hazard_ = StepFunction(
            np.asarray(payload["baseline_times"]),
            np.asarray(payload["baseline_values"]),
            baseline=0.0,
        )
        return model
    if kind == "rsf":
        model = RandomSurvivalForest(**payload["params"])
        model.column_names_ = _names_in(payload["column_names"])
        model.n_features_in_ = payload["n_features_in"]
        model.event_times_ = np.asarray(payload["event_times"])
        model.trees_ = [
            TreeArrays(
                np.asarray(t["feature"], np.int64),
                np.asarray(t["threshold"], np.float64),
                np.asarray(t["left"], np.int64),
                np.asarray(t["right"], np.int64),
                np.asarray(t["leaf_ofs"], np.int64),
                np.asarray(t["leaf_len"], np.int64),
                np.asarray(t["mortality"], np.float64),
                np.asarray(t["leaf_times"], np.float64),
                np.asarray(t["leaf_values"], np.float64),
            )
            for t in payload["trees"]
        ]
        return model
    if kind == "gb":
        model = GradientBoostedSurvival(**payload["params"])
        model.column_names_ = _names_in(payload["column_names"])
        model.n_features_in_ = payload["n_features_in"]
        model.init_score_ = payload["init_score"]
        model.train_loss_ = np.asarray(payload["train_loss"])
        model.trees_ = [
            RegressionTreeArrays(
                np.asarray(t["feature"], np.int64),
                np.asarray(t["threshold"], np.float64),
                np.asarray(t["left"], np.int64),
                np.asarray(t["right"], np.int64),
                np.asarray(t["value"], np.float64),
            )
            for t in payload["trees"]
        ]
        return model
    raise DataError(f"unknown model kind {kind!r}")
