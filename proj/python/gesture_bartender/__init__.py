"""Python bindings for the gesture bartender core."""

import json

from ._core import (
    GESTURES,
    GestureError,
    InvalidFrame,
    Model,
    OrderSession,
    VersionMismatch,
    extract_features,
    fit_pca,
    generate_synthetic,
    load_model,
    normalize_hand,
    train,
)
from ._core import classification_report as _classification_report


def classification_report(actual, predicted):
    """Per-class precision, recall, F1 and support as a dict."""
    return json.loads(_classification_report(list(actual), list(predicted)))


def frame_features(frame):
    """Feature vector of a frame given as a dict with 'left' and 'right' hands."""
    return extract_features(json.dumps(frame))


__all__ = [
    "GESTURES",
    "GestureError",
    "InvalidFrame",
    "Model",
    "OrderSession",
    "VersionMismatch",
    "classification_report",
    "fit_pca",
    "frame_features",
    "generate_synthetic",
    "load_model",
    "normalize_hand",
    "train",
]
