"""Manifold-aligned neighbor embedding."""

import json

from ._mane import (
    DivergenceError,
    Error,
    OptimizerConfig,
    anchor_drift,
    embed_mane,
    embed_umap,
    fit_ab,
    fuzzy_graph,
    gen_swiss_roll,
    knn,
    load_csv,
    load_idx,
    pca_axes,
    procrustes_distance,
    split_shared,
    trustworthiness,
)
from . import _mane


def evaluate(points, split, views, k=5):
    return json.loads(_mane.evaluate(points, split, views, k))


def run_swiss_roll_experiment(*args, **kwargs):
    return json.loads(_mane.run_swiss_roll_experiment(*args, **kwargs))


__all__ = [
    "DivergenceError",
    "Error",
    "OptimizerConfig",
    "anchor_drift",
    "embed_mane",
    "embed_umap",
    "evaluate",
    "fit_ab",
    "fuzzy_graph",
    "gen_swiss_roll",
    "knn",
    "load_csv",
    "load_idx",
    "pca_axes",
    "procrustes_distance",
    "run_swiss_roll_experiment",
    "split_shared",
    "trustworthiness",
]
