"""Transductive semi-supervised classification with particle competition and cooperation.

Pipeline: feature table -> PCA reduction -> k-NN graph -> particle dynamics
-> per-node labels, plus a grid-search evaluation harness and synthetic data
generators for end-to-end verification.
"""

from .engine import Particle, PccConfig, PccState, Prediction, apply_visit, choose_move, pcc_init, pcc_run, pcc_sweep
from .evaluation import GridResult, TrialSpec, accuracy, evaluate_once, format_summary, grid_search, sample_labeled_mask, trial_seed
from .graph import Graph, GraphDiagnostics, build_knn_graph, connected_components, dump_adjacency, graph_diagnostics
from .io_formats import (
    FeatureMatrix,
    FormatError,
    LabeledDataset,
    load_feature_table,
    read_heatmap,
    read_predictions,
    write_feature_table,
    write_heatmap,
    write_predictions,
)
from .pca import PcaModel, pca_fit, pca_transform
from .synth import gen_blobs, gen_moons

__all__ = [
    "FeatureMatrix",
    "FormatError",
    "Graph",
    "GraphDiagnostics",
    "GridResult",
    "LabeledDataset",
    "Particle",
    "PcaModel",
    "PccConfig",
    "PccState",
    "Prediction",
    "TrialSpec",
    "accuracy",
    "apply_visit",
    "build_knn_graph",
    "choose_move",
    "connected_components",
    "dump_adjacency",
    "evaluate_once",
    "format_summary",
    "gen_blobs",
    "gen_moons",
    "graph_diagnostics",
    "grid_search",
    "load_feature_table",
    "pca_fit",
    "pca_transform",
    "pcc_init",
    "pcc_run",
    "pcc_sweep",
    "read_heatmap",
    "read_predictions",
    "sample_labeled_mask",
    "trial_seed",
    "write_feature_table",
    "write_heatmap",
    "write_predictions",
]

__version__ = "0.1.0"
