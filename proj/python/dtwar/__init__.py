"""DTW-AR attacks, DTW utilities and classifiers (compiled extension)."""

from ._dtwar import (
    Classifier,
    ConfigError,
    Error,
    ParseError,
    ShapeError,
    attack,
    calibrate_delta,
    diagonal_path,
    dist_p,
    dtw,
    dtw_value,
    mds,
    path_sim,
    random_path,
    soft_dtw,
    synth_two_class,
)

__all__ = [
    "Classifier", "ConfigError", "Error", "ParseError", "ShapeError", "attack", "calibrate_delta",
    "diagonal_path", "dist_p", "dtw", "dtw_value", "mds", "path_sim", "random_path", "soft_dtw",
    "synth_two_class",
]
