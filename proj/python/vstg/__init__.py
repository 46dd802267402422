"""Visual-semantic transformer action anticipation."""

from ._vstg import (
    AnticipationProtocol,
    ConfigError,
    FormatError,
    IndexError,
    NumericError,
    ProtocolError,
    ShapeError,
    TrainingError,
    VstgError,
    ablate,
    default_synth_config,
    default_train_config,
    desk_scale_config,
    evaluate,
    mean_top5_recall,
    predict_scores,
    read_feature_file,
    synth,
    top5_accuracy,
    top_k_accuracy,
    train,
    write_feature_file,
)

__version__ = "0.1.0"

__all__ = [
    "AnticipationProtocol",
    "ConfigError",
    "FormatError",
    "IndexError",
    "NumericError",
    "ProtocolError",
    "ShapeError",
    "TrainingError",
    "VstgError",
    "ablate",
    "default_synth_config",
    "default_train_config",
    "desk_scale_config",
    "evaluate",
    "mean_top5_recall",
    "predict_scores",
    "read_feature_file",
    "synth",
    "top5_accuracy",
    "top_k_accuracy",
    "train",
    "write_feature_file",
]
