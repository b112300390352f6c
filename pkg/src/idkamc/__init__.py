"""Online automatic modulation classification with the Isolation Distributional Kernel."""
from . import baselines, channel, classifier, constellation, harness, isokernel
from ._backend import NAME as BACKEND
from .channel import ChannelCondition, apply_condition
from .classifier import LabeledBatch, OgdModel, fit_partitionings, load_model, save_model
from .constellation import ALL_FORMATS, ModulationFormat, build_table, generate_signal, get_format
from .errors import ConfigError, FeatureError, FileFormatError, FitError, IdkAmcError
from .harness import ExperimentConfig, run_experiment
from .isokernel import IsolationPartitioning, embed, fit, similarity

__version__ = "0.1.0"

__all__ = [
    "ALL_FORMATS", "BACKEND", "ChannelCondition", "ConfigError", "ExperimentConfig", "FeatureError",
    "FileFormatError", "FitError", "IdkAmcError", "IsolationPartitioning", "LabeledBatch",
    "ModulationFormat", "OgdModel", "apply_condition", "baselines", "build_table", "channel",
    "classifier", "constellation", "embed", "fit", "fit_partitionings", "generate_signal",
    "get_format", "harness", "isokernel", "load_model", "run_experiment", "save_model", "similarity",
]
