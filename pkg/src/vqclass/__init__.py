"""Four-class one-vs-all variational quantum classifier on a dense
statevector simulator, with margin-loss training via the parameter-shift
rule."""

from .encoding import EncodingConfig, encode
from .dataio import (Dataset, load_csv, save_csv, load_model, save_model,
                     split, synth_blobs)
from .metrics import EvalReport, evaluate
from .model import (CLASS_NAMES, EnsembleModel, ModelParams, init_ensemble,
                    predict, predict_batch, score, score_all, score_matrix)
from .statevector import StateVector, apply_cnot, apply_rot, expectation_z
from .training import (EarlyStopping, TrainConfig, TrainReport, margin_loss,
                       train)

__version__ = "0.1.0"

__all__ = [
    "CLASS_NAMES",
    "Dataset",
    "EarlyStopping",
    "EncodingConfig",
    "EnsembleModel",
    "EvalReport",
    "ModelParams",
    "StateVector",
    "TrainConfig",
    "TrainReport",
    "apply_cnot",
    "apply_rot",
    "encode",
    "evaluate",
    "expectation_z",
    "init_ensemble",
    "load_csv",
    "load_model",
    "margin_loss",
    "predict",
    "predict_batch",
    "save_csv",
    "save_model",
    "score",
    "score_all",
    "score_matrix",
    "split",
    "synth_blobs",
    "train",
    "__version__",
]
