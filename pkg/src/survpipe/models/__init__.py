from .adaboost import AdaBoostModel, Stump, fit_stump
from .base import TrainedModel, classify, predict_proba, train
from .config import ADABOOST, FOREST, LOGISTIC, MLP, MODEL_KINDS, TrainConfig, default_grid
from .logistic import LogisticModel, loss_and_gradient, sigmoid
from .mlp import MlpModel, init_mlp
from .serialize import load_model, save_model
from .trees import ForestModel, Tree, build_tree

__all__ = [
    "ADABOOST", "FOREST", "LOGISTIC", "MLP", "MODEL_KINDS",
    "AdaBoostModel", "ForestModel", "LogisticModel", "MlpModel",
    "Stump", "TrainConfig", "TrainedModel", "Tree",
    "build_tree", "classify", "default_grid", "fit_stump", "init_mlp",
    "load_model", "loss_and_gradient", "predict_proba", "save_model",
    "sigmoid", "train",
]
