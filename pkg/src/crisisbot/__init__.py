"""Multilingual crisis-communication chatbot.

A character n-gram embedding classifier with threshold-gated dialogue,
an HTTP gateway, conversation analytics and SSA evaluation tooling.
"""

from .corpus import IntentCatalog, IntentEntry, LabeledExample, load_catalog
from .embednet import EmbeddingModel, Hyperparams, load_model, save_model, train
from .classifier import calibrate_threshold, predict
from .dialogue import Engine, Reply, Session, build_engine, handle_message

__all__ = [
    "IntentCatalog",
    "IntentEntry",
    "LabeledExample",
    "load_catalog",
    "EmbeddingModel",
    "Hyperparams",
    "load_model",
    "save_model",
    "train",
    "calibrate_threshold",
    "predict",
    "Engine",
    "Reply",
    "Session",
    "build_engine",
    "handle_message",
]

__version__ = "0.1.0"
