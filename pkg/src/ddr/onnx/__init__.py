"""Minimal ONNX-format graph reader, writer, and numpy executor."""

from .model import (
    DTYPE_TO_NUMPY,
    NUMPY_TO_DTYPE,
    TENSOR_BOOL,
    TENSOR_DOUBLE,
    TENSOR_FLOAT,
    TENSOR_INT32,
    TENSOR_INT64,
    Graph,
    Model,
    Node,
    ValueInfo,
    load_model,
    parse_model,
    save_model,
    serialize_model,
)
from .runtime import GraphRunner

__all__ = [
    "DTYPE_TO_NUMPY",
    "NUMPY_TO_DTYPE",
    "TENSOR_BOOL",
    "TENSOR_DOUBLE",
    "TENSOR_FLOAT",
    "TENSOR_INT32",
    "TENSOR_INT64",
    "Graph",
    "GraphRunner",
    "Model",
    "Node",
    "ValueInfo",
    "load_model",
    "parse_model",
    "save_model",
    "serialize_model",
]
