"""Graph execution on numpy tensors.

Nodes are executed in file order, which the format requires to be a valid
topological order. Feeds are validated against the graph's declared input
signatures: dtypes must match exactly and fixed dimensions must agree;
symbolic dimensions (batch size) are free.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import SessionError
from .model import Model, ValueInfo
from .ops import REGISTRY


class GraphRunner:
    """Executes one loaded graph; stateless aside from its weights."""

    def __init__(self, model: Model):
        self._graph = model.graph
        self.inputs: list[ValueInfo] = [
            info
            for info in model.graph.inputs
            if info.name not in model.graph.initializers
        ]
        self.outputs: list[ValueInfo] = list(model.graph.outputs)
        for node in self._graph.nodes:
            if node.op_type not in REGISTRY:
                raise SessionError(
                    f"graph uses unsupported operator {node.op_type!r}"
                )

    def _check_feed(self, info: ValueInfo, array: np.ndarray) -> np.ndarray:
        array = np.asarray(array)
        if array.dtype != info.dtype:
            raise SessionError(
                f"input {info.name!r}: dtype {array.dtype} does not match "
                f"declared {info.dtype}"
            )
        if len(array.shape) != len(info.shape):
            raise SessionError(
                f"input {info.name!r}: rank {array.ndim} does not match "
                f"declared shape {info.shape}"
            )
        for got, want in zip(array.shape, info.shape):
            if isinstance(want, int) and want >= 0 and got != want:
                raise SessionError(
                    f"input {info.name!r}: shape {array.shape} does not match "
                    f"declared {info.shape}"
                )
        return array

    def run(self, feeds: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        values: dict[str, np.ndarray] = dict(self._graph.initializers)
        for info in self.inputs:
            if info.name not in feeds:
                raise SessionError(f"missing input {info.name!r}")
            values[info.name] = self._check_feed(info, feeds[info.name])
        for node in self._graph.nodes:
            args = []
            for name in node.inputs:
                if not name:
                    args.append(None)
                elif name in values:
                    args.append(values[name])
                else:
                    raise SessionError(
                        f"node {node.op_type} consumes unknown tensor {name!r}"
                    )
            # Trailing optional inputs may be omitted entirely.
            while args and args[-1] is None:
                args.pop()
            kernel = REGISTRY[node.op_type]
            try:
                result = kernel(node.attrs, *args)
            except SessionError:
                raise
            except Exception as exc:
                raise SessionError(
                    f"node {node.name or node.op_type} ({node.op_type}) failed: {exc}"
                ) from exc
            if not isinstance(result, tuple):
                result = (result,)
            for name, value in zip(node.outputs, result):
                if name:
                    values[name] = np.asarray(value)
        out = {}
        for info in self.outputs:
            if info.name not in values:
                raise SessionError(f"graph never produced output {info.name!r}")
            out[info.name] = values[info.name]
        return out
