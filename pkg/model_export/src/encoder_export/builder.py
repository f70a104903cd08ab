"""ONNX protobuf serialization and a small graph-building API.

Self-contained writer for the ONNX subset this tool emits (the consuming
package has its own independent reader, which doubles as a round-trip check
in the tests). The GraphBuilder hands out tensor names so tower assembly
reads as a sequence of ops.
"""

from __future__ import annotations

import struct

import numpy as np

# TensorProto.DataType
FLOAT = 1
INT32 = 6
INT64 = 7
BOOL = 9
DOUBLE = 11

_NP_TO_ONNX = {
    np.dtype(np.float32): FLOAT,
    np.dtype(np.int32): INT32,
    np.dtype(np.int64): INT64,
    np.dtype(np.bool_): BOOL,
    np.dtype(np.float64): DOUBLE,
}

_WIRE_VARINT = 0
_WIRE_LEN = 2
_WIRE_FIXED32 = 5


def _varint(value: int) -> bytes:
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _signed_varint(value: int) -> bytes:
    return _varint(value & ((1 << 64) - 1))


def _tag(field: int, wire: int) -> bytes:
    return _varint((field << 3) | wire)


def _len_field(field: int, payload: bytes) -> bytes:
    return _tag(field, _WIRE_LEN) + _varint(len(payload)) + payload


def _string(field: int, value: str) -> bytes:
    return _len_field(field, value.encode("utf-8"))


def _int_field(field: int, value: int) -> bytes:
    return _tag(field, _WIRE_VARINT) + _signed_varint(value)


def _packed_ints(field: int, values) -> bytes:
    return _len_field(field, b"".join(_signed_varint(int(v)) for v in values))


def _tensor(name: str, array: np.ndarray) -> bytes:
    array = np.ascontiguousarray(array)
    onnx_type = _NP_TO_ONNX[array.dtype]
    raw = (
        array.astype(np.uint8).tobytes()
        if array.dtype == np.bool_
        else array.astype(array.dtype.newbyteorder("<"), copy=False).tobytes()
    )
    payload = bytearray()
    if array.ndim:
        payload += _packed_ints(1, array.shape)
    payload += _int_field(2, onnx_type)
    if name:
        payload += _string(8, name)
    payload += _len_field(9, raw)
    return bytes(payload)


def _attribute(name: str, value) -> bytes:
    payload = bytearray(_string(1, name))
    if isinstance(value, bool):
        raise TypeError(f"attribute {name!r}: pass ints, not bools")
    if isinstance(value, int):
        payload += _int_field(3, value) + _int_field(20, 2)  # INT
    elif isinstance(value, float):
        payload += _tag(2, _WIRE_FIXED32) + struct.pack("<f", value)
        payload += _int_field(20, 1)  # FLOAT
    elif isinstance(value, str):
        payload += _len_field(4, value.encode("utf-8")) + _int_field(20, 3)  # STRING
    elif isinstance(value, np.ndarray):
        payload += _len_field(5, _tensor("", value)) + _int_field(20, 4)  # TENSOR
    elif isinstance(value, (list, tuple)) and all(isinstance(v, int) for v in value):
        payload += _packed_ints(8, value) + _int_field(20, 7)  # INTS
    else:
        raise TypeError(f"attribute {name!r}: unsupported value {value!r}")
    return bytes(payload)


def _value_info(name: str, elem_type: int, shape) -> bytes:
    dims = bytearray()
    for dim in shape:
        if isinstance(dim, str):
            dims += _len_field(1, _string(2, dim))
        else:
            dims += _len_field(1, _int_field(1, int(dim)))
    tensor_type = _int_field(1, elem_type) + _len_field(2, bytes(dims))
    return _string(1, name) + _len_field(2, _len_field(1, tensor_type))


class GraphBuilder:
    """Accumulates nodes/initializers and serializes one ModelProto."""

    def __init__(self, graph_name: str):
        self.graph_name = graph_name
        self._nodes: list[bytes] = []
        self._initializers: list[bytes] = []
        self._inputs: list[bytes] = []
        self._outputs: list[bytes] = []
        self._counter = 0

    def fresh(self, hint: str) -> str:
        self._counter += 1
        return f"{hint}_{self._counter}"

    def init(self, name: str, array: np.ndarray) -> str:
        self._initializers.append(_tensor(name, np.asarray(array)))
        return name

    def input(self, name: str, elem_type: int, shape) -> str:
        self._inputs.append(_value_info(name, elem_type, shape))
        return name

    def output(self, name: str, elem_type: int, shape) -> str:
        self._outputs.append(_value_info(name, elem_type, shape))
        return name

    def node(self, op_type: str, inputs, outputs=None, **attrs) -> str | list[str]:
        if outputs is None:
            outputs = [self.fresh(op_type.lower())]
        payload = bytearray()
        for name in inputs:
            payload += _string(1, name)
        for name in outputs:
            payload += _string(2, name)
        payload += _string(4, op_type)
        for attr_name in sorted(attrs):
            payload += _len_field(5, _attribute(attr_name, attrs[attr_name]))
        self._nodes.append(bytes(payload))
        return outputs[0] if len(outputs) == 1 else outputs

    def build(self, producer: str = "encoder-export", opset: int = 17) -> bytes:
        graph = bytearray()
        for node in self._nodes:
            graph += _len_field(1, node)
        graph += _string(2, self.graph_name)
        for tensor in self._initializers:
            graph += _len_field(5, tensor)
        for info in self._inputs:
            graph += _len_field(11, info)
        for info in self._outputs:
            graph += _len_field(12, info)
        model = bytearray()
        model += _int_field(1, 8)  # ir_version
        model += _string(2, producer)
        model += _len_field(7, bytes(graph))
        model += _len_field(8, _int_field(2, opset))
        return bytes(model)
