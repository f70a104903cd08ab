"""Reading and writing encoder graph files (ONNX protobuf subset).

The in-memory representation is a small set of dataclasses: a Model holds a
Graph, a Graph holds Nodes plus named initializer arrays and typed
input/output signatures. Only the tensor-oriented parts of the schema are
implemented; graph attributes, sparse tensors, functions, and training info
are out of scope. Unknown fields are skipped when reading.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import AssetError
from . import wire

# TensorProto.DataType values for the dtypes this package moves around.
TENSOR_FLOAT = 1
TENSOR_INT32 = 6
TENSOR_INT64 = 7
TENSOR_BOOL = 9
TENSOR_DOUBLE = 11

DTYPE_TO_NUMPY = {
    TENSOR_FLOAT: np.dtype(np.float32),
    TENSOR_INT32: np.dtype(np.int32),
    TENSOR_INT64: np.dtype(np.int64),
    TENSOR_BOOL: np.dtype(np.bool_),
    TENSOR_DOUBLE: np.dtype(np.float64),
}
NUMPY_TO_DTYPE = {v: k for k, v in DTYPE_TO_NUMPY.items()}

# AttributeProto.AttributeType codes.
_ATTR_FLOAT = 1
_ATTR_INT = 2
_ATTR_STRING = 3
_ATTR_TENSOR = 4
_ATTR_FLOATS = 6
_ATTR_INTS = 7
_ATTR_STRINGS = 8


@dataclass
class ValueInfo:
    """Name plus element type and symbolic shape of a graph input/output."""

    name: str
    elem_type: int
    shape: tuple[object, ...]  # ints for fixed dims, strings for symbolic ones

    @property
    def dtype(self) -> np.dtype:
        return DTYPE_TO_NUMPY[self.elem_type]


@dataclass
class Node:
    op_type: str
    inputs: list[str]
    outputs: list[str]
    attrs: dict[str, object] = field(default_factory=dict)
    name: str = ""


@dataclass
class Graph:
    name: str
    nodes: list[Node]
    initializers: dict[str, np.ndarray]
    inputs: list[ValueInfo]
    outputs: list[ValueInfo]


@dataclass
class Model:
    graph: Graph
    opset_version: int = 17
    ir_version: int = 8
    producer_name: str = "ddr"


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def _tensor_bytes(name: str, array: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(array)
    if arr.dtype == np.bool_:
        raw = arr.astype(np.uint8).tobytes()
    else:
        raw = arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes()
    try:
        data_type = NUMPY_TO_DTYPE[arr.dtype]
    except KeyError:
        raise AssetError(f"unsupported tensor dtype {arr.dtype}") from None
    out = bytearray()
    if arr.ndim:
        out += wire.packed_int64s(1, arr.shape)
    out += wire.uint_field(2, data_type)
    if name:
        out += wire.str_field(8, name)
    out += wire.len_field(9, raw)
    return bytes(out)


def _attribute_bytes(name: str, value: object) -> bytes:
    out = bytearray(wire.str_field(1, name))
    if isinstance(value, bool):
        raise AssetError(f"attribute {name!r}: use int, not bool")
    if isinstance(value, int):
        out += wire.int64_field(3, value)
        out += wire.uint_field(20, _ATTR_INT)
    elif isinstance(value, float):
        out += wire.float_field(2, value)
        out += wire.uint_field(20, _ATTR_FLOAT)
    elif isinstance(value, str):
        out += wire.len_field(4, value.encode("utf-8"))
        out += wire.uint_field(20, _ATTR_STRING)
    elif isinstance(value, bytes):
        out += wire.len_field(4, value)
        out += wire.uint_field(20, _ATTR_STRING)
    elif isinstance(value, np.ndarray):
        out += wire.len_field(5, _tensor_bytes("", value))
        out += wire.uint_field(20, _ATTR_TENSOR)
    elif isinstance(value, (list, tuple)):
        seq = list(value)
        if all(isinstance(v, int) for v in seq):
            out += wire.packed_int64s(8, seq)
            out += wire.uint_field(20, _ATTR_INTS)
        elif all(isinstance(v, (int, float)) for v in seq):
            out += wire.packed_floats(7, [float(v) for v in seq])
            out += wire.uint_field(20, _ATTR_FLOATS)
        else:
            raise AssetError(f"attribute {name!r}: unsupported sequence {seq!r}")
    else:
        raise AssetError(f"attribute {name!r}: unsupported value {value!r}")
    return bytes(out)


def _node_bytes(node: Node) -> bytes:
    out = bytearray()
    for name in node.inputs:
        out += wire.str_field(1, name)
    for name in node.outputs:
        out += wire.str_field(2, name)
    if node.name:
        out += wire.str_field(3, node.name)
    out += wire.str_field(4, node.op_type)
    for attr_name in sorted(node.attrs):
        out += wire.len_field(5, _attribute_bytes(attr_name, node.attrs[attr_name]))
    return bytes(out)


def _value_info_bytes(info: ValueInfo) -> bytes:
    dims = bytearray()
    for dim in info.shape:
        if isinstance(dim, str):
            dims += wire.len_field(1, wire.str_field(2, dim))
        else:
            dims += wire.len_field(1, wire.int64_field(1, int(dim)))
    tensor_type = wire.uint_field(1, info.elem_type) + wire.len_field(2, bytes(dims))
    type_proto = wire.len_field(1, tensor_type)
    return wire.str_field(1, info.name) + wire.len_field(2, type_proto)


def _graph_bytes(graph: Graph) -> bytes:
    out = bytearray()
    for node in graph.nodes:
        out += wire.len_field(1, _node_bytes(node))
    out += wire.str_field(2, graph.name)
    for name, array in graph.initializers.items():
        out += wire.len_field(5, _tensor_bytes(name, array))
    for info in graph.inputs:
        out += wire.len_field(11, _value_info_bytes(info))
    for info in graph.outputs:
        out += wire.len_field(12, _value_info_bytes(info))
    return bytes(out)


def serialize_model(model: Model) -> bytes:
    out = bytearray()
    out += wire.int64_field(1, model.ir_version)
    out += wire.str_field(2, model.producer_name)
    out += wire.len_field(7, _graph_bytes(model.graph))
    out += wire.len_field(8, wire.uint_field(2, model.opset_version))
    return bytes(out)


def save_model(model: Model, path) -> None:
    Path(path).write_bytes(serialize_model(model))


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

def _parse_tensor(view: memoryview) -> tuple[str, np.ndarray]:
    dims: list[int] = []
    data_type = 0
    name = ""
    raw: bytes | None = None
    floats: list[bytes] = []
    ints32: list[int] = []
    ints64: list[int] = []
    doubles: list[bytes] = []
    for fno, wtype, value in wire.iter_fields(view):
        if fno == 1:
            if wtype == wire.WIRE_VARINT:
                dims.append(wire.to_signed64(value))
            else:
                dims.extend(wire.unpack_int64s(value))
        elif fno == 2:
            data_type = value
        elif fno == 8:
            name = bytes(value).decode("utf-8")
        elif fno == 9:
            raw = bytes(value)
        elif fno == 4 and wtype == wire.WIRE_LEN:
            floats.append(bytes(value))
        elif fno == 5 and wtype == wire.WIRE_LEN:
            ints32.extend(wire.unpack_int64s(value))
        elif fno == 7 and wtype == wire.WIRE_LEN:
            ints64.extend(wire.unpack_int64s(value))
        elif fno == 10 and wtype == wire.WIRE_LEN:
            doubles.append(bytes(value))
    if data_type not in DTYPE_TO_NUMPY:
        raise AssetError(f"tensor {name!r}: unsupported data type {data_type}")
    dtype = DTYPE_TO_NUMPY[data_type]
    if raw is not None:
        if dtype == np.bool_:
            arr = np.frombuffer(raw, dtype=np.uint8).astype(np.bool_)
        else:
            arr = np.frombuffer(raw, dtype=dtype.newbyteorder("<")).astype(dtype)
    elif floats:
        arr = np.frombuffer(b"".join(floats), dtype="<f4").astype(dtype)
    elif doubles:
        arr = np.frombuffer(b"".join(doubles), dtype="<f8").astype(dtype)
    elif ints64:
        arr = np.asarray(ints64, dtype=dtype)
    elif ints32:
        arr = np.asarray(ints32, dtype=dtype)
    else:
        arr = np.zeros(0, dtype=dtype)
    return name, arr.reshape(dims)


def _parse_attribute(view: memoryview) -> tuple[str, object]:
    name = ""
    attr_type = 0
    f_val = 0.0
    i_val = 0
    s_val = b""
    t_val: np.ndarray | None = None
    floats: list[float] = []
    ints: list[int] = []
    for fno, wtype, value in wire.iter_fields(view):
        if fno == 1:
            name = bytes(value).decode("utf-8")
        elif fno == 2:
            f_val = struct.unpack("<f", value)[0]
        elif fno == 3:
            i_val = wire.to_signed64(value)
        elif fno == 4:
            s_val = bytes(value)
        elif fno == 5:
            _, t_val = _parse_tensor(value)
        elif fno == 7:
            if wtype == wire.WIRE_LEN:
                data = bytes(value)
                floats.extend(struct.unpack(f"<{len(data) // 4}f", data))
            else:
                floats.append(struct.unpack("<f", value)[0])
        elif fno == 8:
            if wtype == wire.WIRE_LEN:
                ints.extend(wire.unpack_int64s(value))
            else:
                ints.append(wire.to_signed64(value))
        elif fno == 20:
            attr_type = value
    if attr_type == _ATTR_FLOAT:
        return name, f_val
    if attr_type == _ATTR_INT:
        return name, i_val
    if attr_type == _ATTR_STRING:
        return name, s_val.decode("utf-8")
    if attr_type == _ATTR_TENSOR:
        return name, t_val
    if attr_type == _ATTR_FLOATS:
        return name, list(floats)
    if attr_type == _ATTR_INTS:
        return name, list(ints)
    # Type tag missing: fall back to whichever payload was present.
    if ints:
        return name, list(ints)
    if floats:
        return name, list(floats)
    if t_val is not None:
        return name, t_val
    if s_val:
        return name, s_val.decode("utf-8")
    return name, i_val


def _parse_node(view: memoryview) -> Node:
    node = Node(op_type="", inputs=[], outputs=[])
    for fno, _, value in wire.iter_fields(view):
        if fno == 1:
            node.inputs.append(bytes(value).decode("utf-8"))
        elif fno == 2:
            node.outputs.append(bytes(value).decode("utf-8"))
        elif fno == 3:
            node.name = bytes(value).decode("utf-8")
        elif fno == 4:
            node.op_type = bytes(value).decode("utf-8")
        elif fno == 5:
            attr_name, attr_value = _parse_attribute(value)
            node.attrs[attr_name] = attr_value
    return node


def _parse_value_info(view: memoryview) -> ValueInfo:
    name = ""
    elem_type = 0
    shape: list[object] = []
    for fno, _, value in wire.iter_fields(view):
        if fno == 1:
            name = bytes(value).decode("utf-8")
        elif fno == 2:
            for tno, _, tval in wire.iter_fields(value):
                if tno != 1:  # tensor_type
                    continue
                for eno, _, eval_ in wire.iter_fields(tval):
                    if eno == 1:
                        elem_type = eval_
                    elif eno == 2:
                        for dno, _, dval in wire.iter_fields(eval_):
                            if dno != 1:
                                continue
                            dim: object = None
                            for ino, _, ival in wire.iter_fields(dval):
                                if ino == 1:
                                    dim = wire.to_signed64(ival)
                                elif ino == 2:
                                    dim = bytes(ival).decode("utf-8")
                            shape.append(dim)
    return ValueInfo(name=name, elem_type=elem_type, shape=tuple(shape))


def _parse_graph(view: memoryview) -> Graph:
    graph = Graph(name="", nodes=[], initializers={}, inputs=[], outputs=[])
    for fno, _, value in wire.iter_fields(view):
        if fno == 1:
            graph.nodes.append(_parse_node(value))
        elif fno == 2:
            graph.name = bytes(value).decode("utf-8")
        elif fno == 5:
            name, arr = _parse_tensor(value)
            graph.initializers[name] = arr
        elif fno == 11:
            graph.inputs.append(_parse_value_info(value))
        elif fno == 12:
            graph.outputs.append(_parse_value_info(value))
    return graph


def parse_model(data: bytes) -> Model:
    graph: Graph | None = None
    opset = 0
    ir_version = 0
    producer = ""
    try:
        for fno, _, value in wire.iter_fields(memoryview(data)):
            if fno == 1:
                ir_version = wire.to_signed64(value)
            elif fno == 2:
                producer = bytes(value).decode("utf-8")
            elif fno == 7:
                graph = _parse_graph(value)
            elif fno == 8:
                domain = ""
                version = 0
                for ono, _, oval in wire.iter_fields(value):
                    if ono == 1:
                        domain = bytes(oval).decode("utf-8")
                    elif ono == 2:
                        version = oval
                if domain in ("", "ai.onnx"):
                    opset = max(opset, version)
    except ValueError as exc:
        raise AssetError(f"malformed model file: {exc}") from exc
    if graph is None:
        raise AssetError("model file has no graph")
    return Model(
        graph=graph,
        opset_version=opset or 17,
        ir_version=ir_version or 8,
        producer_name=producer,
    )


def load_model(path) -> Model:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise AssetError(f"cannot read model file {path}: {exc}") from exc
    return parse_model(data)
