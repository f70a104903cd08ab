"""Writer output must parse correctly through the consumer's reader."""

import numpy as np
import pytest

from encoder_export.builder import FLOAT, INT64, GraphBuilder


def test_cross_implementation_round_trip():
    from ddr.onnx import parse_model

    b = GraphBuilder("roundtrip")
    x = b.input("x", FLOAT, ("batch", 4))
    w = b.init("w", np.arange(12, dtype=np.float32).reshape(4, 3))
    axes = b.init("axes", np.array([1], dtype=np.int64))
    h = b.node("MatMul", [x, w])
    s = b.node("Softmax", [h], axis=-1)
    b.node("Unsqueeze", [s, axes], outputs=["y"])
    b.output("y", FLOAT, ("batch", 1, 3))
    data = b.build(producer="writer-test", opset=17)

    model = parse_model(data)
    assert model.producer_name == "writer-test"
    assert model.opset_version == 17
    graph = model.graph
    assert graph.name == "roundtrip"
    assert [n.op_type for n in graph.nodes] == ["MatMul", "Softmax", "Unsqueeze"]
    assert graph.nodes[1].attrs["axis"] == -1
    assert np.array_equal(graph.initializers["w"], np.arange(12, dtype=np.float32).reshape(4, 3))
    assert graph.initializers["axes"].dtype == np.int64
    assert graph.inputs[0].shape == ("batch", 4)
    assert graph.outputs[0].shape == ("batch", 1, 3)


def test_executes_through_consumer_runtime():
    from ddr.onnx import GraphRunner, parse_model

    b = GraphBuilder("exec")
    b.input("x", FLOAT, ("n", 2))
    w = b.init("w", np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32))
    b.node("MatMul", ["x", w], outputs=["y"])
    b.output("y", FLOAT, ("n", 2))
    runner = GraphRunner(parse_model(b.build()))
    out = runner.run({"x": np.eye(2, dtype=np.float32)})["y"]
    assert np.allclose(out, [[1.0, 2.0], [3.0, 4.0]])


def test_attribute_types():
    from ddr.onnx import parse_model

    b = GraphBuilder("attrs")
    b.input("x", INT64, (3,))
    b.node(
        "Fake", ["x"], outputs=["y"],
        alpha=0.5, axis=-2, label="hello", ints=[1, -2, 3],
        tensor=np.array([1.5, 2.5], dtype=np.float32),
    )
    b.output("y", INT64, (3,))
    attrs = parse_model(b.build()).graph.nodes[0].attrs
    assert attrs["alpha"] == pytest.approx(0.5)
    assert attrs["axis"] == -2
    assert attrs["label"] == "hello"
    assert attrs["ints"] == [1, -2, 3]
    assert np.allclose(attrs["tensor"], [1.5, 2.5])


def test_bool_attr_rejected():
    b = GraphBuilder("bad")
    with pytest.raises(TypeError):
        b.node("Fake", [], outputs=["y"], flag=True)
