"""Numpy kernels for the operator subset the encoder graphs use.

Precision policy: float16/float32 tensors are upcast to float64 inside each
kernel and the result is cast back to the edge's dtype. That keeps repeated
runs bit-identical and limits divergence from source frameworks to their own
single-precision rounding.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from ..exceptions import SessionError
from .model import DTYPE_TO_NUMPY

_SMALL_FLOATS = (np.dtype(np.float16), np.dtype(np.float32))


def _up(a: np.ndarray) -> np.ndarray:
    return a.astype(np.float64) if a.dtype in _SMALL_FLOATS else a


def _down(a, dtype) -> np.ndarray:
    a = np.asarray(a)
    return a.astype(dtype) if a.dtype != dtype else a


def _binary(fn):
    def op(attrs, a, b):
        out_dtype = np.result_type(a.dtype, b.dtype)
        return _down(fn(_up(a), _up(b)), out_dtype)

    return op


def _unary(fn):
    def op(attrs, a):
        return _down(fn(_up(a)), a.dtype)

    return op


def _axes_from(attrs, rest, default_all_of=None):
    """Reduce axes given either as an attribute or as an optional input."""
    axes = attrs.get("axes")
    if axes is None and rest and rest[0] is not None and rest[0].size:
        axes = [int(v) for v in rest[0].ravel()]
    if axes is None:
        return None if default_all_of is None else tuple(range(default_all_of))
    return tuple(int(a) for a in axes)


def _reduce(fn):
    def op(attrs, a, *rest):
        axes = _axes_from(attrs, rest, default_all_of=a.ndim)
        keepdims = bool(attrs.get("keepdims", 1))
        out = fn(_up(a), axis=axes, keepdims=keepdims)
        return _down(out, a.dtype)

    return op


def _op_matmul(attrs, a, b):
    out_dtype = np.result_type(a.dtype, b.dtype)
    return _down(np.matmul(_up(a), _up(b)), out_dtype)


def _op_gemm(attrs, a, b, c=None):
    alpha = attrs.get("alpha", 1.0)
    beta = attrs.get("beta", 1.0)
    if attrs.get("transA", 0):
        a = a.T
    if attrs.get("transB", 0):
        b = b.T
    out = alpha * np.matmul(_up(a), _up(b))
    if c is not None and beta != 0.0:
        out = out + beta * _up(c)
    return _down(out, a.dtype)


def _op_conv(attrs, x, w, b=None):
    if attrs.get("group", 1) != 1:
        raise SessionError("Conv: only group=1 is supported")
    if any(d != 1 for d in attrs.get("dilations", [1, 1])):
        raise SessionError("Conv: only dilation=1 is supported")
    if x.ndim != 4 or w.ndim != 4:
        raise SessionError("Conv: only 2-D convolutions are supported")
    sh, sw = attrs.get("strides", [1, 1])
    pads = attrs.get("pads", [0, 0, 0, 0])
    xf = _up(x)
    if any(pads):
        xf = np.pad(xf, ((0, 0), (0, 0), (pads[0], pads[2]), (pads[1], pads[3])))
    kh, kw = w.shape[2], w.shape[3]
    windows = sliding_window_view(xf, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    # windows: [N, C, OH, OW, kh, kw] -> contract C, kh, kw against [M, C, kh, kw]
    out = np.tensordot(windows, _up(w), axes=([1, 4, 5], [1, 2, 3]))
    out = np.moveaxis(out, -1, 1)
    if b is not None:
        out = out + _up(b)[None, :, None, None]
    return _down(out, x.dtype)


def _op_reshape(attrs, x, shape):
    target = [int(v) for v in shape.ravel()]
    out_shape = []
    for i, dim in enumerate(target):
        if dim == 0 and not attrs.get("allowzero", 0):
            out_shape.append(x.shape[i])
        else:
            out_shape.append(dim)
    return x.reshape(out_shape)


def _op_transpose(attrs, x):
    perm = attrs.get("perm")
    return np.transpose(x, perm)


def _op_concat(attrs, *parts):
    return np.concatenate(parts, axis=int(attrs["axis"]))


def _op_softmax(attrs, x):
    axis = int(attrs.get("axis", -1))
    xf = _up(x)
    shifted = xf - xf.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return _down(e / e.sum(axis=axis, keepdims=True), x.dtype)


def _op_layer_normalization(attrs, x, scale, bias=None):
    axis = int(attrs.get("axis", -1))
    eps = attrs.get("epsilon", 1e-5)
    if axis < 0:
        axis += x.ndim
    axes = tuple(range(axis, x.ndim))
    xf = _up(x)
    mean = xf.mean(axis=axes, keepdims=True)
    var = xf.var(axis=axes, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    y = (xf - mean) * inv_std * _up(scale)
    if bias is not None:
        y = y + _up(bias)
    return (
        _down(y, x.dtype),
        _down(mean, np.float32),
        _down(inv_std, np.float32),
    )


def _op_cast(attrs, x):
    to = int(attrs["to"])
    if to not in DTYPE_TO_NUMPY:
        raise SessionError(f"Cast: unsupported target type {to}")
    return x.astype(DTYPE_TO_NUMPY[to])


def _op_gather(attrs, x, indices):
    axis = int(attrs.get("axis", 0))
    return np.take(x, indices.astype(np.int64), axis=axis)


def _op_unsqueeze(attrs, x, *rest):
    axes = _axes_from(attrs, rest)
    if axes is None:
        raise SessionError("Unsqueeze: axes missing")
    out = x
    for axis in sorted(a if a >= 0 else a + x.ndim + len(axes) for a in axes):
        out = np.expand_dims(out, axis)
    return out


def _op_squeeze(attrs, x, *rest):
    axes = _axes_from(attrs, rest)
    if axes is None:
        return np.squeeze(x)
    return np.squeeze(x, axis=tuple(axes))


def _op_slice(attrs, x, starts, ends, axes=None, steps=None):
    starts = [int(v) for v in starts.ravel()]
    ends = [int(v) for v in ends.ravel()]
    axis_list = (
        [int(v) for v in axes.ravel()] if axes is not None else list(range(len(starts)))
    )
    step_list = [int(v) for v in steps.ravel()] if steps is not None else [1] * len(starts)
    slices = [slice(None)] * x.ndim
    for start, end, axis, step in zip(starts, ends, axis_list, step_list):
        slices[axis] = slice(start, end, step)
    return x[tuple(slices)]


def _op_shape(attrs, x):
    dims = np.asarray(x.shape, dtype=np.int64)
    start = int(attrs.get("start", 0))
    end = attrs.get("end")
    return dims[start : None if end is None else int(end)]


def _op_expand(attrs, x, shape):
    target = tuple(int(v) for v in shape.ravel())
    out_shape = np.broadcast_shapes(x.shape, target)
    return np.broadcast_to(x, out_shape).copy()


def _op_flatten(attrs, x):
    axis = int(attrs.get("axis", 1))
    lead = int(np.prod(x.shape[:axis], dtype=np.int64)) if axis else 1
    return x.reshape(lead, -1)


def _op_constant(attrs, *unused):
    value = attrs.get("value")
    if not isinstance(value, np.ndarray):
        raise SessionError("Constant: only tensor values are supported")
    return value


def _op_where(attrs, cond, a, b):
    out_dtype = np.result_type(a.dtype, b.dtype)
    return _down(np.where(cond, a, b), out_dtype)


def _op_equal(attrs, a, b):
    return np.equal(a, b)


def _op_pow(attrs, a, b):
    return _down(np.power(_up(a), _up(b)), a.dtype)


REGISTRY = {
    "Add": _binary(np.add),
    "Sub": _binary(np.subtract),
    "Mul": _binary(np.multiply),
    "Div": _binary(np.true_divide),
    "Pow": _op_pow,
    "MatMul": _op_matmul,
    "Gemm": _op_gemm,
    "Conv": _op_conv,
    "Reshape": _op_reshape,
    "Transpose": _op_transpose,
    "Concat": _op_concat,
    "Softmax": _op_softmax,
    "LayerNormalization": _op_layer_normalization,
    "Cast": _op_cast,
    "Gather": _op_gather,
    "Unsqueeze": _op_unsqueeze,
    "Squeeze": _op_squeeze,
    "Slice": _op_slice,
    "Shape": _op_shape,
    "Expand": _op_expand,
    "Flatten": _op_flatten,
    "Constant": _op_constant,
    "Where": _op_where,
    "Equal": _op_equal,
    "Identity": lambda attrs, x: x,
    "Neg": _unary(np.negative),
    "Sqrt": _unary(np.sqrt),
    "Exp": _unary(np.exp),
    "Erf": _unary(special.erf),
    "Sigmoid": _unary(special.expit),
    "Tanh": _unary(np.tanh),
    "Relu": _unary(lambda a: np.maximum(a, 0.0)),
    "ReduceMean": _reduce(np.mean),
    "ReduceSum": _reduce(np.sum),
    "ReduceMax": _reduce(np.max),
    "ReduceMin": _reduce(np.min),
}
