"""Versioned binary model container.

Layout: magic ``SVPM``, u16 version, u8 kind tag, u64 feature-map
fingerprint, u32 column count, then a kind-specific payload. All reals are
little-endian float64, so save/load round-trips parameters bit-exactly.
"""
from __future__ import annotations

import struct

import numpy as np

from ..errors import ModelIOError
from .adaboost import AdaBoostModel, Stump
from .config import ADABOOST, FOREST, LOGISTIC, MLP
from .logistic import LogisticModel
from .mlp import MlpModel
from .trees import ForestModel, Tree

MAGIC = b"SVPM"
VERSION = 1
_KIND_TAGS = {LOGISTIC: 1, FOREST: 2, ADABOOST: 3, MLP: 4}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelIOError("model container is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def i8(self) -> int:
        return struct.unpack("<b", self.take(1))[0]

    def floats(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * n), dtype="<f8").copy()

    def ints(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * n), dtype="<i4").copy()


def _pack_floats(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def _pack_ints(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<i4").tobytes()


def _tree_bytes(tree: Tree) -> bytes:
    n = len(tree.feature)
    return b"".join([
        struct.pack("<I", n),
        _pack_ints(tree.feature), _pack_floats(tree.threshold),
        _pack_ints(tree.left), _pack_ints(tree.right),
        _pack_floats(tree.vote), _pack_floats(tree.gain),
    ])


def _read_tree(r: _Reader) -> Tree:
    n = r.u32()
    return Tree(r.ints(n), r.floats(n), r.ints(n), r.ints(n), r.floats(n), r.floats(n))


def save_model(model) -> bytes:
    out = [MAGIC, struct.pack("<H", VERSION),
           struct.pack("<B", _KIND_TAGS[model.kind]),
           struct.pack("<Q", model.fingerprint),
           struct.pack("<I", model.n_columns)]
    if model.kind == LOGISTIC:
        out.append(struct.pack("<I", len(model.weights)))
        out.append(_pack_floats(model.weights))
        out.append(struct.pack("<d", model.bias))
    elif model.kind == FOREST:
        out.append(struct.pack("<B", 0 if model.criterion == "gini" else 1))
        out.append(struct.pack("<I", len(model.trees)))
        out.extend(_tree_bytes(t) for t in model.trees)
    elif model.kind == ADABOOST:
        out.append(struct.pack("<I", len(model.stumps)))
        for stump, alpha, gain in zip(model.stumps, model.alphas, model.gains):
            out.append(struct.pack("<Idbdd", stump.feature, stump.threshold,
                                   stump.left_sign, alpha, gain))
    elif model.kind == MLP:
        out.append(struct.pack("<I", len(model.weights)))
        for W, b in zip(model.weights, model.biases):
            out.append(struct.pack("<II", *W.shape))
            out.append(_pack_floats(W))
            out.append(_pack_floats(b))
    else:  # pragma: no cover - dispatch guards kinds upstream
        raise ModelIOError(f"cannot serialize kind {model.kind!r}")
    return b"".join(out)


def load_model(data: bytes, expected_kind: str | None = None):
    """Decode a model container; raises ModelIOError on corruption,
    version mismatch, or (when expected_kind is given) kind mismatch."""
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise ModelIOError("bad magic bytes: not a model container")
    version = r.u16()
    if version != VERSION:
        raise ModelIOError(f"unsupported container version {version}")
    tag = r.u8()
    kind = _TAG_KINDS.get(tag)
    if kind is None:
        raise ModelIOError(f"unknown model kind tag {tag}")
    if expected_kind is not None and kind != expected_kind:
        raise ModelIOError(f"expected a {expected_kind} model, container holds {kind}")
    fingerprint = r.u64()
    n_columns = r.u32()
    if kind == LOGISTIC:
        d = r.u32()
        weights = r.floats(d)
        bias = r.f64()
        model = LogisticModel(weights, bias, fingerprint)
    elif kind == FOREST:
        criterion = "gini" if r.u8() == 0 else "entropy"
        trees = [_read_tree(r) for _ in range(r.u32())]
        model = ForestModel(trees, n_columns, fingerprint, criterion)
    elif kind == ADABOOST:
        stumps, alphas, gains = [], [], []
        for _ in range(r.u32()):
            f, thr, sign, alpha, gain = struct.unpack("<Idbdd", r.take(29))
            stumps.append(Stump(f, thr, sign))
            alphas.append(alpha)
            gains.append(gain)
        model = AdaBoostModel(stumps, alphas, gains, n_columns, fingerprint)
    else:
        weights, biases = [], []
        for _ in range(r.u32()):
            fan_in, fan_out = r.u32(), r.u32()
            weights.append(r.floats(fan_in * fan_out).reshape(fan_in, fan_out))
            biases.append(r.floats(fan_out))
        model = MlpModel(weights, biases, fingerprint)
    if r.pos != len(data):
        raise ModelIOError(f"{len(data) - r.pos} trailing bytes after model payload")
    return model
