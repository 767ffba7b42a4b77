"""Versioned binary model file.

Layout (all integers unsigned little-endian 32-bit unless noted, all
floats little-endian IEEE-754 64-bit, arrays row-major):

    magic            4 bytes  "CMKM"
    version          u32      = 1
    mode             u8       0 = clasmk, 1 = clask, 2 = single
    warning          u32 byte length + utf-8 bytes
    standardizer     p: u32, mean: f64[p], scale: f64[p]
    kernel set       K: u32, then per kernel: family u8 (0 rbf, 1 poly), param f64
    labels           C: u32, original label values i64[C]
    d_nu trace       n: u32, f64[n]
    marginal sizes   n: u32, u32[n]
    layers           L: u32, then per layer:
        nu           C: u32, K: u32, f64[C*K]
        bases        n_bases: u32, then per basis:
                         class u32, kernel u32, m u32, p u32, r u32,
                         landmarks f64[m*p], transform f64[m*r]
        classifier   q: u32, C: u32, W f64[q*C], b f64[C], ridge f64

The format is self-contained so other implementations can interoperate.
"""

from __future__ import annotations

import struct

import numpy as np

from .data import Standardizer
from .hierarchy import HierarchicalModel, LayerModel
from .kernels import KernelFamily, KernelSet, KernelSpec
from .lssvm import LinearModel
from .pipeline import PipelineModel
from .subspace import BasisBank, ClassBasis
from .weights import WeightMatrix

__all__ = ["save_model", "load_model", "MAGIC", "VERSION"]

MAGIC = b"CMKM"
VERSION = 1
_MODES = ("clasmk", "clask", "single")
_FAMILIES = (KernelFamily.RBF, KernelFamily.POLY)


class _Writer:
    def __init__(self, fh):
        self.fh = fh

    def u8(self, v):
        self.fh.write(struct.pack("<B", v))

    def u32(self, v):
        self.fh.write(struct.pack("<I", v))

    def f64(self, v):
        self.fh.write(struct.pack("<d", v))

    def f64s(self, arr):
        self.fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    def i64s(self, arr):
        self.fh.write(np.ascontiguousarray(arr, dtype="<i8").tobytes())

    def text(self, s):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.fh.write(raw)


class _Reader:
    def __init__(self, fh):
        self.fh = fh

    def _read(self, n):
        raw = self.fh.read(n)
        if len(raw) != n:
            raise ValueError("truncated model file")
        return raw

    def u8(self):
        return struct.unpack("<B", self._read(1))[0]

    def u32(self):
        return struct.unpack("<I", self._read(4))[0]

    def f64(self):
        return struct.unpack("<d", self._read(8))[0]

    def f64s(self, shape):
        n = int(np.prod(shape)) if shape else 0
        return np.frombuffer(self._read(8 * n), dtype="<f8").reshape(shape).astype(np.float64)

    def i64s(self, n):
        return np.frombuffer(self._read(8 * n), dtype="<i8").astype(np.int64)

    def u32s(self, n):
        return [self.u32() for _ in range(n)]

    def text(self):
        return self._read(self.u32()).decode("utf-8")


def save_model(path, model: PipelineModel):
    with open(path, "wb") as fh:
        w = _Writer(fh)
        fh.write(MAGIC)
        w.u32(VERSION)
        w.u8(_MODES.index(model.mode))
        w.text(model.hmodel.warning)

        std = model.standardizer
        w.u32(len(std.mean))
        w.f64s(std.mean)
        w.f64s(std.scale)

        w.u32(len(model.kernel_set))
        for spec in model.kernel_set:
            w.u8(_FAMILIES.index(spec.family))
            w.f64(float(spec.param))

        w.u32(len(model.label_values))
        w.i64s(np.asarray(model.label_values, dtype=np.int64))

        w.u32(len(model.hmodel.d_nu_trace))
        w.f64s(np.asarray(model.hmodel.d_nu_trace, dtype=np.float64))
        w.u32(len(model.hmodel.marginal_sizes))
        for s in model.hmodel.marginal_sizes:
            w.u32(int(s))

        w.u32(model.hmodel.n_layers)
        for layer in model.hmodel.layers:
            nu = layer.weights.nu
            w.u32(nu.shape[0])
            w.u32(nu.shape[1])
            w.f64s(nu)
            items = sorted(layer.bank.items())
            w.u32(len(items))
            for (c, k), basis in items:
                w.u32(c)
                w.u32(k)
                w.u32(basis.n_landmarks)
                w.u32(basis.landmarks.shape[1])
                w.u32(basis.rank)
                w.f64s(basis.landmarks)
                w.f64s(basis.transform)
            clf = layer.classifier
            w.u32(clf.n_features)
            w.u32(clf.n_classes)
            w.f64s(clf.W)
            w.f64s(clf.b)
            w.f64(clf.ridge)


def load_model(path) -> PipelineModel:
    with open(path, "rb") as fh:
        r = _Reader(fh)
        if r._read(4) != MAGIC:
            raise ValueError(f"{path}: not a model file (bad magic)")
        version = r.u32()
        if version != VERSION:
            raise ValueError(f"{path}: unsupported model version {version}")
        mode = _MODES[r.u8()]
        warning = r.text()

        p = r.u32()
        std = Standardizer(r.f64s((p,)), r.f64s((p,)))

        K = r.u32()
        specs = []
        for _ in range(K):
            family = _FAMILIES[r.u8()]
            specs.append(KernelSpec(family, r.f64()))
        kernel_set = KernelSet(tuple(specs))

        C = r.u32()
        labels = r.i64s(C)

        d_nu = list(r.f64s((r.u32(),)))
        marg = r.u32s(r.u32())

        layers = []
        for li in range(r.u32()):
            nC, nK = r.u32(), r.u32()
            nu = WeightMatrix(r.f64s((nC, nK)))
            bank = BasisBank()
            for _ in range(r.u32()):
                c, k, m, pdim, rank = r.u32(), r.u32(), r.u32(), r.u32(), r.u32()
                landmarks = r.f64s((m, pdim))
                transform = r.f64s((m, rank))
                bank.add(ClassBasis(c, k, kernel_set[k], landmarks, transform))
            q, nc = r.u32(), r.u32()
            clf = LinearModel(r.f64s((q, nc)), r.f64s((nc,)), r.f64())
            layers.append(LayerModel(li + 1, nu, bank, clf))

        hmodel = HierarchicalModel(layers=layers, d_nu_trace=d_nu,
                                   marginal_sizes=marg, warning=warning)
        return PipelineModel(std, kernel_set, hmodel, labels, mode)
