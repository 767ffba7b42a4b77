"""Run configuration: plain ``key = value`` text files.

Kernels are declared with repeated ``kernel = rbf:<sigma>`` or
``kernel = poly:<degree>`` lines.  The same keys are accepted as CLI
flags; flags override file values.  Configurations round-trip losslessly
through ``dumps``/``loads``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .hierarchy import HierarchyHyper
from .kernels import KernelSet
from .weights import ClasmkHyper

__all__ = ["RunConfig"]


@dataclass
class RunConfig:
    dataset: str = ""
    format: str = "csv"
    kernels: list = field(default_factory=list)
    mode: str = "clasmk"
    eta: float = 0.1
    t: float = 0.1
    T_kappa: float = 1.0
    L_max: int = 10
    epsilon: float = 1e-3
    split_fraction: float = 0.5
    ridge: float = 1e-3
    ridge_grid: list = field(default_factory=list)
    tol: float = 1e-3
    max_rank: int = 256
    seed: int = 0
    output_dir: str = "."

    _FLOATS = ("eta", "t", "T_kappa", "epsilon", "split_fraction", "ridge", "tol")
    _INTS = ("L_max", "max_rank", "seed")

    def validate(self):
        if self.format not in ("csv", "libsvm"):
            raise ValueError(f"unknown dataset format {self.format!r}")
        if self.mode not in ("clasmk", "clask", "single"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if not 0.0 <= self.t < 1.0:
            raise ValueError("t must lie in [0, 1)")
        if self.T_kappa <= 0.0:
            raise ValueError("T_kappa must be positive")
        if self.L_max < 1:
            raise ValueError("L_max must be >= 1")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must lie in (0, 1)")
        if self.ridge <= 0.0:
            raise ValueError("ridge must be positive")
        if not 0.0 <= self.tol < 1.0:
            raise ValueError("tol must lie in [0, 1)")
        if self.max_rank < 1:
            raise ValueError("max_rank must be >= 1")
        if not self.kernels:
            raise ValueError("at least one kernel must be declared")
        self.kernel_set()  # parses, validating each spec
        return self

    def kernel_set(self) -> KernelSet:
        return KernelSet.parse(self.kernels)

    def hyper(self) -> HierarchyHyper:
        return HierarchyHyper(
            L_max=self.L_max,
            T_kappa=self.T_kappa,
            epsilon=self.epsilon,
            ridge=self.ridge,
            ridge_grid=tuple(self.ridge_grid),
            clasmk=ClasmkHyper(
                eta=self.eta, t=self.t, split_fraction=self.split_fraction,
                split_seed=self.seed, tol=self.tol, max_rank=self.max_rank,
            ),
        )

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = key.strip(), value.strip()
            if key == "kernel":
                cfg.kernels.append(value)
            elif key in cls._FLOATS:
                setattr(cfg, key, float(value))
            elif key in cls._INTS:
                setattr(cfg, key, int(value))
            elif key == "ridge_grid":
                cfg.ridge_grid = [float(v) for v in value.split(",") if v.strip()]
            elif key in ("dataset", "format", "mode", "output_dir"):
                setattr(cfg, key, value)
            else:
                raise ValueError(f"line {lineno}: unknown configuration key {key!r}")
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.loads(fh.read())

    def dumps(self) -> str:
        lines = [
            f"dataset = {self.dataset}",
            f"format = {self.format}",
            f"mode = {self.mode}",
        ]
        lines += [f"kernel = {k}" for k in self.kernels]
        for key in self._FLOATS:
            lines.append(f"{key} = {getattr(self, key)!r}")
        for key in self._INTS:
            lines.append(f"{key} = {getattr(self, key)}")
        if self.ridge_grid:
            lines.append("ridge_grid = " + ",".join(repr(v) for v in self.ridge_grid))
        lines.append(f"output_dir = {self.output_dir}")
        return "\n".join(lines) + "\n"

    def dump(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())
