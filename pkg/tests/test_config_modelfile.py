import numpy as np
import pytest

from clasmk.config import RunConfig
from clasmk.hierarchy import HierarchyHyper
from clasmk.kernels import KernelSet
from clasmk.modelfile import load_model, save_model
from clasmk.pipeline import train_pipeline
from clasmk.synth import blobs
from clasmk.weights import ClasmkHyper


class TestRunConfig:
    def test_text_roundtrip(self):
        cfg = RunConfig(dataset="d.csv", kernels=["rbf:0.5", "poly:8"], eta=0.01,
                        t=1e-4, L_max=3, seed=11, ridge_grid=[1e-4, 1e-2],
                        output_dir="out", mode="clask")
        again = RunConfig.loads(cfg.dumps())
        assert again == cfg
        assert RunConfig.loads(again.dumps()) == again

    def test_kernel_lines_accumulate(self):
        cfg = RunConfig.loads("kernel = rbf:1\nkernel = poly:2\n")
        assert cfg.kernels == ["rbf:1", "poly:2"]

    def test_comments_and_blank_lines(self):
        cfg = RunConfig.loads("# a comment\n\neta = 0.05  # trailing\n")
        assert cfg.eta == 0.05

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            RunConfig.loads("bogus = 1\n")

    def test_validation_domains(self):
        cfg = RunConfig(dataset="d", kernels=["rbf:1"])
        cfg.eta = 2.0
        with pytest.raises(ValueError):
            cfg.validate()
        cfg = RunConfig(dataset="d", kernels=[])
        with pytest.raises(ValueError):
            cfg.validate()
        cfg = RunConfig(dataset="d", kernels=["rbf:-2"])
        with pytest.raises(ValueError):
            cfg.validate()

    def test_hyper_conversion(self):
        cfg = RunConfig(dataset="d", kernels=["rbf:1"], eta=0.02, t=0.3, L_max=4,
                        T_kappa=0.7, epsilon=1e-4, split_fraction=0.4, ridge=0.01,
                        tol=1e-2, max_rank=64, seed=3)
        hyper = cfg.hyper()
        assert isinstance(hyper, HierarchyHyper)
        assert hyper.L_max == 4 and hyper.T_kappa == 0.7
        assert hyper.clasmk.eta == 0.02 and hyper.clasmk.max_rank == 64
        assert hyper.clasmk.split_seed == 3


class TestModelFile:
    def _trained_model(self, mode="clasmk"):
        X, y = blobs([[1.5, 0.0], [-1.5, 0.0]], 40, 0.5, seed=1)
        ks = KernelSet.parse(["rbf:1", "poly:2"] if mode != "single" else ["rbf:1"])
        hyper = HierarchyHyper(L_max=2, epsilon=0.0, clasmk=ClasmkHyper(split_seed=1))
        return train_pipeline(X, y, ks, hyper, mode=mode), X, y

    @pytest.mark.parametrize("mode", ["clasmk", "clask", "single"])
    def test_roundtrip_preserves_predictions(self, tmp_path, mode):
        model, X, y = self._trained_model(mode)
        path = tmp_path / "m.bin"
        save_model(path, model)
        loaded = load_model(path)
        assert loaded.mode == mode
        assert np.array_equal(loaded.predict(X), model.predict(X))
        assert np.allclose(loaded.embed(X), model.embed(X))

    def test_roundtrip_preserves_metadata(self, tmp_path):
        model, _, _ = self._trained_model()
        path = tmp_path / "m.bin"
        save_model(path, model)
        loaded = load_model(path)
        assert loaded.kernel_set.names == model.kernel_set.names
        assert np.array_equal(loaded.label_values, model.label_values)
        assert loaded.hmodel.marginal_sizes == list(model.hmodel.marginal_sizes)
        assert np.allclose(loaded.hmodel.d_nu_trace, model.hmodel.d_nu_trace)
        for a, b in zip(loaded.hmodel.layers, model.hmodel.layers):
            assert np.array_equal(a.weights.nu, b.weights.nu)
            assert a.classifier.ridge == b.classifier.ridge

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ValueError, match="magic"):
            load_model(p)

    def test_truncated_file_rejected(self, tmp_path):
        model, _, _ = self._trained_model()
        path = tmp_path / "m.bin"
        save_model(path, model)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(ValueError, match="truncated"):
            load_model(path)
