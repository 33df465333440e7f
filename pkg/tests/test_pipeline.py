import json
import socket
import struct
import threading

import numpy as np
import pytest

from inds.cli import main as cli_main
from inds.pipeline import (
    DataError,
    OptimConfig,
    PipelineConfig,
    build_columns,
    builtin_encode,
    cmd_eval,
    cmd_extract,
    cmd_train,
    load_features,
    stratified_split,
)
from inds.predictors import RemotePredictor
from inds.selection import SelectionConfig
from inds.synth import SyntheticSpec, synth_dataset
from inds.tensors import VideoManifestEntry, write_manifest, write_tensor
from inds.tpe import Dimension

SMALL_SPACE = [
    Dimension("learning_rate", "loguniform", 0.05, 0.3),
    Dimension("num_trees", "int", 20, 80),
    Dimension("max_leaves", "int", 7, 31),
    Dimension("min_samples_leaf", "int", 2, 20),
    Dimension("feature_fraction", "uniform", 0.5, 1.0),
    Dimension("bagging_fraction", "uniform", 0.5, 1.0),
    Dimension("l2_reg", "loguniform", 1e-3, 10.0),
]


def small_config(**over):
    base = dict(
        latent_size=8,
        strategy="modules:correlation.,texture.",
        optim=OptimConfig(trials=3, seed=0),
        seed=0,
    )
    base.update(over)
    return PipelineConfig(**base)


@pytest.fixture(scope="module")
def synth_features(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("synthpipe")
    manifest = synth_dataset(SyntheticSpec(n_real=30, n_generated=30), seed=0, out_dir=tmp / "d")
    config = small_config()
    result = cmd_extract(manifest, config, tmp / "features")
    return tmp, manifest, config, result


class TestExtract:
    def test_row_per_video(self, synth_features):
        _, _, _, result = synth_features
        assert result.matrix.shape[0] == 60
        assert len(set(result.names)) == len(result.names)

    def test_rerun_bit_identical(self, synth_features, tmp_path):
        tmp, manifest, config, result = synth_features
        again = cmd_extract(manifest, config, tmp_path / "f2")
        assert np.array_equal(
            result.matrix.astype(np.float32), again.matrix.astype(np.float32)
        )

    def test_feature_files_roundtrip(self, synth_features):
        tmp, _, _, result = synth_features
        back = load_features(tmp / "features")
        assert back.names == result.names
        assert np.array_equal(back.labels, result.labels)
        assert np.allclose(back.matrix, result.matrix.astype(np.float32), atol=0)

    def test_noise_kind_skips_inversion(self, synth_features):
        _, _, _, result = synth_features
        assert result.inversion_seconds == 0.0

    def test_latents_kind_runs_inversion(self, tmp_path):
        rng = np.random.default_rng(0)
        entries = []
        for k in range(4):
            path = tmp_path / f"v{k}.ltns"
            write_tensor(path, rng.standard_normal((8, 4, 8, 8)).astype(np.float32))
            entries.append(
                VideoManifestEntry(
                    id=f"v{k}", tensor_path=str(path),
                    label="real" if k % 2 else "generated",
                    source="s", kind="latents",
                )
            )
        manifest = tmp_path / "m.jsonl"
        write_manifest(manifest, entries)
        config = small_config(inversion_steps=3, predictor="builtin:linear:0.2")
        result = cmd_extract(manifest, config, None)
        assert result.matrix.shape[0] == 4
        assert result.inversion_seconds > 0

    def test_failure_isolation_and_abort(self, tmp_path):
        rng = np.random.default_rng(1)
        entries = []
        good = tmp_path / "good.ltns"
        write_tensor(good, rng.standard_normal((8, 4, 8, 8)).astype(np.float32))
        entries.append(VideoManifestEntry(id="good", tensor_path=str(good),
                                          label="real", source="s", kind="noise"))
        entries.append(VideoManifestEntry(id="missing", tensor_path=str(tmp_path / "nope.ltns"),
                                          label="generated", source="s", kind="noise"))
        manifest = tmp_path / "m.jsonl"
        write_manifest(manifest, entries)
        result = cmd_extract(manifest, small_config(), None)
        assert len(result.ids) == 1 and len(result.failures) == 1

        # > 50% failing aborts
        entries_bad = [entries[1], entries[1]]
        write_manifest(manifest, entries_bad)
        with pytest.raises(DataError):
            cmd_extract(manifest, small_config(), None)

    def test_workers_match_sequential(self, synth_features, tmp_path):
        tmp, manifest, config, result = synth_features
        from dataclasses import replace

        par = cmd_extract(manifest, replace(config, workers=2), None)
        assert np.array_equal(par.matrix, result.matrix)
        assert par.ids == result.ids


class TestBuiltinEncode:
    def test_shapes_and_pooling(self):
        config = small_config(latent_channels=4, latent_size=8)
        frame = np.random.default_rng(0).uniform(0, 255, (32, 32, 3))
        latent = builtin_encode(frame, config)
        assert latent.shape == (4, 8, 8)
        # channel cycling: 4th latent channel repeats pixel channel 0
        assert np.array_equal(latent[3], latent[0])
        # area pooling preserves the frame mean
        assert latent[0].mean() == pytest.approx(frame[:, :, 0].mean())


class TestSplit:
    def test_stratified_fractions(self):
        y = np.array([0] * 40 + [1] * 20)
        tr, va = stratified_split(y, 0.25, seed=0)
        assert len(set(tr) & set(va)) == 0
        assert len(tr) + len(va) == 60
        assert (y[va] == 0).sum() == 10 and (y[va] == 1).sum() == 5

    def test_deterministic(self):
        y = np.array([0, 1] * 20)
        a = stratified_split(y, 0.2, seed=5)
        b = stratified_split(y, 0.2, seed=5)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_too_small_rejected(self):
        with pytest.raises(DataError):
            stratified_split(np.array([0, 1]), 0.5, seed=0)


class TestTrainEval:
    def test_train_produces_bundle(self, synth_features, tmp_path):
        _, _, config, result = synth_features
        out = tmp_path / "bundle"
        train_res = cmd_train(result, config, out, space=SMALL_SPACE)
        assert (out / "model.json").exists()
        assert (out / "bundle.json").exists()
        doc = json.loads((out / "bundle.json").read_text())
        assert doc["strategy"] == config.strategy
        assert all(
            n.startswith(("correlation.", "texture.")) for n in doc["selected"]
        )
        assert len(train_res.trials) == config.optim.trials
        # gate law on the log
        for t in train_res.trials:
            if t.metrics and t.metrics["gdr"] < config.optim.tau:
                assert t.objective == 0.0

    def test_eval_on_training_matrix(self, synth_features, tmp_path):
        _, _, config, result = synth_features
        out = tmp_path / "bundle"
        cmd_train(result, config, out, space=SMALL_SPACE)
        rep = cmd_eval(out, result)
        assert 0.0 <= rep.accuracy <= 1.0
        assert set(rep.per_source) == {"synth-generator", "synth-real"}

    def test_gate_law_under_shuffled_labels(self, synth_features, tmp_path):
        # the ROC traversal always reaches recall 1 at the lowest threshold,
        # so a tau < 1 constraint is satisfied by every trial and the gate
        # law reduces to J = 0.7 acc + 0.3 gdr with gdr >= tau
        _, _, config, result = synth_features
        from dataclasses import replace

        hard = replace(config, optim=OptimConfig(tau=0.95, m=1.008, trials=3, seed=0))
        shuffled = np.random.default_rng(0).permutation(result.labels)
        broken = type(result)(
            matrix=result.matrix, names=result.names, labels=shuffled,
            sources=result.sources, ids=result.ids, failures=[], inversion_seconds=0.0,
        )
        res = cmd_train(broken, hard, tmp_path / "b2", space=SMALL_SPACE)
        for t in res.trials:
            gdr = t.metrics["gdr"]
            if gdr < hard.optim.tau:
                assert t.objective == 0.0
            else:
                assert t.objective == pytest.approx(
                    0.7 * t.metrics["accuracy"] + 0.3 * gdr
                )
            assert gdr >= hard.optim.tau  # the traversal guarantee

    def test_training_deterministic(self, synth_features, tmp_path):
        _, _, config, result = synth_features
        a = cmd_train(result, config, tmp_path / "da", space=SMALL_SPACE)
        b = cmd_train(result, config, tmp_path / "db", space=SMALL_SPACE)
        assert a.bundle == b.bundle
        assert (tmp_path / "da" / "model.json").read_text() == (
            tmp_path / "db" / "model.json"
        ).read_text()

    def test_missing_feature_listed(self, synth_features):
        _, _, _, result = synth_features
        with pytest.raises(DataError, match="missing"):
            build_columns(result.matrix, result.names, ["nope.feature"], SelectionConfig())

    def test_cross_columns_rebuilt(self, synth_features):
        _, _, _, result = synth_features
        cfg = SelectionConfig()
        a, b = result.names[0], result.names[1]
        cols = build_columns(
            result.matrix, result.names,
            [f"cross.prod.{a}__{b}", f"cross.ratio.{a}__{b}", f"cross.affine.{a}__{b}"],
            cfg,
        )
        fa, fb = result.matrix[:, 0], result.matrix[:, 1]
        assert np.allclose(cols[:, 0], fa * fb)
        assert np.allclose(cols[:, 1], fa / (fb + cfg.epsilon))
        assert np.allclose(cols[:, 2], cfg.alpha * fa + cfg.beta * fb)


class _EchoEpsServer(threading.Thread):
    """Minimal eps service: returns 0.1 * x, echoing the step index."""

    def __init__(self):
        super().__init__(daemon=True)
        self.sock = socket.create_server(("127.0.0.1", 0))
        self.port = self.sock.getsockname()[1]

    def run(self):
        conn, _ = self.sock.accept()
        with conn:
            while True:
                head = b""
                while len(head) < 12:
                    chunk = conn.recv(12 - len(head))
                    if not chunk:
                        return
                    head += chunk
                _, step, length = struct.unpack("<III", head)
                body = b""
                while len(body) < length:
                    body += conn.recv(length - len(body))
                ndim = struct.unpack_from("<I", body, 12)[0]
                dims = struct.unpack_from(f"<{ndim}Q", body, 16)
                off = 16 + 8 * ndim
                arr = np.frombuffer(body, dtype="<f4", offset=off).reshape(dims)
                out = (0.1 * arr).astype("<f4")
                payload = body[:off] + out.tobytes()
                conn.sendall(struct.pack("<III", 2, step, len(payload)) + payload)


class TestRemotePredictor:
    def test_roundtrip_against_stub(self):
        server = _EchoEpsServer()
        server.start()
        pred = RemotePredictor(f"127.0.0.1:{server.port}")
        x = np.random.default_rng(0).standard_normal((4, 8, 8))
        out = pred.predict(x, 3)
        assert out.shape == x.shape
        assert np.allclose(out, 0.1 * x.astype(np.float32), atol=1e-6)
        pred.close()

    def test_unreachable_endpoint(self):
        from inds.predictors import PredictorError

        pred = RemotePredictor("127.0.0.1:1")
        with pytest.raises(PredictorError):
            pred.predict(np.zeros((2, 2)), 0)


class TestCli:
    def test_synth_extract_train_eval(self, tmp_path, capsys):
        assert cli_main([
            "synth", "--out", str(tmp_path / "d"),
            "--n-real", "16", "--n-generated", "16", "--seed", "1",
        ]) == 0
        assert cli_main([
            "extract", "--manifest", str(tmp_path / "d" / "manifest.jsonl"),
            "--out", str(tmp_path / "f"), "--latent-size", "8",
            "--modules", "spacetime,texture",
        ]) == 0
        assert cli_main([
            "train", "--features", str(tmp_path / "f"), "--out", str(tmp_path / "b"),
            "--strategy", "modules:correlation.,texture.", "--trials", "2",
            "--latent-size", "8",
        ]) == 0
        assert cli_main([
            "eval", "--bundle", str(tmp_path / "b"), "--features", str(tmp_path / "f"),
            "--out", str(tmp_path / "report.json"),
        ]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert "accuracy" in report
        out = capsys.readouterr().out
        assert "overall" in out

    def test_data_error_exit_code(self, tmp_path):
        rc = cli_main([
            "extract", "--manifest", str(tmp_path / "missing.jsonl"),
            "--out", str(tmp_path / "f"),
        ])
        assert rc == 3

    def test_predictor_error_exit_code(self, tmp_path):
        rng = np.random.default_rng(0)
        p = tmp_path / "v.ltns"
        write_tensor(p, rng.standard_normal((8, 4, 8, 8)).astype(np.float32))
        entries = [
            VideoManifestEntry(id=f"v{k}", tensor_path=str(p), label="real",
                               source="s", kind="latents")
            for k in range(2)
        ]
        write_manifest(tmp_path / "m.jsonl", entries)
        rc = cli_main([
            "extract", "--manifest", str(tmp_path / "m.jsonl"),
            "--out", str(tmp_path / "f"),
            "--predictor", "builtin:doesnotexist",
        ])
        assert rc == 4

    def test_config_file_and_env_override(self, tmp_path, monkeypatch):
        cfg = {"latent_size": 8, "predictor": "builtin:zero"}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        config = PipelineConfig.from_dict(json.loads(cfg_path.read_text()))
        assert config.latent_size == 8
        monkeypatch.setenv("DBINDS_PREDICTOR", "builtin:frozen:3")
        assert config.effective_predictor() == "builtin:frozen:3"
        monkeypatch.delenv("DBINDS_PREDICTOR")
        assert config.effective_predictor() == "builtin:zero"

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            cli_main(["extract"])  # missing required flags
        assert exc.value.code == 2
