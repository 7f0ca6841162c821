"""
Unit tests for the run manifest and runtime settings.
"""

import hashlib
import json

from portfolio_rl.manifest import MANIFEST_FILE, RunManifest, sha256_file
from portfolio_rl.settings import RuntimeSettings


def test_sha256_file(tmp_path):
    path = tmp_path / "a.csv"
    path.write_bytes(b"date,open\n")
    assert sha256_file(path) == hashlib.sha256(b"date,open\n").hexdigest()


def test_manifest_lists_inputs_and_artifacts(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    (data / "B.csv").write_text("b")
    (data / "A.csv").write_text("a")
    out = tmp_path / "out"
    (out / "checkpoints" / "final").mkdir(parents=True)
    (out / "run_log.csv").write_text("episode\n")
    (out / "checkpoints" / "final" / "params.bin").write_bytes(b"\x00" * 8)

    manifest = RunManifest(
        config_text="seed = 1\n",
        config_fingerprint="0123456789abcdef",
        seed=1,
        dataset_files=RunManifest.hash_inputs(data.iterdir()),
        started_at="2024-01-01T00:00:00+00:00",
    )
    manifest.collect_artifacts(out)
    manifest.write(out)

    payload = json.loads((out / MANIFEST_FILE).read_text())
    assert list(payload["dataset_files"]) == ["A.csv", "B.csv"]
    assert payload["artifacts"] == sorted(
        ["checkpoints/final/params.bin", "run_log.csv", MANIFEST_FILE]
    )


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("PRL_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("PRL_METRICS_PORT", "9105")
    monkeypatch.setenv("PRL_TRACE_STEPS", "true")
    settings = RuntimeSettings()
    assert settings.log_level == "DEBUG"
    assert settings.metrics_port == 9105
    assert settings.trace_steps is True
    assert settings.log_file is None
