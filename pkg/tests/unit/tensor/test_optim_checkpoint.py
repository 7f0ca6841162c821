"""
Unit tests for Adam and the array checkpoint format.
"""

import json

import numpy as np
import pytest

from portfolio_rl.errors import CheckpointError, GradientError
from portfolio_rl.tensor import Adam, Parameter, adam_step, load_arrays, save_arrays
from portfolio_rl.tensor.checkpoint import BLOB_NAME, MANIFEST_NAME


def test_first_adam_step_moves_by_learning_rate():
    """p=1, g=1, lr=0.1: bias correction makes the first step exactly lr."""
    p = Parameter(np.array([1.0]))
    p.grad = np.array([1.0])
    adam_step({"p": p}, learning_rate=0.1)
    assert p.data[0] == pytest.approx(0.9, abs=1e-6)


def test_zero_gradient_leaves_parameters_unchanged():
    p = Parameter(np.array([0.5, -2.0]))
    p.grad = np.zeros(2)
    Adam({"p": p}, learning_rate=0.1).step()
    assert np.array_equal(p.data, [0.5, -2.0])


def test_repeated_steps_keep_descending():
    p = Parameter(np.array([1.0]))
    opt = Adam({"p": p}, learning_rate=0.1)
    seen = [p.data[0]]
    for _ in range(2):
        p.grad = np.array([1.0])
        opt.step()
        seen.append(p.data[0])
    assert seen[0] > seen[1] > seen[2]
    assert opt.t == 2


def test_step_without_gradient_fails():
    p = Parameter(np.ones(2))
    with pytest.raises(GradientError):
        Adam({"p": p}).step()


def test_invalid_learning_rate():
    with pytest.raises(ValueError):
        Adam({"p": Parameter(1.0)}, learning_rate=0.0)


def test_optimizer_state_round_trip():
    p = Parameter(np.array([1.0, 2.0]))
    opt = Adam({"p": p}, learning_rate=0.01)
    p.grad = np.array([0.3, -0.7])
    opt.step()

    restored = Adam({"p": Parameter(p.data.copy())}, learning_rate=0.01)
    restored.load_state_dict(opt.state_dict())
    assert restored.t == 1
    assert np.array_equal(restored.m["p"], opt.m["p"])
    assert np.array_equal(restored.v["p"], opt.v["p"])


def test_optimizer_state_missing_entry():
    opt = Adam({"p": Parameter(np.ones(2))})
    with pytest.raises(CheckpointError):
        opt.load_state_dict({"t": np.array([3.0])})


def test_checkpoint_round_trip_is_bitwise(tmp_path, rng):
    arrays = {
        "actor/w": rng.normal(size=(3, 4)),
        "actor/b": rng.normal(size=4),
        "scalar": np.array(0.1 + 0.2),
    }
    save_arrays(tmp_path, arrays)
    loaded = load_arrays(tmp_path)
    assert list(loaded) == list(arrays)
    for name, arr in arrays.items():
        assert loaded[name].shape == arr.shape
        assert np.array_equal(loaded[name], arr)


def test_manifest_records_offsets(tmp_path):
    save_arrays(tmp_path, {"a": np.zeros((2, 3)), "b": np.ones(4)})
    manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())
    assert [(e["name"], e["shape"], e["offset"]) for e in manifest["entries"]] == [
        ("a", [2, 3], 0),
        ("b", [4], 6),
    ]
    assert (tmp_path / BLOB_NAME).stat().st_size == 10 * 8


def test_truncated_blob(tmp_path):
    save_arrays(tmp_path, {"a": np.zeros(3), "b": np.ones(5)})
    blob = tmp_path / BLOB_NAME
    blob.write_bytes(blob.read_bytes()[:-8])
    with pytest.raises(CheckpointError, match="'b'"):
        load_arrays(tmp_path)


def test_missing_checkpoint_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_arrays(tmp_path / "nowhere")
