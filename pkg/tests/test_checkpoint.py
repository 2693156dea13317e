import numpy as np
import pytest

from hydromonitor.errors import CheckpointError
from hydromonitor.nn.checkpoint import (
    MAGIC,
    encode_checkpoint,
    load_checkpoint,
    read_header,
    save_checkpoint,
)
from hydromonitor.nn.network import Activation, mlp


@pytest.fixture
def networks(rng):
    return {
        "actor": mlp(6, (8,), 4, rng),
        "critic1": mlp(8, (8, 8), 5, rng, hidden_activation=Activation.TANH),
    }


@pytest.fixture
def saved(tmp_path, networks):
    path = tmp_path / "agent.ckpt"
    save_checkpoint(path, networks, {"obs_width": "6", "domain": "air"})
    return path


class TestRoundTrip:
    def test_save_load_save_is_byte_identical(self, tmp_path, saved):
        loaded = load_checkpoint(saved)
        again = tmp_path / "again.ckpt"
        save_checkpoint(again, loaded.networks, loaded.metadata)
        assert again.read_bytes() == saved.read_bytes()

    def test_parameters_survive_at_single_precision(self, saved, networks):
        loaded = load_checkpoint(saved)
        assert list(loaded.networks) == ["actor", "critic1"]
        for name, net in networks.items():
            assert loaded.networks[name].widths() == net.widths()
            for a, b in zip(loaded.networks[name].arrays(), net.arrays()):
                assert a.dtype == np.float64
                np.testing.assert_allclose(a, b, rtol=1e-6, atol=1e-7)
        assert loaded.networks["critic1"].layers[0].spec.activation == Activation.TANH

    def test_metadata_survives(self, saved):
        assert load_checkpoint(saved).metadata == {"domain": "air", "obs_width": "6"}

    def test_read_header(self, saved):
        header = read_header(saved)
        assert header["obs_width"] == "6"
        assert header["networks"] == "actor,critic1"

    def test_no_temporary_files_left(self, tmp_path, saved):
        assert sorted(p.name for p in tmp_path.iterdir()) == ["agent.ckpt"]


class TestCorruption:
    def test_bad_magic(self, tmp_path, saved):
        raw = bytearray(saved.read_bytes())
        raw[:4] = b"XXXX"
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(bytes(raw))
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(bad)

    def test_truncated_payload(self, tmp_path, saved):
        bad = tmp_path / "short.ckpt"
        bad.write_bytes(saved.read_bytes()[:-4])
        with pytest.raises(CheckpointError):
            load_checkpoint(bad)

    def test_truncated_header(self, tmp_path):
        bad = tmp_path / "tiny.ckpt"
        bad.write_bytes(MAGIC)
        with pytest.raises(CheckpointError):
            load_checkpoint(bad)

    def test_expectation_mismatch(self, saved):
        load_checkpoint(saved, expect={"obs_width": 6})
        with pytest.raises(CheckpointError, match="obs_width"):
            load_checkpoint(saved, expect={"obs_width": 49})


class TestEncode:
    def test_reserved_key_rejected(self, networks):
        with pytest.raises(CheckpointError):
            encode_checkpoint(networks, {"param_count": "1"})

    def test_newline_in_value_rejected(self, networks):
        with pytest.raises(CheckpointError):
            encode_checkpoint(networks, {"note": "two\nlines"})

    def test_non_finite_parameters_rejected(self, rng):
        net = mlp(2, (3,), 1, rng)
        arrays = net.arrays()
        arrays[0] = arrays[0].copy()
        arrays[0][0, 0] = np.nan
        with pytest.raises(CheckpointError):
            encode_checkpoint({"actor": net.with_arrays(arrays)}, {})
