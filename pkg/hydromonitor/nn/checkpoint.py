"""
Checkpoint file format.

    magic "HPDM" | version u16 | metadata length u32 | metadata | payload

The metadata block is UTF-8 text, one sorted key=value per line. The payload
holds little-endian float32 parameters of every network, in the order listed
by the `networks` key and, within a network, W0, b0, W1, b1, ...
"""

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

from hydromonitor.errors import CheckpointError
from hydromonitor.nn.network import Activation, Layer, LayerSpec, NetworkParams
from hydromonitor.utils.io import atomic_write_bytes

MAGIC = b"HPDM"
VERSION = 1
_HEADER = struct.Struct("<4sHI")

# keys written by the format itself; callers cannot override them
RESERVED_KEYS = ("networks", "param_count")


@dataclass
class Checkpoint:
    networks: Dict[str, NetworkParams]
    metadata: Dict[str, str]


def _layout(net: NetworkParams) -> str:
    return ";".join(
        f"{layer.spec.in_width}x{layer.spec.out_width}:{layer.spec.activation.value}" for layer in net.layers
    )


def _parse_layout(text: str) -> list:
    specs = []
    for item in text.split(";"):
        shape, activation = item.split(":")
        in_w, out_w = shape.split("x")
        specs.append(LayerSpec(in_width=int(in_w), out_width=int(out_w), activation=Activation(activation)))
    return specs


def encode_checkpoint(networks: Mapping[str, NetworkParams], metadata: Mapping[str, str]) -> bytes:
    for key, value in metadata.items():
        if key in RESERVED_KEYS or key.startswith("net."):
            raise CheckpointError(f"metadata key {key!r} is reserved")
        if "\n" in f"{key}{value}" or "=" in key:
            raise CheckpointError(f"metadata entry {key!r} cannot contain newlines or '=' in the key")

    meta = {k: str(v) for k, v in metadata.items()}
    meta["networks"] = ",".join(networks)
    chunks = []
    for name, net in networks.items():
        if not net.is_finite():
            raise CheckpointError(f"network {name!r} holds non-finite parameters")
        meta[f"net.{name}.layers"] = _layout(net)
        chunks.extend(a.ravel() for a in net.arrays())
    payload = np.concatenate(chunks).astype("<f4") if chunks else np.zeros(0, dtype="<f4")
    meta["param_count"] = str(payload.size)

    meta_bytes = "".join(f"{k}={meta[k]}\n" for k in sorted(meta)).encode("utf-8")
    return _HEADER.pack(MAGIC, VERSION, len(meta_bytes)) + meta_bytes + payload.tobytes()


def save_checkpoint(path: Union[str, Path], networks: Mapping[str, NetworkParams],
                    metadata: Mapping[str, str]) -> None:
    atomic_write_bytes(path, encode_checkpoint(networks, metadata))


def _parse_metadata(blob: bytes) -> Dict[str, str]:
    meta = {}
    for line in blob.decode("utf-8").splitlines():
        key, sep, value = line.partition("=")
        if not sep:
            raise CheckpointError(f"malformed metadata line {line!r}")
        meta[key] = value
    return meta


def _split_header(raw: bytes) -> Tuple[Dict[str, str], bytes]:
    if len(raw) < _HEADER.size:
        raise CheckpointError("file too short for a checkpoint header")
    magic, version, meta_len = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    end = _HEADER.size + meta_len
    if len(raw) < end:
        raise CheckpointError("metadata block is truncated")
    return _parse_metadata(raw[_HEADER.size:end]), raw[end:]


def read_header(path: Union[str, Path]) -> Dict[str, str]:
    """Metadata of a checkpoint, without materializing its networks."""
    with open(path, "rb") as handle:
        head = handle.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise CheckpointError("file too short for a checkpoint header")
        _, _, meta_len = _HEADER.unpack(head)
        meta, _ = _split_header(head + handle.read(meta_len))
    return meta


def check_expected(metadata: Mapping[str, str], expect: Optional[Mapping[str, object]]) -> None:
    for key, value in (expect or {}).items():
        found = metadata.get(key)
        if found != str(value):
            raise CheckpointError(f"checkpoint {key}={found!r} does not match expected {value!r}")


def decode_checkpoint(raw: bytes, expect: Optional[Mapping[str, object]] = None) -> Checkpoint:
    meta, payload = _split_header(raw)
    try:
        declared = int(meta["param_count"])
        names = [n for n in meta["networks"].split(",") if n]
    except (KeyError, ValueError) as e:
        raise CheckpointError(f"metadata is missing required keys: {e}")
    if len(payload) != 4 * declared:
        raise CheckpointError(f"payload holds {len(payload) // 4} floats, header declares {declared}")
    check_expected(meta, expect)

    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    offset = 0
    networks = {}
    for name in names:
        try:
            specs = _parse_layout(meta[f"net.{name}.layers"])
        except (KeyError, ValueError) as e:
            raise CheckpointError(f"layout of network {name!r} is unreadable: {e}")
        layers = []
        for spec in specs:
            n_w = spec.out_width * spec.in_width
            w = values[offset:offset + n_w].reshape(spec.out_width, spec.in_width)
            offset += n_w
            b = values[offset:offset + spec.out_width].copy()
            offset += spec.out_width
            layers.append(Layer(weights=w.copy(), biases=b, spec=spec))
        networks[name] = NetworkParams(layers=tuple(layers))
    if offset != declared:
        raise CheckpointError(f"layouts account for {offset} floats, header declares {declared}")

    user_meta = {k: v for k, v in meta.items() if k not in RESERVED_KEYS and not k.startswith("net.")}
    return Checkpoint(networks=networks, metadata=user_meta)


def load_checkpoint(path: Union[str, Path], expect: Optional[Mapping[str, object]] = None) -> Checkpoint:
    """
    Read a checkpoint, optionally insisting on metadata values.

    Raises:
        CheckpointError: corrupt header, payload/count mismatch or an
            expectation (e.g. obs_width) that does not hold
    """
    with open(path, "rb") as handle:
        return decode_checkpoint(handle.read(), expect)
