"""Versioned binary checkpoints.

Byte layout (all integers little-endian):

    bytes 0..7    magic b"RLSERCKP"
    bytes 8..11   uint32 header length H
    bytes 12..12+H  UTF-8 JSON header
    remainder     concatenated little-endian float32 tensor payloads

The JSON header carries: format_version, architecture (constructor
descriptor), architecture_hash (sha256 of the canonical descriptor JSON),
metadata (training stage, step counts, model version), a tensor directory of
{name, shape, offset, nbytes} entries with offsets relative to the payload
start, and the optimizer hyperparameters when optimizer state is included.
The layout is language-neutral so other implementations can interoperate.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from pathlib import Path

import numpy as np

from rlser.nn.adam import Adam
from rlser.nn.network import QNetwork

MAGIC = b"RLSERCKP"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def architecture_hash(architecture: dict) -> str:
    canonical = json.dumps(architecture, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def save_checkpoint(
    path: str | Path,
    net: QNetwork,
    optimizer: Adam | None = None,
    metadata: dict | None = None,
) -> None:
    """Write atomically (tmp file + rename); round-trips bit-exactly."""
    tensors = dict(net.state_tensors())
    optimizer_info = None
    if optimizer is not None:
        tensors.update(optimizer.state_tensors())
        optimizer_info = {
            "type": "adam",
            "learning_rate": optimizer.learning_rate,
            "beta1": optimizer.beta1,
            "beta2": optimizer.beta2,
            "epsilon": optimizer.epsilon,
            "step_count": optimizer.step_count,
        }

    directory = []
    payload = bytearray()
    for name, arr in tensors.items():
        data = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        directory.append(
            {"name": name, "shape": list(arr.shape), "offset": len(payload), "nbytes": len(data)}
        )
        payload.extend(data)

    header = {
        "format_version": FORMAT_VERSION,
        "architecture": net.architecture,
        "architecture_hash": architecture_hash(net.architecture),
        "metadata": metadata or {},
        "optimizer": optimizer_info,
        "tensors": directory,
    }
    header_bytes = json.dumps(header).encode()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(bytes(payload))
    os.replace(tmp, path)


def read_header(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise CheckpointError(f"not a checkpoint file (bad magic {magic!r})")
        raw_len = fh.read(4)
        if len(raw_len) < 4:
            raise CheckpointError("truncated checkpoint: missing header length")
        (header_len,) = struct.unpack("<I", raw_len)
        header_bytes = fh.read(header_len)
        if len(header_bytes) < header_len:
            raise CheckpointError("truncated checkpoint: incomplete header")
        try:
            header = json.loads(header_bytes)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"corrupt checkpoint header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format version {header.get('format_version')} (expected {FORMAT_VERSION})"
        )
    return header


def load_checkpoint(
    path: str | Path,
    with_optimizer: bool = False,
) -> tuple[QNetwork, Adam | None, dict]:
    """Rebuild (net, optimizer, metadata) from a checkpoint file.

    The whole payload is parsed and validated before any state is
    constructed, so a corrupt file never yields a half-loaded network.
    """
    header = read_header(path)
    if header.get("architecture_hash") != architecture_hash(header["architecture"]):
        raise CheckpointError("architecture hash mismatch: header was tampered with or corrupted")

    with open(path, "rb") as fh:
        fh.seek(8)
        (header_len,) = struct.unpack("<I", fh.read(4))
        payload_start = 12 + header_len
        fh.seek(0, os.SEEK_END)
        file_size = fh.tell()
        fh.seek(payload_start)
        tensors: dict[str, np.ndarray] = {}
        for entry in header["tensors"]:
            end = payload_start + entry["offset"] + entry["nbytes"]
            if end > file_size:
                raise CheckpointError(f"truncated checkpoint: tensor {entry['name']!r} extends past EOF")
            fh.seek(payload_start + entry["offset"])
            data = fh.read(entry["nbytes"])
            if len(data) < entry["nbytes"]:
                raise CheckpointError(f"truncated checkpoint: tensor {entry['name']!r} short read")
            arr = np.frombuffer(data, dtype="<f4").reshape(entry["shape"]).copy()
            tensors[entry["name"]] = arr

    arch = header["architecture"]
    net = QNetwork(
        seed=0,
        conv_filters=tuple(arch["conv_filters"]),
        lstm_units=arch["lstm_units"],
        dense_units=arch["dense_units"],
        dropout=arch["dropout"],
        n_outputs=arch["n_outputs"],
        input_shape=tuple(arch["input_shape"]),
    )
    net_tensors = {k: v for k, v in tensors.items() if not k.startswith("adam.")}
    net.load_state_tensors(net_tensors)

    optimizer = None
    if with_optimizer:
        if header.get("optimizer") is None:
            raise CheckpointError("checkpoint carries no optimizer state")
        info = header["optimizer"]
        optimizer = Adam(
            net.params(),
            learning_rate=info["learning_rate"],
            beta1=info["beta1"],
            beta2=info["beta2"],
            epsilon=info["epsilon"],
        )
        optimizer.load_state_tensors(tensors, step_count=info["step_count"])
    return net, optimizer, header.get("metadata", {})
