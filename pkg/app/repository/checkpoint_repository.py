"""
Binary checkpoints, all integers and floats little-endian.

    magic        8 bytes  b"NCOODCKP"
    version      u16
    n_dims       u16, then n_dims x u32 layer dims, then u32 class count
    stage        u8
    epoch        u32
    rng          u64 seed, 16-byte state, 16-byte increment, u8 has_uint32, u32 uinteger
    digest       32 bytes SHA-256 of the training config (zeros when absent)
    flags        u8 (bit 0: momentum buffers present, bit 1: OOD stream present)
    parameters   float64 payload, row-major, layer order W1 b1 ... W b
    momentum     float64 payload with the parameter layout (if flagged)
    ood stream   u64 length, u64 cursor, length x u64 permutation (if flagged)
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from app.exceptions import CheckpointFormatError, ConfigurationError, DataError
from app.model.checkpoint_schema import (
    CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
    CheckpointMeta,
    OodStreamState,
    RngState,
)
from app.nn.mlp import MlpClassifier, parameter_shapes

logger = logging.getLogger(__name__)

_DIGEST_BYTES = 32
_FLAG_VELOCITY = 0x01
_FLAG_STREAM = 0x02


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CheckpointFormatError(
                f"truncated payload: needed {size} bytes at offset {self.offset}, file has {len(self.payload)}"
            )
        chunk = self.payload[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


class CheckpointRepository:
    """Repository for model checkpoints."""

    def encode(self, model: MlpClassifier, meta: CheckpointMeta) -> bytes:
        dims = list(model.layer_dims)
        rng = meta.rng_state
        digest = meta.config_digest or bytes(_DIGEST_BYTES)
        if len(digest) != _DIGEST_BYTES:
            raise DataError(f"config digest must be {_DIGEST_BYTES} bytes")
        flags = (_FLAG_VELOCITY if meta.velocity is not None else 0) | (
            _FLAG_STREAM if meta.ood_stream is not None else 0
        )
        parts = [
            CHECKPOINT_MAGIC,
            struct.pack("<HH", CHECKPOINT_VERSION, len(dims)),
            struct.pack(f"<{len(dims)}I", *dims),
            struct.pack("<I", model.num_classes),
            struct.pack("<BI", meta.stage, meta.epoch),
            struct.pack("<Q", rng.seed),
            rng.state.to_bytes(16, "little"),
            rng.inc.to_bytes(16, "little"),
            struct.pack("<BI", rng.has_uint32, rng.uinteger),
            digest,
            struct.pack("<B", flags),
            self._flat(model.parameters()),
        ]
        if meta.velocity is not None:
            parts.append(self._flat(meta.velocity))
        if meta.ood_stream is not None:
            permutation = np.asarray(meta.ood_stream.permutation, dtype="<u8")
            parts.append(struct.pack("<QQ", permutation.size, meta.ood_stream.cursor))
            parts.append(permutation.tobytes())
        return b"".join(parts)

    def decode(self, payload: bytes) -> tuple[MlpClassifier, CheckpointMeta]:
        reader = _Reader(payload)
        if reader.take(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
            raise CheckpointFormatError("bad magic tag: not a checkpoint file")
        version, n_dims = reader.unpack("<HH")
        if version != CHECKPOINT_VERSION:
            raise CheckpointFormatError(f"unsupported checkpoint version {version}")
        dims = list(reader.unpack(f"<{n_dims}I"))
        (num_classes,) = reader.unpack("<I")
        stage, epoch = reader.unpack("<BI")
        (seed,) = reader.unpack("<Q")
        state = int.from_bytes(reader.take(16), "little")
        inc = int.from_bytes(reader.take(16), "little")
        has_uint32, uinteger = reader.unpack("<BI")
        digest = reader.take(_DIGEST_BYTES)
        (flags,) = reader.unpack("<B")

        if len(dims) < 2 or min(dims) < 1 or num_classes < 1:
            raise CheckpointFormatError(f"invalid layer table {dims} with {num_classes} classes")
        shapes = parameter_shapes(dims, num_classes)
        params = self._unflatten(reader, shapes)
        velocity = self._unflatten(reader, shapes) if flags & _FLAG_VELOCITY else None
        ood_stream = None
        if flags & _FLAG_STREAM:
            length, cursor = reader.unpack("<QQ")
            permutation = np.frombuffer(reader.take(8 * length), dtype="<u8").astype(np.int64)
            ood_stream = OodStreamState(permutation=permutation, cursor=cursor)
        if reader.offset != len(payload):
            raise CheckpointFormatError(f"{len(payload) - reader.offset} unexpected trailing bytes")

        try:
            meta = CheckpointMeta(
                stage=stage,
                epoch=epoch,
                rng_state=RngState(seed=seed, state=state, inc=inc, has_uint32=has_uint32, uinteger=uinteger),
                config_digest=b"" if digest == bytes(_DIGEST_BYTES) else digest,
                velocity=velocity,
                ood_stream=ood_stream,
            )
            model = MlpClassifier(dims, num_classes, params)
        except (ValidationError, ConfigurationError) as e:
            raise CheckpointFormatError(f"invalid checkpoint contents: {str(e)}") from e
        return model, meta

    def save(self, model: MlpClassifier, meta: CheckpointMeta, path: str | Path) -> None:
        """
        Write a checkpoint file.

        Raises:
            DataError: if the file cannot be written
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(self.encode(model, meta))
        except OSError as e:
            raise DataError(f"Failed to save checkpoint {path}: {str(e)}") from e
        logger.info(f"Checkpoint saved to {path} (epoch {meta.epoch})")

    def load(self, path: str | Path) -> tuple[MlpClassifier, CheckpointMeta]:
        """
        Read a checkpoint file.

        Raises:
            DataError: if the file is missing or unreadable
            CheckpointFormatError: if the contents are not a valid checkpoint
        """
        path = Path(path)
        try:
            payload = path.read_bytes()
        except OSError as e:
            raise DataError(f"Failed to read checkpoint {path}: {str(e)}") from e
        return self.decode(payload)

    @staticmethod
    def _flat(arrays: list[np.ndarray]) -> bytes:
        return b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in arrays)

    @staticmethod
    def _unflatten(reader: _Reader, shapes: list[tuple[int, ...]]) -> list[np.ndarray]:
        return [reader.floats(int(np.prod(shape))).reshape(shape) for shape in shapes]
