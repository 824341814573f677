from __future__ import annotations

from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

CHECKPOINT_MAGIC = b"NCOODCKP"
CHECKPOINT_VERSION = 1


class RngState(BaseModel):
    """Serializable PCG64 state."""

    seed: int = Field(ge=0)
    state: int = Field(ge=0)
    inc: int = Field(ge=0)
    has_uint32: int = Field(ge=0, le=1)
    uinteger: int = Field(ge=0)

    model_config: ClassVar[ConfigDict] = {"frozen": True}


class OodStreamState(BaseModel):
    permutation: np.ndarray
    cursor: int = Field(ge=0)

    model_config: ClassVar[ConfigDict] = {"arbitrary_types_allowed": True}


class CheckpointMeta(BaseModel):
    """Everything in a checkpoint besides the model parameters."""

    stage: int = Field(default=1, ge=1, le=2)
    epoch: int = Field(default=0, ge=0)
    rng_state: RngState
    config_digest: bytes = b""
    velocity: list[np.ndarray] | None = None
    ood_stream: OodStreamState | None = None

    model_config: ClassVar[ConfigDict] = {"arbitrary_types_allowed": True}
