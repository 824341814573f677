from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from app.data.rng import Rng
from app.model.checkpoint_schema import OodStreamState
from app.model.dataset_schema import LabeledDataset, OutlierDataset


@dataclass(frozen=True)
class LabeledBatch:
    features: np.ndarray
    labels: np.ndarray


@dataclass(frozen=True)
class OutlierBatch:
    features: np.ndarray


def batches(
    dataset: LabeledDataset | OutlierDataset,
    batch_size: int,
    rng: Rng,
) -> Iterator[LabeledBatch | OutlierBatch]:
    """One epoch: a seeded permutation cut into batches, the last one possibly short."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    order = rng.permutation(dataset.n)
    for start in range(0, dataset.n, batch_size):
        index = order[start:start + batch_size]
        if isinstance(dataset, LabeledDataset):
            yield LabeledBatch(dataset.features[index], dataset.labels[index])
        else:
            yield OutlierBatch(dataset.features[index])


class OodStream:
    """
    Endless fixed-size OOD batches, independent of the ID epoch boundary.

    A fresh permutation is drawn whenever the current one runs out; a batch
    may straddle two permutations.
    """

    def __init__(self, dataset: OutlierDataset, batch_size: int, rng: Rng):
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        self.dataset = dataset
        self.batch_size = batch_size
        self.rng = rng
        self._permutation = np.zeros(0, dtype=np.int64)
        self._cursor = 0

    def next_batch(self) -> OutlierBatch:
        parts = []
        needed = self.batch_size
        while needed > 0:
            if self._cursor == self._permutation.size:
                self._permutation = self.rng.permutation(self.dataset.n).astype(np.int64)
                self._cursor = 0
            take = min(needed, self._permutation.size - self._cursor)
            parts.append(self._permutation[self._cursor:self._cursor + take])
            self._cursor += take
            needed -= take
        return OutlierBatch(self.dataset.features[np.concatenate(parts)])

    def get_state(self) -> OodStreamState:
        return OodStreamState(permutation=self._permutation.copy(), cursor=self._cursor)

    def set_state(self, state: OodStreamState) -> None:
        self._permutation = np.asarray(state.permutation, dtype=np.int64).copy()
        self._cursor = state.cursor
