# Synthetic datasets, seeded streams and batch iteration

from .batching import LabeledBatch, OodStream, OutlierBatch, batches
from .generators import gen_gaussian_id, gen_outliers
from .rng import Rng

__all__ = [
    'LabeledBatch',
    'OodStream',
    'OutlierBatch',
    'batches',
    'gen_gaussian_id',
    'gen_outliers',
    'Rng'
]
