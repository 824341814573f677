# This file makes the types directory a Python package

from .generator_types import GaussianIdParams, OutlierMode, OutlierParams, OutlierRole
from .train_types import (
    LossTerm,
    LossVariant,
    LossWeights,
    StagePlan,
    TrainConfig,
    VARIANT_TERMS,
    active_terms,
    uses_ood
)

__all__ = [
    'GaussianIdParams',
    'OutlierMode',
    'OutlierParams',
    'OutlierRole',
    'LossTerm',
    'LossVariant',
    'LossWeights',
    'StagePlan',
    'TrainConfig',
    'VARIANT_TERMS',
    'active_terms',
    'uses_ood'
]
