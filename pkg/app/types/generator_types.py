from __future__ import annotations

from enum import Enum
from typing import ClassVar

from pydantic import BaseModel, ConfigDict, Field, model_validator


class OutlierMode(str, Enum):
    SHIFTED_GAUSSIAN = "shifted-gaussian"
    UNIFORM_SHELL = "uniform-shell"
    MIXTURE = "mixture"
    NEAR_ID = "near-id"


class OutlierRole(str, Enum):
    AUXILIARY = "auxiliary"
    TEST = "test"


class GaussianIdParams(BaseModel):
    classes: int = Field(default=4, ge=2)
    dim: int = Field(default=16, ge=1)
    n_per_class: int = Field(default=200, ge=1)
    mean_scale: float = Field(default=4.0, gt=0)
    sigma: float = Field(default=0.5, ge=0)

    model_config: ClassVar[ConfigDict] = {"frozen": True}


class OutlierParams(BaseModel):
    """
    Shape of the outlier generators; unused fields are ignored by a mode.

    shifted-gaussian: one blob at distance ``shift`` with spread ``sigma``.
    uniform-shell: uniform directions, radii in [inner_radius, outer_radius].
    mixture: ``components`` blobs with spread ``sigma`` whose centers sit at
    radii in [component_min_radius, component_max_radius].
    near-id: blobs with spread ``near_sigma`` centered halfway (in angle)
    between pairs of ID class means, on the sphere of the means.
    """

    shift: float = Field(default=12.0, gt=0)
    sigma: float = Field(default=1.0, ge=0)
    inner_radius: float = Field(default=10.0, gt=0)
    outer_radius: float = Field(default=14.0, gt=0)
    components: int = Field(default=64, ge=1)
    component_min_radius: float = Field(default=8.0, gt=0)
    component_max_radius: float = Field(default=18.0, gt=0)
    near_sigma: float = Field(default=0.5, ge=0)

    model_config: ClassVar[ConfigDict] = {"frozen": True}

    @model_validator(mode="after")
    def _ranges_ordered(self) -> OutlierParams:
        if self.outer_radius < self.inner_radius:
            raise ValueError("outer_radius must be at least inner_radius")
        if self.component_max_radius < self.component_min_radius:
            raise ValueError("component_max_radius must be at least component_min_radius")
        return self
