# utils/kernels.py
"""
Student-t kernels weighting observed donor events by closeness in time, space,
or space plus time of day
"""

from enum import Enum
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import gammaln

from config.settings import DAY_SECONDS, KERNEL_SCALES
from utils.exceptions import ConfigurationError
from utils.projection import PlanarPoint


class KernelFamily(str, Enum):
    TL = 'TL'     # temporally local
    GL = 'GL'     # geographically local
    GLC = 'GLC'   # geographically local with circadian routine
    LI = 'LI'     # linear interpolation, no resampling


class KernelSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    family: KernelFamily
    nu: float = Field(1.0, gt=0)
    c: Optional[float] = Field(None, gt=0)
    c1: Optional[float] = Field(None, gt=0)
    c2: Optional[float] = Field(None, gt=0)
    day_length_s: float = Field(DAY_SECONDS, gt=0)
    scale_multiplier: float = Field(1.0, gt=0)

    @model_validator(mode='after')
    def _check_scales(self):
        if self.family in (KernelFamily.TL, KernelFamily.GL) and self.c is None:
            raise ValueError(f"{self.family.value} kernel needs c")
        if self.family == KernelFamily.GLC and (self.c1 is None or self.c2 is None):
            raise ValueError("GLC kernel needs both c1 and c2")
        return self

    @classmethod
    def from_family(cls, family: Union[str, KernelFamily], nu: float = 1.0,
                    scale_multiplier: float = 1.0) -> 'KernelSpec':
        """Default scales for a family, multiplied by scale_multiplier."""
        family = KernelFamily(family)
        scales = {k: v * scale_multiplier for k, v in KERNEL_SCALES.get(family.value, {}).items()}
        return cls(family=family, nu=nu, scale_multiplier=scale_multiplier, **scales)

    @property
    def is_stochastic(self) -> bool:
        return self.family != KernelFamily.LI

    @property
    def label(self) -> str:
        if self.family == KernelFamily.LI:
            return 'LI'
        return f"{self.family.value}.{self.scale_multiplier:g}"


def t_density(u, nu: float):
    """Student-t density with nu degrees of freedom; accepts scalars or arrays."""
    if not nu > 0:
        raise ConfigurationError(f"degrees of freedom must be positive, got {nu}")
    u = np.asarray(u, dtype=float)
    log_norm = gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * np.log(nu * np.pi)
    dens = np.exp(log_norm - (nu + 1.0) / 2.0 * np.log1p(u * u / nu))
    return float(dens) if dens.ndim == 0 else dens


def circadian_lag(dt, day_length_s: float = DAY_SECONDS):
    """Time-of-day distance, always in [0, day_length_s / 2]."""
    m = np.mod(np.abs(np.asarray(dt, dtype=float)), day_length_s)
    return np.minimum(m, day_length_s - m)


def weights(spec: KernelSpec, z_new: PlanarPoint, xs: np.ndarray, ys: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Unnormalised weights of donors starting at (xs, ys, ts) relative to z_new."""
    xs = np.asarray(xs, dtype=float)
    if spec.family == KernelFamily.LI:
        return np.ones_like(xs)
    if spec.family == KernelFamily.TL:
        return np.atleast_1d(t_density(spec.c * (z_new.t - np.asarray(ts, dtype=float)), spec.nu))
    dist = np.hypot(z_new.x - xs, z_new.y - np.asarray(ys, dtype=float))
    if spec.family == KernelFamily.GL:
        return np.atleast_1d(t_density(spec.c * dist, spec.nu))
    lag = circadian_lag(z_new.t - np.asarray(ts, dtype=float), spec.day_length_s)
    return np.atleast_1d(t_density(spec.c1 * dist, spec.nu) * t_density(spec.c2 * lag, spec.nu))


def weight(spec: KernelSpec, z_new: PlanarPoint, z_j: PlanarPoint) -> float:
    return float(weights(spec, z_new, np.array([z_j.x]), np.array([z_j.y]), np.array([z_j.t]))[0])
