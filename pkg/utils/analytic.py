# utils/analytic.py
"""
Closed-form and Monte Carlo squared gaps for the curved-mean flight model

Flights have unit duration and independent displacements whose means turn
through 2*theta0 over the n steps (theta0 = 0 is a straight line, pi/2 a
semicircle). The hot-deck surrogate resamples n displacements from the same
distribution and is bridged onto L(n); linear interpolation is (t/n) L(n).
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.exceptions import MobilityError
from utils.imputer import confidence_interval, impute_trace
from utils.kernels import KernelFamily, KernelSpec
from utils.projection import PlanarPoint
from utils.segmentation import Event, EventKind, MissingInterval, MobilityTrace

logger = logging.getLogger(__name__)

STEP_SECONDS = 60.0
GAPS_PER_TRACE = 5


@dataclass(frozen=True)
class AnalyticModel:
    n: int
    theta0: float
    d: float = 1.0
    sigma_x2: float = 1.0
    sigma_y2: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise MobilityError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.theta0 <= math.pi / 2 + 1e-12:
            raise MobilityError(f"theta0 must lie in [0, pi/2], got {self.theta0}")
        if self.d < 0 or self.sigma_x2 < 0 or self.sigma_y2 < 0:
            raise MobilityError("d and variances must be non-negative")

    @property
    def sigma2(self) -> float:
        return self.sigma_x2 + self.sigma_y2


def _angles(model: AnalyticModel, t: np.ndarray) -> np.ndarray:
    if model.n == 1:
        return np.full(np.shape(t), model.theta0, dtype=float)
    return model.theta0 - 2.0 * model.theta0 * np.asarray(t, dtype=float) / (model.n - 1)


def mean_displacement(model: AnalyticModel, t: int) -> Tuple[float, float]:
    """Mean displacement of the flight at step t in 0..n-1."""
    if not 0 <= t <= model.n - 1:
        raise MobilityError(f"step {t} outside 0..{model.n - 1}")
    angle = float(_angles(model, np.array(t)))
    root = math.sqrt(model.d)
    return root * math.cos(angle), root * math.sin(angle)


def mean_path(model: AnalyticModel) -> np.ndarray:
    """(n, 2) mean displacements for steps 0..n-1; flight i (1-based) uses row i-1."""
    angles = _angles(model, np.arange(model.n))
    return math.sqrt(model.d) * np.column_stack([np.cos(angles), np.sin(angles)])


def simulate_analytic_trace(model: AnalyticModel, rng: np.random.Generator) -> np.ndarray:
    """n displacement pairs: mean plus independent Gaussian noise."""
    noise = rng.standard_normal((model.n, 2)) * np.sqrt([model.sigma_x2, model.sigma_y2])
    return mean_path(model) + noise


def expected_gap_hotdeck(model: AnalyticModel) -> float:
    return (model.n - 1) / 3.0 * model.sigma2


def m_terms(model: AnalyticModel) -> np.ndarray:
    """M(t) for t = 0..n via prefix sums of the centred means."""
    mu = mean_path(model)
    dev = mu - mu.mean(axis=0)
    dev[:, np.ptp(mu, axis=0) == 0] = 0.0
    partial = np.vstack([np.zeros(2), np.cumsum(dev, axis=0)])
    return (partial ** 2).sum(axis=1)


def m_term(model: AnalyticModel, t: int) -> float:
    """M(t) by the direct double/quadruple sums; slow, used to check m_terms."""
    n = model.n
    if not 0 <= t <= n:
        raise MobilityError(f"t {t} outside 0..{n}")
    mu = mean_path(model)
    total = 0.0
    for l in range(2):
        m = mu[:, l]
        sum_all = sum(m[i] for i in range(n))
        term = sum(m[i] ** 2 for i in range(t))
        term += (t * t) / (n * n) * sum(m[i] * m[j] for i in range(n) for j in range(n))
        term -= 2.0 / n * sum(m[i] * m[j] for i in range(t) for j in range(n))
        cross = 0.0
        for i in range(t):
            for j in range(i + 1, t):
                cross += m[i] * m[j] - sum_all / n * (m[i] + m[j])
        total += term + 2.0 * cross
    return total


def expected_gap_li(model: AnalyticModel) -> float:
    return (model.n - 1) / 6.0 * model.sigma2 + float(m_terms(model).mean())


def _paths(steps: np.ndarray) -> np.ndarray:
    """Cumulative positions with L(0) = 0, shape (..., n + 1, 2)."""
    zeros = np.zeros(steps.shape[:-2] + (1, 2))
    return np.concatenate([zeros, np.cumsum(steps, axis=-2)], axis=-2)


def _surrogates(truth: np.ndarray, resampled: np.ndarray, n: int) -> Dict[str, np.ndarray]:
    frac = (np.arange(n + 1) / n)[:, None]
    end = truth[..., -1:, :]
    sim = _paths(resampled)
    return {
        'hotdeck': frac * (end - sim[..., -1:, :]) + sim,
        'li': frac * end,
    }


def monte_carlo_gap(model: AnalyticModel, method: str, reps: int, rng: np.random.Generator) -> float:
    """Average over reps of the mean squared distance between truth and surrogate.

    method is 'hotdeck' (oracle resampling from the true distribution) or 'li'.
    """
    if method not in ('hotdeck', 'li'):
        raise MobilityError(f"unknown method '{method}'")
    if reps < 1:
        raise MobilityError("reps must be >= 1")
    scale = np.sqrt([model.sigma_x2, model.sigma_y2])
    mu = mean_path(model)
    truth = _paths(mu + rng.standard_normal((reps, model.n, 2)) * scale)
    resampled = mu + rng.standard_normal((reps, model.n, 2)) * scale
    surrogate = _surrogates(truth, resampled, model.n)[method]
    return float(((truth - surrogate) ** 2).sum(axis=-1).mean())


def sample_paths(model: AnalyticModel, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    """One truth path with its hot-deck and linear surrogates, each (n + 1, 2)."""
    truth = _paths(simulate_analytic_trace(model, rng))
    surrogates = _surrogates(truth, simulate_analytic_trace(model, rng), model.n)
    return {'truth': truth, 'hotdeck': surrogates['hotdeck'], 'li': surrogates['li']}


def gap_curve(n_values: Sequence[int], theta0_values: Sequence[float], reps: int, seed: int,
              d: float = 1.0, sigma_x2: float = 1.0, sigma_y2: float = 1.0) -> pd.DataFrame:
    """Closed forms next to Monte Carlo estimates; columns n, theta0, method, value."""
    rows = []
    for theta0 in theta0_values:
        for n in n_values:
            model = AnalyticModel(n=int(n), theta0=float(theta0), d=d, sigma_x2=sigma_x2, sigma_y2=sigma_y2)
            rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(n), int(round(theta0 * 1e6))]))
            rows.append((n, theta0, 'hotdeck_closed', expected_gap_hotdeck(model)))
            rows.append((n, theta0, 'li_closed', expected_gap_li(model)))
            rows.append((n, theta0, 'hotdeck_mc', monte_carlo_gap(model, 'hotdeck', reps, rng)))
            rows.append((n, theta0, 'li_mc', monte_carlo_gap(model, 'li', reps, rng)))
    return pd.DataFrame(rows, columns=['n', 'theta0', 'method', 'value'])


def _missing_steps(n: int, fraction: float, gaps: int = GAPS_PER_TRACE) -> list:
    """Evenly spaced runs of steps removed from n steps, as (first step, step count)."""
    runs = []
    if fraction <= 0:
        return runs
    block = n / gaps
    for b in range(gaps):
        m = int(round(fraction * block))
        if m < 2:
            continue
        first = int(round(b * block + (block - m) / 2.0))
        runs.append((first, m))
    return runs


def _semicircle_trace(points: np.ndarray, runs) -> MobilityTrace:
    """Flights between consecutive points, with the given step runs turned into gaps."""
    missing = set()
    gaps = []
    for first, m in runs:
        missing.update(range(first, first + m))
        a, b = points[first], points[first + m]
        gaps.append(MissingInterval(
            t_start=first * STEP_SECONDS, t_end=(first + m) * STEP_SECONDS,
            anchor_start=PlanarPoint(float(a[0]), float(a[1]), first * STEP_SECONDS),
            anchor_end=PlanarPoint(float(b[0]), float(b[1]), (first + m) * STEP_SECONDS),
        ))
    events = []
    for i in range(len(points) - 1):
        if i in missing:
            continue
        dx, dy = points[i + 1] - points[i]
        events.append(Event(EventKind.FLIGHT, float(points[i][0]), float(points[i][1]), i * STEP_SECONDS,
                            float(dx), float(dy), STEP_SECONDS))
    n = len(points) - 1
    return MobilityTrace(events=events, gaps=gaps, subject_id='semicircle',
                         t_first=0.0, t_last=n * STEP_SECONDS)


def _distance(trace: MobilityTrace) -> float:
    return float(sum(e.length for e in trace.events if e.is_flight))


def jittered_semicircle(model: AnalyticModel, jitter_scale: float, missing_fractions: Sequence[float],
                        replicates: int = 100, seed: int = 0, alpha: float = 0.05,
                        spec: Optional[KernelSpec] = None) -> pd.DataFrame:
    """Distance-travelled estimates on a jittered curved path under growing missingness.

    Returns one row per missing fraction with the truth, the linear
    interpolation estimate and the TL mean and (lo, hi) band.
    """
    spec = spec or KernelSpec.from_family(KernelFamily.TL)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(round(jitter_scale * 1e6))]))
    steps = mean_path(model) + jitter_scale * math.sqrt(model.d) * rng.standard_normal((model.n, 2))
    points = _paths(steps)
    truth = _distance(_semicircle_trace(points, []))

    rows = []
    for fraction in missing_fractions:
        trace = _semicircle_trace(points, _missing_steps(model.n, fraction))
        li = _distance(impute_trace(trace, KernelSpec(family=KernelFamily.LI), 1, seed)[0])
        # unit steps, not segmented GPS: keep every resampled step
        dists = [_distance(tr) for tr in impute_trace(trace, spec, replicates, seed, join_radius_m=0.0)]
        lo, hi = confidence_interval(dists, alpha) if len(dists) >= 2 else (dists[0], dists[0])
        rows.append({
            'jitter_scale': jitter_scale,
            'missing_fraction': fraction,
            'truth': truth,
            'li': li,
            'tl_mean': float(np.mean(dists)),
            'tl_lo': lo,
            'tl_hi': hi,
        })
    return pd.DataFrame(rows)
