"""Brute-force ground truth for validating bootstrap error estimates.

These routines see the original matrices, which the bootstrap never does:
they evaluate the actual sketching error, estimate its quantile curve by
plain Monte Carlo over many sketch realizations, and measure how often an
extrapolated bootstrap bound actually covers the realized error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .booterr import BootstrapConfig, bootstrap_quantile, empirical_quantile, extrapolate
from .matcore import DenseMatrix, linf_norm, matmul_t
from .parallel import run_indexed
from .rng import derive_seed
from .sketch import SketchKind, SketchPair, SketchSpec, apply_spec

__all__ = ["QuantileCurve", "true_error", "mc_quantile_curve", "coverage_probe"]


@dataclass(frozen=True)
class QuantileCurve:
    """Ordered (t, value) quantile points with optional percentile bands."""

    alpha: float
    points: tuple[tuple[int, float], ...]
    band_low: tuple[float, ...] | None
    band_high: tuple[float, ...] | None
    reps: int

    def __post_init__(self):
        ts = [t for t, _ in self.points]
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise ValueError("t values must be strictly increasing")
        if any(v < 0 for _, v in self.points):
            raise ValueError("quantile values must be nonnegative")
        bands = (self.band_low, self.band_high)
        if (bands[0] is None) != (bands[1] is None):
            raise ValueError("band_low and band_high must be given together")
        if bands[0] is not None:
            if len(bands[0]) != len(self.points) or len(bands[1]) != len(self.points):
                raise ValueError("bands must parallel the points")
            if any(lo > hi for lo, hi in zip(*bands)):
                raise ValueError("band_low must not exceed band_high")

    @property
    def ts(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.points)


def true_error(a: DenseMatrix, b: DenseMatrix, pair: SketchPair) -> float:
    """Actual error of the sketched product: max-abs deviation from the exact one."""
    if pair.source_rows != a.rows or pair.source_rows != b.rows:
        raise ValueError(
            f"pair was sketched from {pair.source_rows} rows, inputs have {a.rows}/{b.rows}"
        )
    if pair.a_sketch.cols != a.cols or pair.b_sketch.cols != b.cols:
        raise ValueError("pair column counts do not match the input matrices")
    return linf_norm(DenseMatrix._wrap(pair.sketched_product - matmul_t(a, b).array))


def mc_quantile_curve(
    a: DenseMatrix,
    b: DenseMatrix,
    kind: SketchKind,
    t_grid,
    reps: int,
    alpha: float,
    seed: int,
    band_percentiles: tuple[float, float] = (0.1, 0.9),
) -> QuantileCurve:
    """Monte-Carlo estimate of the (1 - alpha) error quantile over a t grid.

    For each t, draws ``reps`` independent sketch pairs (realization r of
    grid entry i is seeded from (seed, i, r)) and records the interpolated
    sample quantile of the realized errors, plus percentile bands (defaults
    10% and 90%). The quantile value sits inside the bands only when 1-alpha
    lies between the band percentiles.
    """
    if reps < 10:
        raise ValueError(f"need at least 10 realizations per t, got {reps}")
    grid = sorted(set(int(t) for t in t_grid))
    if not grid:
        raise ValueError("t_grid must be nonempty")
    lo_p, hi_p = band_percentiles
    if not 0.0 < lo_p < hi_p < 1.0:
        raise ValueError(f"band percentiles must satisfy 0 < lo < hi < 1, got {band_percentiles}")
    truth = matmul_t(a, b).array
    points, lows, highs = [], [], []
    for i, t in enumerate(grid):
        def one_error(r: int, _t: int = t, _i: int = i) -> float:
            pair = apply_spec(a, b, SketchSpec(kind, _t, derive_seed(seed, _i, r)))
            return float(np.abs(pair.sketched_product - truth).max())

        errs = run_indexed(one_error, reps)
        points.append((t, empirical_quantile(errs, 1.0 - alpha)))
        lows.append(empirical_quantile(errs, lo_p))
        highs.append(empirical_quantile(errs, hi_p))
    return QuantileCurve(
        alpha=alpha,
        points=tuple(points),
        band_low=tuple(lows),
        band_high=tuple(highs),
        reps=reps,
    )


def coverage_probe(
    a: DenseMatrix,
    b: DenseMatrix,
    kind: SketchKind,
    t0: int,
    t: int,
    cfg: BootstrapConfig,
    trials: int,
    seed: int,
) -> float:
    """Fraction of trials where the extrapolated bound covers a fresh error draw.

    Each trial bootstraps a new t0-pair (bootstrap streams are re-keyed per
    trial from cfg.seed), extrapolates the quantile to t, then draws an
    independent t-pair and checks whether its realized error stays below the
    bound. Targets roughly 1 - alpha when the estimate is calibrated.
    """
    if not 1 <= t0 <= t:
        raise ValueError(f"need t >= t0 >= 1, got t0={t0}, t={t}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    truth = matmul_t(a, b).array

    def one_trial(i: int) -> bool:
        pair0 = apply_spec(a, b, SketchSpec(kind, t0, derive_seed(seed, i, 0)))
        est = bootstrap_quantile(pair0, replace(cfg, seed=derive_seed(cfg.seed, i)))
        bound = extrapolate(est, t)
        pair_t = apply_spec(a, b, SketchSpec(kind, t, derive_seed(seed, i, 1)))
        eps = float(np.abs(pair_t.sketched_product - truth).max())
        return eps <= bound

    hits = run_indexed(one_trial, trials)
    return sum(hits) / trials
