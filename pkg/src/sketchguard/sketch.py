"""Sketching operators and their application to matrix pairs.

A sketching matrix S with t rows compresses an n-row pair (A, B) to the pair
(SA, SB) while keeping the expected Gram structure: E[S^T S] = I. Supported
operators: Gaussian projection, uniform row sampling, length sampling, and the
subsampled randomized Hadamard transform (SRHT).

Both members of a pair are always produced by one realization of S; there is
no API for sketching A and B under independent draws into one SketchPair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .matcore import DenseMatrix
from .rng import check_seed, substream

__all__ = [
    "SketchKind",
    "SketchSpec",
    "SketchPair",
    "LengthSamplingError",
    "gaussian_sketch",
    "length_sampling_probs",
    "row_sample_sketch",
    "fwht_in_place",
    "srht_sketch",
    "apply_spec",
]

# Gaussian S is materialized in one piece only up to this many entries;
# larger operators are generated and applied in row blocks.
MAX_MATERIALIZED_ENTRIES = 1 << 24


class LengthSamplingError(ValueError):
    """Length sampling is undefined: every paired row-norm product is zero."""


class SketchKind(str, Enum):
    GAUSSIAN = "gaussian"
    UNIFORM_SAMPLE = "uniform"
    LENGTH_SAMPLE = "length"
    SRHT = "srht"


@dataclass(frozen=True)
class SketchSpec:
    """Which operator to draw, its sketch size t, and the seed of the draw."""

    kind: SketchKind
    t: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "kind", SketchKind(self.kind))
        if self.t < 1:
            raise ValueError(f"sketch size must be at least 1, got {self.t}")
        object.__setattr__(self, "seed", check_seed(self.seed))


@dataclass(frozen=True)
class SketchPair:
    """Sketches (SA, SB) from a single realization of S, with provenance."""

    a_sketch: DenseMatrix
    b_sketch: DenseMatrix
    spec: SketchSpec
    source_rows: int

    def __post_init__(self):
        if self.a_sketch.rows != self.spec.t or self.b_sketch.rows != self.spec.t:
            raise ValueError(
                f"sketch row counts ({self.a_sketch.rows}, {self.b_sketch.rows}) "
                f"do not match sketch size t={self.spec.t}"
            )
        if self.source_rows < 1:
            raise ValueError("source_rows must be at least 1")

    @property
    def t(self) -> int:
        return self.spec.t

    @cached_property
    def sketched_product(self) -> np.ndarray:
        """Read-only cached product of a_sketch's transpose with b_sketch."""
        p = self.a_sketch.array.T @ self.b_sketch.array
        p.flags.writeable = False
        return p


def _check_pair_inputs(a: DenseMatrix, b: DenseMatrix) -> int:
    if a.rows != b.rows:
        raise ValueError(f"row counts differ: {a.rows} vs {b.rows}")
    return a.rows


def gaussian_sketch(a: DenseMatrix, b: DenseMatrix, t: int, seed: int) -> SketchPair:
    """Sketch with S having i.i.d. N(0, 1/t) entries.

    Row i of S is drawn from the stream (seed, i), so applying S in row
    blocks yields the same result as materializing it whole. Blocks are
    capped at MAX_MATERIALIZED_ENTRIES entries.
    """
    spec = SketchSpec(SketchKind.GAUSSIAN, t, seed)
    n = _check_pair_inputs(a, b)
    out_a = np.empty((t, a.cols))
    out_b = out_a if b is a else np.empty((t, b.cols))
    scale = 1.0 / math.sqrt(t)
    block = max(1, MAX_MATERIALIZED_ENTRIES // n)
    for start in range(0, t, block):
        stop = min(t, start + block)
        s_block = np.empty((stop - start, n))
        for i in range(start, stop):
            s_block[i - start] = substream(seed, i).standard_normal(n)
        s_block *= scale
        out_a[start:stop] = s_block @ a.array
        if out_b is not out_a:
            out_b[start:stop] = s_block @ b.array
    a_sk = DenseMatrix._wrap(out_a)
    b_sk = a_sk if out_b is out_a else DenseMatrix._wrap(out_b)
    return SketchPair(a_sk, b_sk, spec, n)


def length_sampling_probs(a: DenseMatrix, b: DenseMatrix) -> np.ndarray:
    """Row-sampling probabilities proportional to paired row-norm products.

    p_i is the product of the Euclidean norms of row i of a and row i of b,
    normalized to sum to 1. Raises LengthSamplingError when all products are
    zero (a or b is the zero matrix).
    """
    _check_pair_inputs(a, b)
    w = np.linalg.norm(a.array, axis=1) * np.linalg.norm(b.array, axis=1)
    total = float(w.sum())
    if total == 0.0:
        raise LengthSamplingError("all row-norm products are zero; length sampling undefined")
    return w / total


def _check_probs(probs: np.ndarray, n: int) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.shape[0] != n:
        raise ValueError(f"probability vector must have length {n}")
    if not np.isfinite(p).all() or (p < 0).any():
        raise ValueError("probabilities must be finite and nonnegative")
    if abs(float(p.sum()) - 1.0) > 1e-8:
        raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
    return p


def row_sample_sketch(
    a: DenseMatrix, b: DenseMatrix, probs, t: int, seed: int, kind: SketchKind | None = None
) -> SketchPair:
    """Sketch by sampling rows i.i.d. from ``probs``, rescaled by 1/sqrt(t p_i).

    The same row indices are used for both matrices. Indices are drawn by
    inverse CDF over the cumulative probability vector; rows with p_i = 0
    occupy empty intervals and are never selected.
    """
    if kind is None:
        kind = SketchKind.UNIFORM_SAMPLE
    spec = SketchSpec(kind, t, seed)
    n = _check_pair_inputs(a, b)
    p = _check_probs(probs, n)
    cum = np.cumsum(p)
    cum[-1] = 1.0  # pin the top so u < 1 can never overrun the table
    u = substream(seed, 0).random(t)
    idx = np.searchsorted(cum, u, side="right")
    scale = 1.0 / np.sqrt(t * p[idx])
    out_a = a.array[idx] * scale[:, None]
    a_sk = DenseMatrix._wrap(out_a)
    if b is a:
        b_sk = a_sk
    else:
        b_sk = DenseMatrix._wrap(b.array[idx] * scale[:, None])
    return SketchPair(a_sk, b_sk, spec, n)


def fwht_in_place(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along axis 0, in place.

    Length (axis 0) must be a power of two. 2-D input is transformed
    column-wise. Runs the usual butterfly passes, log2(n) of them, each a
    full pass over the data. Returns the transformed array.
    """
    a = np.asarray(values)
    n = a.shape[0]
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {n}")
    half = 1
    while half < n:
        view = a.reshape(n // (2 * half), 2, half, *a.shape[1:])
        upper = view[:, 0].copy()
        view[:, 0] += view[:, 1]
        view[:, 1] = upper - view[:, 1]
        half *= 2
    return values


def srht_sketch(a: DenseMatrix, b: DenseMatrix, t: int, seed: int) -> SketchPair:
    """Subsampled randomized Hadamard transform sketch of the pair.

    Zero-pads to the next power of two n_pad, flips row signs by a Rademacher
    diagonal drawn from stream (seed, 0), applies the orthogonal Hadamard
    transform (fast path, no S materialized), and keeps t rows sampled
    uniformly with replacement from stream (seed, 1), rescaled by
    sqrt(n_pad / t). Total cost is order n_pad * (cols_a + cols_b) * log n_pad.
    """
    spec = SketchSpec(SketchKind.SRHT, t, seed)
    n = _check_pair_inputs(a, b)
    n_pad = 1 << (n - 1).bit_length()
    signs = substream(seed, 0).integers(0, 2, n_pad) * 2 - 1
    idx = substream(seed, 1).integers(0, n_pad, t)
    cols = a.cols if b is a else a.cols + b.cols
    work = np.zeros((n_pad, cols))
    work[:n, : a.cols] = a.array
    if b is not a:
        work[:n, a.cols :] = b.array
    work[:n] *= signs[:n, None]
    fwht_in_place(work)
    work *= 1.0 / math.sqrt(n_pad)
    kept = work[idx] * math.sqrt(n_pad / t)
    a_sk = DenseMatrix._wrap(kept[:, : a.cols])
    if b is a:
        b_sk = a_sk
    else:
        b_sk = DenseMatrix._wrap(kept[:, a.cols :])
    return SketchPair(a_sk, b_sk, spec, n)


def apply_spec(a: DenseMatrix, b: DenseMatrix, spec: SketchSpec) -> SketchPair:
    """Dispatch on spec.kind; length sampling computes its probabilities here."""
    if spec.kind is SketchKind.GAUSSIAN:
        return gaussian_sketch(a, b, spec.t, spec.seed)
    if spec.kind is SketchKind.UNIFORM_SAMPLE:
        n = _check_pair_inputs(a, b)
        probs = np.full(n, 1.0 / n)
        return row_sample_sketch(a, b, probs, spec.t, spec.seed, kind=spec.kind)
    if spec.kind is SketchKind.LENGTH_SAMPLE:
        probs = length_sampling_probs(a, b)
        return row_sample_sketch(a, b, probs, spec.t, spec.seed, kind=spec.kind)
    if spec.kind is SketchKind.SRHT:
        return srht_sketch(a, b, spec.t, spec.seed)
    raise ValueError(f"unsupported sketch kind: {spec.kind!r}")
