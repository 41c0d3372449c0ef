"""Shared independent oracles used across the test modules."""

import math

import numpy as np

from sketchguard.matcore import DenseMatrix, matmul_t
from sketchguard.rng import substream
from sketchguard.sketch import SketchPair


def mc_mean_check(sketcher, a: DenseMatrix, b: DenseMatrix, draws: int, tol_se: float = 5.0):
    """Assert the Monte-Carlo mean of the sketched product matches the exact one.

    Entrywise: |mean - truth| <= tol_se * (sample SD / sqrt(draws)), with a
    tiny absolute floor for entries whose sketched values never vary.
    """
    truth = matmul_t(a, b).array
    total = np.zeros_like(truth)
    total_sq = np.zeros_like(truth)
    for i in range(draws):
        p = sketcher(i)
        total += p
        total_sq += p * p
    mean = total / draws
    var = np.maximum(total_sq / draws - mean**2, 0.0)
    se = np.sqrt(var / draws)
    assert (np.abs(mean - truth) <= tol_se * se + 1e-12).all()


def hadamard(n: int) -> np.ndarray:
    """Explicit Walsh-Hadamard matrix by the doubling recursion."""
    h = np.ones((1, 1))
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h


def explicit_srht_apply(x: np.ndarray, t: int, seed: int) -> np.ndarray:
    """Materialize the SRHT operator from the same streams and apply it densely."""
    n = x.shape[0]
    n_pad = 1 << (n - 1).bit_length()
    signs = substream(seed, 0).integers(0, 2, n_pad) * 2 - 1
    idx = substream(seed, 1).integers(0, n_pad, t)
    p = np.zeros((t, n_pad))
    p[np.arange(t), idx] = 1.0 / math.sqrt(t / n_pad)
    s = p @ (hadamard(n_pad) / math.sqrt(n_pad)) @ np.diag(signs.astype(float))
    x_pad = np.zeros((n_pad, x.shape[1]))
    x_pad[:n] = x
    return s @ x_pad


def dyad_form_error(pair: SketchPair, xi: np.ndarray) -> float:
    """Definitional multiplier evaluation: weighted centered dyads, averaged, max-abs."""
    a = pair.a_sketch.array
    b = pair.b_sketch.array
    t = a.shape[0]
    product = np.zeros((a.shape[1], b.shape[1]))
    for j in range(a.shape[1]):
        for k in range(b.shape[1]):
            product[j, k] = sum(a[i, j] * b[i, k] for i in range(t))
    accum = np.zeros_like(product)
    for i in range(t):
        dyad = t * np.outer(a[i], b[i])
        accum += xi[i] * (dyad - product)
    return float(np.abs(accum / t).max())
