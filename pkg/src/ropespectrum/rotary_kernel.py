"""Chunk-wise rotations and (optionally tapered) attention scores.

A head vector of dimension ``d`` is treated as ``d/2`` two-component chunks;
chunk ``j`` of a vector at position ``n`` is rotated by angle
``n * theta_j``.  Scores come in two algebraically equivalent forms: the
rotation form (rotate both vectors, then a weighted per-chunk dot product)
and the complex-exponential form, a weighted inverse non-uniform DFT over
the chunk products evaluated at the relative distance.  Positions are
nonnegative integers; the complex form accepts real distances so curves can
be sampled densely.
"""

from __future__ import annotations

import numpy as np

from .curves import CurveSeries
from .freq_schedule import ClipWindow, FreqTable

__all__ = [
    "apply_taper",
    "attention_score",
    "nudft_score",
    "rotate",
    "score_batch",
    "score_series",
]


def _as_head_vector(v, table: FreqTable) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"head vector must be 1-d, got shape {arr.shape}")
    if arr.size != table.d:
        raise ValueError(f"dimension mismatch: vector has {arr.size} components, table expects {table.d}")
    return arr


def _check_window(window: ClipWindow, table: FreqTable) -> np.ndarray:
    if window.n_chunks != table.n_chunks:
        raise ValueError(
            f"window has {window.n_chunks} weights, table has {table.n_chunks} chunks"
        )
    return window.weights


def _check_position(position) -> int:
    if isinstance(position, (bool, np.bool_)):
        raise ValueError(f"position must be a nonnegative integer, got {position!r}")
    if isinstance(position, (int, np.integer)):
        n = int(position)
    elif isinstance(position, float) and position.is_integer():
        n = int(position)
    else:
        raise ValueError(f"position must be a nonnegative integer, got {position!r}")
    if n < 0:
        raise ValueError(f"position must be a nonnegative integer, got {n}")
    return n


def rotate(v, position, table: FreqTable) -> np.ndarray:
    """Rotate chunk ``j`` of ``v`` by angle ``position * theta_j``.

    Position 0 is the identity; the rotation preserves the Euclidean norm
    and composes additively in position.
    """
    arr = _as_head_vector(v, table)
    n = _check_position(position)
    angles = n * table.thetas
    c, s = np.cos(angles), np.sin(angles)
    x, y = arr[0::2], arr[1::2]
    out = np.empty_like(arr)
    out[0::2] = c * x - s * y
    out[1::2] = s * x + c * y
    return out


def apply_taper(v, window: ClipWindow) -> np.ndarray:
    """Fold ``sqrt(weights[j])`` into each chunk of ``v``.

    Applying this to both query and key reproduces the weighted score with a
    plain unweighted dot-product kernel, which is the drop-in way to use a
    clip window with an unmodified attention implementation.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size != 2 * window.n_chunks:
        raise ValueError(
            f"dimension mismatch: vector has shape {arr.shape}, window expects {2 * window.n_chunks}"
        )
    roots = np.sqrt(window.weights)
    out = arr.copy()
    out[0::2] *= roots
    out[1::2] *= roots
    return out


def attention_score(q, n, k, m, table: FreqTable, window: ClipWindow) -> float:
    """Weighted score between query at position ``n`` and key at position ``m``.

    Computed in the rotation form: both vectors are rotated at their own
    positions and the per-chunk dot products are combined with the window
    weights.  With an all-ones window this is the plain rotary score, which
    depends on the positions only through ``m - n``.
    """
    weights = _check_window(window, table)
    rq = rotate(q, n, table)
    rk = rotate(k, m, table)
    prod = rq * rk
    return float(weights @ (prod[0::2] + prod[1::2]))


def nudft_score(q, k, tau, table: FreqTable, window: ClipWindow) -> float:
    """Weighted score at relative distance ``tau`` in the complex form.

    Chunk ``j`` is read as the complex number ``v[2j] + i v[2j+1]``; the
    score is ``sum_j w_j Re[conj(q_j) k_j exp(i theta_j tau)]``.  The
    conjugate sits on the query so that the phase sign matches the rotation
    form for integer ``tau``.
    """
    qa = _as_head_vector(q, table)
    ka = _as_head_vector(k, table)
    weights = _check_window(window, table)
    qc = qa[0::2] + 1j * qa[1::2]
    kc = ka[0::2] + 1j * ka[1::2]
    phase = np.exp(1j * float(tau) * table.thetas)
    return float(np.real(np.conj(qc) * kc * phase) @ weights)


def score_series(q, k, taus, table: FreqTable, window: ClipWindow) -> CurveSeries:
    """Evaluate :func:`nudft_score` over a strictly increasing grid of distances."""
    qa = _as_head_vector(q, table)
    ka = _as_head_vector(k, table)
    weights = _check_window(window, table)
    taus = np.asarray(taus, dtype=np.float64)
    if taus.ndim != 1 or taus.size == 0:
        raise ValueError("taus must be a non-empty 1-d sequence")
    if np.any(np.diff(taus) <= 0.0):
        raise ValueError("taus must be strictly increasing")
    qc = qa[0::2] + 1j * qa[1::2]
    kc = ka[0::2] + 1j * ka[1::2]
    chunk_prod = np.conj(qc) * kc
    angles = np.outer(taus, table.thetas)
    values = (np.cos(angles) * chunk_prod.real - np.sin(angles) * chunk_prod.imag) @ weights
    return CurveSeries(taus=taus, values=values)


def score_batch(Q, K, tau, table: FreqTable, window: ClipWindow) -> np.ndarray:
    """Row-wise :func:`nudft_score` for stacked vectors.

    ``Q`` and ``K`` are ``(n, d)`` arrays of paired queries and keys; the
    result is the length-``n`` vector of weighted scores at distance ``tau``.
    """
    Qa = np.asarray(Q, dtype=np.float64)
    Ka = np.asarray(K, dtype=np.float64)
    if Qa.ndim != 2 or Ka.shape != Qa.shape or Qa.shape[1] != table.d:
        raise ValueError(
            f"expected matching (n, {table.d}) arrays, got {Qa.shape} and {Ka.shape}"
        )
    weights = _check_window(window, table)
    c = np.cos(float(tau) * table.thetas)
    s = np.sin(float(tau) * table.thetas)
    qx, qy = Qa[:, 0::2], Qa[:, 1::2]
    kx, ky = Ka[:, 0::2], Ka[:, 1::2]
    # Re[conj(q) k] and Im[conj(q) k] per chunk
    re = qx * kx + qy * ky
    im = qx * ky - qy * kx
    return (re * c - im * s) @ weights
