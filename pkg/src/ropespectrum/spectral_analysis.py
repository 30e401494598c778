"""Numerical verification of the decay and leakage laws.

Two families of checks live here.  The semantic-gap family compares the
closed-form expectation ``2 sigma^2 sum_i w_i cos(tau theta_i)`` against a
Monte Carlo estimate built from i.i.d. Gaussian queries and keys.  The
leakage family studies what removing low frequencies does to a score
curve: an ideal hard cutoff convolves the curve with a slowly decaying sinc
kernel, whose ringing envelope falls off like ``1/tau``, while the cosine
taper's complement yields a kernel that decays at least two orders faster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .curves import CurveSeries
from .freq_schedule import ClipWindow, FreqTable, soft_weight
from .rotary_kernel import score_batch

__all__ = [
    "GapEstimate",
    "LeakageProfile",
    "decay_curve",
    "envelope_decay_exponent",
    "flat_spectrum_signal",
    "leakage_error",
    "semantic_gap_analytic",
    "semantic_gap_montecarlo",
    "sinc_kernel",
    "soft_complement_kernel",
]

# D11-style discretization limits: at least 16 samples per cutoff period,
# kernel truncated where its envelope falls below 1e-6 of its peak.
_MAX_PHASE_STEP = np.pi / 8
_KERNEL_TRUNCATION = 1e-6
_MIN_SPAN_PERIODS = 2
_MIN_QUADRATURE_PANELS = 1024


@dataclass(frozen=True, eq=False)
class GapEstimate:
    """Monte Carlo estimate of the similar-vs-random key score gap."""

    mean: float
    std_error: float
    n_samples: int
    analytic: float
    distribution: str = "gaussian"

    def __post_init__(self) -> None:
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass(frozen=True, eq=False)
class LeakageProfile:
    """Clipping error ``E(tau)`` alongside the signal it was computed from."""

    taus: np.ndarray
    base_signal: np.ndarray
    error: np.ndarray
    mode: str
    theta_c: float

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=np.float64)
        base = np.asarray(self.base_signal, dtype=np.float64)
        err = np.asarray(self.error, dtype=np.float64)
        if not taus.size == base.size == err.size:
            raise ValueError("taus, base_signal and error must have equal length")
        steps = np.diff(taus)
        if taus.size > 1 and not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError("leakage profiles require a uniform grid")
        for name, arr in (("taus", taus), ("base_signal", base), ("error", err)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def decay_curve(table: FreqTable, window: ClipWindow, taus) -> CurveSeries:
    """Weighted cosine sum ``sum_i w_i cos(tau theta_i)`` over a distance grid."""
    if window.n_chunks != table.n_chunks:
        raise ValueError(f"window has {window.n_chunks} weights, table has {table.n_chunks} chunks")
    taus = np.asarray(taus, dtype=np.float64)
    if taus.ndim != 1 or taus.size == 0:
        raise ValueError("taus must be a non-empty 1-d sequence")
    if np.any(taus < 0.0):
        raise ValueError("taus must be nonnegative")
    if np.any(np.diff(taus) <= 0.0):
        raise ValueError("taus must be strictly increasing")
    values = np.empty_like(taus)
    # chunked so dense scans over hundreds of thousands of points stay cheap on memory
    step = 65536
    for lo in range(0, taus.size, step):
        hi = min(lo + step, taus.size)
        values[lo:hi] = np.cos(np.outer(taus[lo:hi], table.thetas)) @ window.weights
    return CurveSeries(taus=taus, values=values)


def semantic_gap_analytic(sigma: float, table: FreqTable, window: ClipWindow, tau: float) -> float:
    """Closed-form gap ``2 sigma^2 sum_i w_i cos(tau theta_i)``."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if window.n_chunks != table.n_chunks:
        raise ValueError(f"window has {window.n_chunks} weights, table has {table.n_chunks} chunks")
    return float(2.0 * sigma**2 * (window.weights @ np.cos(float(tau) * table.thetas)))


def _shard_sizes(n_samples: int, n_shards: int) -> list[int]:
    base, extra = divmod(n_samples, n_shards)
    return [base + (1 if i < extra else 0) for i in range(n_shards)]


def semantic_gap_montecarlo(
    sigma: float,
    mu: float,
    sigma_eps: float,
    table: FreqTable,
    window: ClipWindow,
    tau: int,
    n_samples: int,
    seed: int,
    n_shards: int = 1,
) -> GapEstimate:
    """Sampling estimate of the similar-vs-random key score gap.

    Draws queries and keys with i.i.d. Gaussian components (mean ``mu``,
    std ``sigma``), forms the similar key as the query plus a zero-mean
    Gaussian perturbation of std ``sigma_eps``, and averages the per-sample
    difference of the two weighted scores at distance ``tau``.  The result
    carries the matching closed-form value for comparison.

    Sampling may be split across ``n_shards`` independent substreams derived
    from ``seed``; the estimate is reproducible for a fixed
    ``(seed, n_shards)`` pair, with shard contributions combined in shard
    order.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if sigma_eps < 0:
        raise ValueError(f"sigma_eps must be nonnegative, got {sigma_eps}")
    if n_shards < 1:
        raise ValueError(f"n_shards must be >= 1, got {n_shards}")
    if not isinstance(tau, (int, np.integer)) or tau < 0:
        raise ValueError(f"tau must be a nonnegative integer, got {tau!r}")

    d = table.d
    parts = []
    children = np.random.SeedSequence(seed).spawn(n_shards)
    for child, size in zip(children, _shard_sizes(n_samples, n_shards)):
        if size == 0:
            continue
        rng = np.random.default_rng(child)
        q = rng.normal(mu, sigma, (size, d))
        k = rng.normal(mu, sigma, (size, d))
        eps = rng.normal(0.0, sigma_eps, (size, d))
        parts.append(
            score_batch(q, q + eps, tau, table, window) - score_batch(q, k, tau, table, window)
        )
    diffs = np.concatenate(parts)
    mean = float(diffs.mean())
    std_error = float(diffs.std(ddof=1) / math.sqrt(n_samples))
    return GapEstimate(
        mean=mean,
        std_error=std_error,
        n_samples=int(n_samples),
        analytic=semantic_gap_analytic(sigma, table, window, float(tau)),
    )


def sinc_kernel(theta_c: float, taus) -> CurveSeries:
    """Impulse response ``(theta_c / pi) sinc(theta_c tau / pi)`` of an ideal low-pass.

    The value at ``tau = 0`` is ``theta_c / pi``; zeros sit exactly at the
    multiples of ``pi / theta_c`` and the kernel integrates to 1 over the
    real line.
    """
    if not theta_c > 0:
        raise ValueError(f"theta_c must be positive, got {theta_c}")
    taus = np.asarray(taus, dtype=np.float64)
    return CurveSeries(taus=taus, values=(theta_c / np.pi) * np.sinc(theta_c * taus / np.pi))


def soft_complement_kernel(window: ClipWindow, taus, panels: int = 2048) -> CurveSeries:
    """Time-domain kernel of the taper's complement ``1 - w(theta)``.

    Computed as ``(1/pi) integral_0^theta_start (1 - w(theta)) cos(theta tau)
    dtheta`` by composite Simpson quadrature; the taper continues as 0 below
    ``theta_min``, so the complement is an all-pass there.  ``panels`` must
    be at least 1024 and even.
    """
    if window.mode != "soft":
        raise ValueError(f"complement kernel requires a soft window, got mode {window.mode!r}")
    if not math.isfinite(window.theta_start):
        raise ValueError("complement kernel requires a finite clipping onset")
    if panels < _MIN_QUADRATURE_PANELS or panels % 2:
        raise ValueError(f"panels must be an even integer >= {_MIN_QUADRATURE_PANELS}, got {panels}")
    taus = np.asarray(taus, dtype=np.float64)
    nodes = np.linspace(0.0, window.theta_start, panels + 1)
    complement = 1.0 - soft_weight(nodes, window.theta_start, window.theta_min)
    simpson = np.ones(panels + 1)
    simpson[1:-1:2] = 4.0
    simpson[2:-1:2] = 2.0
    coef = complement * simpson * ((nodes[1] - nodes[0]) / 3.0) / np.pi
    values = np.empty_like(taus)
    step = max(1, 2**24 // (panels + 1))
    for lo in range(0, taus.size, step):
        hi = min(lo + step, taus.size)
        values[lo:hi] = np.cos(np.outer(taus[lo:hi], nodes)) @ coef
    return CurveSeries(taus=taus, values=values)


def flat_spectrum_signal(band_max: float, taus) -> CurveSeries:
    """Score curve of a flat unit-amplitude spectrum on ``[0, band_max]``.

    This is the continuous counterpart of a dense table with unit chunk
    amplitudes: ``A(tau) = sin(band_max tau) / tau`` with value ``band_max``
    at ``tau = 0``.  It decays like ``1/tau``, so a finite grid captures it
    with negligible boundary mass.
    """
    if not band_max > 0:
        raise ValueError(f"band_max must be positive, got {band_max}")
    taus = np.asarray(taus, dtype=np.float64)
    values = np.empty_like(taus)
    nz = taus != 0.0
    values[nz] = np.sin(band_max * taus[nz]) / taus[nz]
    values[~nz] = band_max
    return CurveSeries(taus=taus, values=values)


def leakage_error(
    base_signal: CurveSeries,
    theta_c: float,
    mode: str,
    table: FreqTable,
    window: ClipWindow,
    panels: int = 2048,
) -> LeakageProfile:
    """Clipping error ``E = -(A * kernel)`` by discrete convolution.

    ``base_signal`` must be sampled on a uniform grid starting at 0; the
    signal is a cosine-spectrum curve and is therefore extended evenly to
    negative distances before convolving, with zero padding beyond the grid.
    Hard mode convolves with the sinc kernel at cutoff ``theta_c``; soft
    mode with the taper complement kernel of ``window`` (whose onset must
    then equal ``theta_c``).  The kernel is sampled on the signal's grid,
    truncated where its envelope drops below 1e-6 of its peak (or at the
    grid span), and integrated with trapezoidal end weights.
    """
    if mode not in ("hard", "soft"):
        raise ValueError(f"leakage mode must be 'hard' or 'soft', got {mode!r}")
    if not theta_c > 0:
        raise ValueError(f"theta_c must be positive, got {theta_c}")
    if window.n_chunks != table.n_chunks:
        raise ValueError(f"window has {window.n_chunks} weights, table has {table.n_chunks} chunks")
    taus = base_signal.taus
    signal = base_signal.values
    n = taus.size
    if n < 8:
        raise ValueError("base signal grid is too short")
    if taus[0] != 0.0:
        raise ValueError("base signal grid must start at tau = 0")
    h = float(taus[1] - taus[0])
    steps = np.diff(taus)
    if not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise ValueError("base signal must be sampled on a uniform grid")
    if mode == "soft":
        if window.mode != "soft" or not math.isfinite(window.theta_start):
            raise ValueError("soft leakage requires a soft window with a finite onset")
        if not math.isclose(theta_c, window.theta_start, rel_tol=1e-12):
            raise ValueError(
                f"theta_c {theta_c} does not match the window onset frequency {window.theta_start}"
            )
    if theta_c * h > _MAX_PHASE_STEP:
        raise ValueError(
            f"grid spacing {h} too coarse for cutoff {theta_c}: need theta_c * h <= pi/8"
        )
    span = float(taus[-1])
    if span < _MIN_SPAN_PERIODS * (2.0 * np.pi / theta_c):
        raise ValueError(
            f"grid too short for the kernel support: span {span} covers fewer than "
            f"{_MIN_SPAN_PERIODS} cutoff periods ({2 * np.pi / theta_c:.6g} each)"
        )

    # |sinc kernel| <= 1/(pi tau): envelope falls below the truncation
    # threshold only beyond 1/(threshold * theta_c)
    radius = min(n - 1, int(math.ceil(1.0 / (_KERNEL_TRUNCATION * theta_c) / h)))
    offsets = np.arange(-radius, radius + 1) * h
    if mode == "hard":
        kernel = sinc_kernel(theta_c, offsets).values
    else:
        kernel = soft_complement_kernel(window, offsets, panels=panels).values
    weighted = kernel * h
    weighted[0] *= 0.5
    weighted[-1] *= 0.5

    extended = np.concatenate([signal[:0:-1], signal])
    error = -fftconvolve(extended, weighted, mode="same")[n - 1 :]
    return LeakageProfile(taus=taus, base_signal=signal, error=error, mode=mode, theta_c=float(theta_c))


def envelope_decay_exponent(series: CurveSeries, tau_min: float) -> float:
    """Power-law exponent of the oscillation envelope beyond ``tau_min``.

    Local maxima of ``|values|`` are found with a strict three-point test;
    those at ``tau > tau_min`` feed a least-squares fit of ``log |peak|``
    against ``log tau``, and the negated slope is returned.  Raises if fewer
    than 10 usable peaks remain.
    """
    a = np.abs(series.values)
    inner = (a[1:-1] > a[:-2]) & (a[1:-1] > a[2:])
    idx = np.nonzero(inner)[0] + 1
    idx = idx[(series.taus[idx] > tau_min) & (series.taus[idx] > 0.0) & (a[idx] > 0.0)]
    if idx.size < 10:
        raise ValueError(
            f"need at least 10 local maxima beyond tau_min={tau_min}, found {idx.size}"
        )
    slope = np.polyfit(np.log(series.taus[idx]), np.log(a[idx]), 1)[0]
    return float(-slope)
