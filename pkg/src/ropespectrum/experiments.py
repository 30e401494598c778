"""Desk-scale studies and report builders.

Everything here produces a :class:`ReportTable`: a rectangular set of named
columns plus a metadata map that echoes every configuration knob, so the
emitted files are self-describing and runs are reproducible from their own
headers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import CurveSeries
from .freq_schedule import (
    CLIP_MODES,
    ClipWindow,
    FreqTable,
    ScalingPolicy,
    build_freq_table,
    clip_window,
    critical_dimension,
    periods,
    scale_table,
)
from .spectral_analysis import (
    decay_curve,
    envelope_decay_exponent,
    flat_spectrum_signal,
    leakage_error,
)

__all__ = [
    "CLIP_ORDERS",
    "ReportTable",
    "RetrievalConfig",
    "decay_report",
    "period_report",
    "retrieval_sim",
    "ringing_study",
    "spectrum_report",
    "window_label",
]

CLIP_ORDERS = ("clip-then-scale", "scale-then-clip")


@dataclass(eq=False)
class ReportTable:
    """Named columns of equal length plus a configuration-echo metadata map."""

    columns: dict[str, list]
    metadata: dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.columns:
            raise ValueError("a report needs at least one column")
        self.columns = {str(k): list(v) for k, v in self.columns.items()}
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns must have equal length, got lengths {sorted(lengths)}")
        self.metadata = dict(self.metadata)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values())))

    def column(self, name: str) -> list:
        return self.columns[name]


def window_label(window: ClipWindow) -> str:
    """Column label for a window: its mode, with the onset when it clips."""
    if window.mode == "none":
        return "none"
    return f"{window.mode}{window.onset_index}"


def period_report(table: FreqTable, pretrain_len: float) -> ReportTable:
    """Per-chunk frequency, period, and out-of-window flag.

    A chunk is flagged when its period exceeds ``pretrain_len``, i.e. it
    never completes a rotation inside the training window.  The metadata
    carries the matching critical dimension.
    """
    if not pretrain_len >= 1:
        raise ValueError(f"pretrain_len must be >= 1, got {pretrain_len}")
    T = periods(table)
    return ReportTable(
        columns={
            "chunk_index": list(range(table.n_chunks)),
            "theta": [float(t) for t in table.thetas],
            "period": [float(t) for t in T],
            "ood_flag": [int(t > pretrain_len) for t in T],
        },
        metadata={
            "d": table.d,
            "base": table.base,
            "pretrain_len": pretrain_len,
            "critical_dimension": critical_dimension(pretrain_len, table.d, table.base),
        },
    )


def spectrum_report(table: FreqTable, windows: list[ClipWindow]) -> ReportTable:
    """Side-by-side weight profiles of several windows over one table."""
    if not windows:
        raise ValueError("spectrum_report needs at least one window")
    columns: dict[str, list] = {
        "chunk_index": list(range(table.n_chunks)),
        "theta": [float(t) for t in table.thetas],
    }
    for w in windows:
        if w.n_chunks != table.n_chunks:
            raise ValueError(f"window has {w.n_chunks} weights, table has {table.n_chunks} chunks")
        label = window_label(w)
        if label in columns:
            raise ValueError(f"duplicate window column {label!r}")
        columns[label] = [float(x) for x in w.weights]
    return ReportTable(
        columns=columns,
        metadata={"d": table.d, "base": table.base, "windows": [window_label(w) for w in windows]},
    )


def decay_report(table: FreqTable, windows: list[ClipWindow], taus) -> ReportTable:
    """Weighted cosine-decay curves, raw and normalized by total weight.

    Both columns are emitted per window since either normalization is a
    reasonable way to present the curves.
    """
    if not windows:
        raise ValueError("decay_report needs at least one window")
    taus = np.asarray(taus, dtype=np.float64)
    columns: dict[str, list] = {"tau": [float(t) for t in taus]}
    for w in windows:
        label = window_label(w)
        if label in columns:
            raise ValueError(f"duplicate window column {label!r}")
        series = decay_curve(table, w, taus)
        total = float(w.weights.sum())
        columns[label] = [float(v) for v in series.values]
        columns[f"{label}_normalized"] = [float(v) / total for v in series.values]
    return ReportTable(
        columns=columns,
        metadata={
            "d": table.d,
            "base": table.base,
            "windows": [window_label(w) for w in windows],
            "tau_max": float(taus[-1]),
            "n_points": int(taus.size),
        },
    )


def ringing_study(
    table: FreqTable,
    onset_index: int,
    *,
    ring_periods: float = 22.0,
    fit_periods: float = 3.0,
    band_mult: float = 64.0,
    samples_per_period: int = 16,
    panels: int = 2048,
) -> ReportTable:
    """Hard-vs-soft clipping error on a synthetic flat-spectrum signal.

    The base signal is the score curve of a flat unit-amplitude spectrum
    spanning the table's band up to ``band_mult`` times the onset frequency
    (capped at the table's top frequency), sampled densely enough to resolve
    it.  Both clipping modes are applied at the onset frequency; the local
    maxima of each error envelope beyond ``fit_periods`` cutoff periods are
    fit to a power law.  Hard clipping rings with an exponent near 1; the
    cosine taper decays with an exponent of at least 2.
    """
    half = table.n_chunks
    if not 0 <= onset_index < half:
        raise ValueError(f"onset_index {onset_index} out of range [0, {half})")
    if band_mult < 4:
        raise ValueError(f"band_mult must be >= 4, got {band_mult}")
    if samples_per_period < 16:
        raise ValueError(f"samples_per_period must be >= 16, got {samples_per_period}")
    window = clip_window(table, "soft", onset_index)
    theta_c = float(table.thetas[onset_index])
    band_max = min(band_mult * theta_c, float(table.thetas[0]))
    step = (2.0 * np.pi / band_max) / samples_per_period
    ring_period = 2.0 * np.pi / theta_c
    n_points = int(ring_periods * ring_period / step) + 1
    taus = np.arange(n_points) * step
    signal = flat_spectrum_signal(band_max, taus)
    hard = leakage_error(signal, theta_c, "hard", table, window, panels=panels)
    soft = leakage_error(signal, theta_c, "soft", table, window, panels=panels)
    tau_min = fit_periods * ring_period
    hard_exp = envelope_decay_exponent(CurveSeries(taus, hard.error), tau_min)
    soft_exp = envelope_decay_exponent(CurveSeries(taus, soft.error), tau_min)
    return ReportTable(
        columns={
            "tau": [float(t) for t in taus],
            "base_signal": [float(v) for v in signal.values],
            "error_hard": [float(v) for v in hard.error],
            "error_soft": [float(v) for v in soft.error],
        },
        metadata={
            "d": table.d,
            "base": table.base,
            "onset_index": onset_index,
            "theta_c": theta_c,
            "band_max": band_max,
            "grid_step": step,
            "n_points": n_points,
            "ring_periods": ring_periods,
            "fit_tau_min": tau_min,
            "quadrature_panels": panels,
            "hard_envelope_exponent": hard_exp,
            "soft_envelope_exponent": soft_exp,
        },
    )


@dataclass(frozen=True, eq=False)
class RetrievalConfig:
    """Configuration of the similar-key retrieval simulation."""

    d: int
    base: float
    distances: tuple[int, ...]
    n_trials: int
    n_distractors: int = 3
    sigma: float = 1.0
    sigma_eps: float = 1.0
    mu: float = 0.0
    seed: int = 0
    clip_mode: str = "none"
    onset_index: int = 0
    scaling: ScalingPolicy | None = None
    clip_order: str = "clip-then-scale"

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.n_distractors < 1:
            raise ValueError(f"n_distractors must be >= 1, got {self.n_distractors}")
        if self.clip_mode not in CLIP_MODES:
            raise ValueError(f"unknown clip mode {self.clip_mode!r}")
        if self.clip_order not in CLIP_ORDERS:
            raise ValueError(f"unknown clip order {self.clip_order!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.sigma_eps < 0:
            raise ValueError(f"sigma_eps must be nonnegative, got {self.sigma_eps}")
        dist = tuple(int(t) for t in self.distances)
        if len(dist) == 0:
            raise ValueError("distances must be non-empty")
        if any(t < 0 for t in dist):
            raise ValueError("distances must be nonnegative integers")
        if any(b <= a for a, b in zip(dist, dist[1:])):
            raise ValueError("distances must be strictly increasing")
        object.__setattr__(self, "distances", dist)


def _resolve_tables(cfg: RetrievalConfig) -> tuple[FreqTable, FreqTable, ClipWindow]:
    """Base table, scaled table (for beyond-pretrain distances), and window."""
    base_table = build_freq_table(cfg.d, cfg.base)
    if cfg.scaling is not None:
        scaled = scale_table(base_table, cfg.scaling)
    else:
        scaled = base_table
    window_source = base_table if cfg.clip_order == "clip-then-scale" else scaled
    window = clip_window(window_source, cfg.clip_mode, cfg.onset_index)
    return base_table, scaled, window


def retrieval_sim(cfg: RetrievalConfig) -> ReportTable:
    """Fraction of trials where the similar key out-scores all distractors.

    Per distance and trial: draw a query, place the similar key (query plus
    perturbation) and ``n_distractors`` independent random keys all at the
    same distance, score everything with the configured kernel, and count a
    success when the similar key attains the maximum.  Exact score ties are
    resolved by a uniform random draw from the trial's substream, so a
    degenerate all-zero window scores at chance level.  With a scaling
    policy, distances beyond its pretrain length use the rescaled table.
    Deterministic for a fixed seed: each trial draws from its own substream.
    """
    base_table, scaled_table, window = _resolve_tables(cfg)
    weights = window.weights
    distance_streams = np.random.SeedSequence(cfg.seed).spawn(len(cfg.distances))

    accuracies = []
    for distance, stream in zip(cfg.distances, distance_streams):
        beyond = cfg.scaling is not None and distance > cfg.scaling.pretrain_len
        thetas = (scaled_table if beyond else base_table).thetas
        c = np.cos(distance * thetas)
        s = np.sin(distance * thetas)
        wins = 0
        for trial_stream in stream.spawn(cfg.n_trials):
            rng = np.random.default_rng(trial_stream)
            q = rng.normal(cfg.mu, cfg.sigma, cfg.d)
            eps = rng.normal(0.0, cfg.sigma_eps, cfg.d)
            distractors = rng.normal(cfg.mu, cfg.sigma, (cfg.n_distractors, cfg.d))
            keys = np.vstack([(q + eps)[None, :], distractors])
            qx, qy = q[0::2], q[1::2]
            kx, ky = keys[:, 0::2], keys[:, 1::2]
            re = kx * qx + ky * qy
            im = qx * ky - qy * kx
            scores = (re * c - im * s) @ weights
            top = np.flatnonzero(scores == scores.max())
            winner = top[0] if top.size == 1 else top[rng.integers(top.size)]
            wins += int(winner == 0)
        accuracies.append(wins / cfg.n_trials)

    return ReportTable(
        columns={
            "distance": list(cfg.distances),
            "accuracy": accuracies,
            "n_trials": [cfg.n_trials] * len(cfg.distances),
        },
        metadata={
            "d": cfg.d,
            "base": cfg.base,
            "distances": list(cfg.distances),
            "n_trials": cfg.n_trials,
            "n_distractors": cfg.n_distractors,
            "sigma": cfg.sigma,
            "sigma_eps": cfg.sigma_eps,
            "mu": cfg.mu,
            "seed": cfg.seed,
            "clip_mode": cfg.clip_mode,
            "onset_index": cfg.onset_index,
            "clip_order": cfg.clip_order,
            "scaling_method": "none" if cfg.scaling is None else cfg.scaling.method,
            "pretrain_len": None if cfg.scaling is None else cfg.scaling.pretrain_len,
            "target_len": None if cfg.scaling is None else cfg.scaling.target_len,
            "distribution": "gaussian",
        },
    )
