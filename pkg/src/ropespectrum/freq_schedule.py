"""Rotation-frequency schedules for chunk-rotated attention vectors.

A head of dimension ``d`` is viewed as ``d/2`` two-component chunks, each
rotated at its own frequency ``theta_i = base ** (-2 i / d)``.  This module
builds those tables, computes their periods and the critical dimension,
rescales them for context extension (uniform, exponent-graded, banded-ramp,
or externally supplied factors), rebases them onto a new base frequency,
and constructs per-frequency clipping windows, including the cosine-decay
taper used for soft clipping.

All values are 64-bit floats; every operation is a pure function and the
returned objects are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "CLIP_MODES",
    "SCALING_METHODS",
    "ClipWindow",
    "FreqTable",
    "ScalingPolicy",
    "build_freq_table",
    "clip_window",
    "critical_dimension",
    "load_scale_file",
    "periods",
    "rebase",
    "scale_table",
    "scaling_factors",
    "soft_weight",
]

SCALING_METHODS = ("none", "pi", "ntk", "yarn", "table")
CLIP_MODES = ("none", "hard", "soft")


def _frozen_array(values, length: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).copy()
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d sequence, got shape {arr.shape}")
    if length is not None and arr.size != length:
        raise ValueError(f"expected {length} entries, got {arr.size}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FreqTable:
    """Per-chunk rotation frequencies of one attention head.

    Parameters
    ----------
    d : int
        Head dimension (even, >= 2); the table holds ``d/2`` frequencies.
    base : float
        Base frequency (> 1).  For tables produced by :func:`build_freq_table`
        this is the generating constant; for manually constructed or rescaled
        tables it is retained as metadata only.
    thetas : ndarray
        The ``d/2`` rotation frequencies in radians per position step.  Must
        be strictly positive.
    from_base : bool
        True while ``thetas`` still equal ``base ** (-2 i / d)``.  Dropped by
        :func:`scale_table` when a non-trivial scaling is applied; only
        tables with ``from_base=True`` may be rebased.
    """

    d: int
    base: float
    thetas: np.ndarray
    from_base: bool = True

    def __post_init__(self) -> None:
        if self.d < 2 or self.d % 2:
            raise ValueError(f"head dimension must be a positive even integer, got {self.d}")
        if not self.base > 1.0:
            raise ValueError(f"base frequency must exceed 1, got {self.base}")
        arr = _frozen_array(self.thetas, self.d // 2)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("all frequencies must be finite and strictly positive")
        object.__setattr__(self, "thetas", arr)

    @property
    def n_chunks(self) -> int:
        return self.d // 2


@dataclass(frozen=True, eq=False)
class ScalingPolicy:
    """A context-extension method together with its parameters.

    ``pretrain_len`` is the context length the schedule was trained for and
    ``target_len`` the length it should be stretched to.  ``yarn_alpha`` and
    ``yarn_beta`` bound the rotation-count ramp used by the ``yarn`` method;
    ``table_path`` points at an external per-frequency scale file (one value
    per line, ``#`` comments) used by the ``table`` method.
    """

    method: str
    pretrain_len: float
    target_len: float
    yarn_alpha: float = 1.0
    yarn_beta: float = 32.0
    table_path: str | Path | None = None

    def __post_init__(self) -> None:
        if self.method not in SCALING_METHODS:
            raise ValueError(f"unknown scaling method {self.method!r}; expected one of {SCALING_METHODS}")
        if not self.pretrain_len >= 1:
            raise ValueError(f"pretrain_len must be >= 1, got {self.pretrain_len}")
        if not self.target_len >= self.pretrain_len:
            raise ValueError(
                f"target_len must be >= pretrain_len, got {self.target_len} < {self.pretrain_len}"
            )
        if self.method == "yarn" and not self.yarn_alpha < self.yarn_beta:
            raise ValueError(f"yarn_alpha must be < yarn_beta, got {self.yarn_alpha} >= {self.yarn_beta}")
        if self.method == "table" and self.table_path is None:
            raise ValueError("method 'table' requires table_path")

    @property
    def ratio(self) -> float:
        return float(self.target_len) / float(self.pretrain_len)


@dataclass(frozen=True, eq=False)
class ClipWindow:
    """Per-frequency weights attenuating the low end of a spectrum.

    ``weights[j]`` multiplies the score contribution of chunk ``j``.  The
    ``soft`` mode follows the cosine-decay taper of :func:`soft_weight`:
    weight 1 at and above ``theta_start``, exactly 0 at ``theta_min``.  The
    drop-in recipe for an unmodified dot-product kernel is to fold
    ``sqrt(weights[j])`` into both query and key chunks; see
    ``rotary_kernel.apply_taper``.
    """

    mode: str
    onset_index: int
    theta_start: float
    theta_min: float
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.mode not in CLIP_MODES:
            raise ValueError(f"unknown clip mode {self.mode!r}; expected one of {CLIP_MODES}")
        arr = _frozen_array(self.weights)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("window weights must lie in [0, 1]")
        if not 0 <= self.onset_index <= arr.size:
            raise ValueError(f"onset_index {self.onset_index} out of range [0, {arr.size}]")
        object.__setattr__(self, "weights", arr)

    @property
    def n_chunks(self) -> int:
        return self.weights.size


def build_freq_table(d: int, base: float) -> FreqTable:
    """Generate the geometric frequency table ``theta_i = base ** (-2 i / d)``.

    Parameters
    ----------
    d : int
        Head dimension; must be even and >= 2.
    base : float
        Base frequency; must exceed 1.

    Returns
    -------
    FreqTable
        Strictly decreasing table with ``thetas[0] == 1`` exactly.
    """
    if not isinstance(d, (int, np.integer)):
        raise ValueError(f"head dimension must be an integer, got {type(d).__name__}")
    if d < 2 or d % 2:
        raise ValueError(f"head dimension must be a positive even integer, got {d}")
    if not base > 1.0:
        raise ValueError(f"base frequency must exceed 1, got {base}")
    exponents = -2.0 * np.arange(d // 2, dtype=np.float64) / d
    return FreqTable(d=int(d), base=float(base), thetas=float(base) ** exponents)


def periods(table: FreqTable) -> np.ndarray:
    """Rotation periods ``2 pi / theta_i``, one per chunk."""
    if np.any(table.thetas <= 0.0):
        raise ValueError("all frequencies must be strictly positive")
    return 2.0 * np.pi / table.thetas


def critical_dimension(pretrain_len: float, d: int, base: float) -> int:
    """Number of leading dimensions whose chunks complete a full rotation.

    Evaluates ``2 * ceil((d/2) * log_base(pretrain_len / (2 pi)))`` and clamps
    the result into ``[0, d]`` so it remains a meaningful dimension count.
    The value is always even and equals twice the number of chunks whose
    period fits inside ``pretrain_len``.

    Parameters
    ----------
    pretrain_len : float
        Context length seen during pretraining (>= 1).
    d : int
        Head dimension (even, >= 2).
    base : float
        Base frequency (> 1).
    """
    if not pretrain_len >= 1:
        raise ValueError(f"pretrain_len must be >= 1, got {pretrain_len}")
    if d < 2 or d % 2:
        raise ValueError(f"head dimension must be a positive even integer, got {d}")
    if not base > 1.0:
        raise ValueError(f"base frequency must exceed 1, got {base}")
    raw = 2 * math.ceil((d / 2) * math.log(pretrain_len / (2.0 * math.pi), base))
    return int(min(max(raw, 0), d))


def load_scale_file(path: str | Path, expected: int) -> np.ndarray:
    """Read per-frequency scale factors: one decimal per line, ``#`` comments.

    The file must contain exactly ``expected`` values after comment and
    blank-line removal; anything else is a format error.
    """
    path = Path(path)
    values: list[float] = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read scale table {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            values.append(float(body))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a decimal value: {body!r}") from None
    if len(values) != expected:
        raise ValueError(f"{path}: expected {expected} scale factors, found {len(values)}")
    return np.asarray(values, dtype=np.float64)


def scaling_factors(policy: ScalingPolicy, table: FreqTable) -> np.ndarray:
    """Per-frequency scale factors ``s_i`` for the policy's method.

    ``none`` yields all ones; ``pi`` the uniform ratio ``target/pretrain``;
    ``ntk`` the graded ``ratio ** (2 i / (d - 2))``; ``yarn`` a three-band
    profile keyed on the rotation count ``pretrain_len * theta_i / (2 pi)``
    (no scaling above ``yarn_beta`` rotations, full uniform scaling below
    ``yarn_alpha``, and a linear ramp of the inverse scale between); and
    ``table`` reads the factors verbatim from ``policy.table_path``.
    """
    half = table.n_chunks
    method = policy.method
    ratio = policy.ratio
    if method == "none":
        return np.ones(half)
    if method == "pi":
        return np.full(half, ratio)
    if method == "ntk":
        if table.d == 2:
            raise ValueError("ntk scaling is undefined for d = 2")
        return ratio ** (2.0 * np.arange(half) / (table.d - 2))
    if method == "yarn":
        rotations = policy.pretrain_len * table.thetas / (2.0 * np.pi)
        gamma = np.clip((rotations - policy.yarn_alpha) / (policy.yarn_beta - policy.yarn_alpha), 0.0, 1.0)
        return 1.0 / ((1.0 - gamma) / ratio + gamma)
    return load_scale_file(policy.table_path, half)


def scale_table(table: FreqTable, policy: ScalingPolicy) -> FreqTable:
    """Apply ``theta_i' = theta_i / s_i`` componentwise.

    The result keeps ``d`` and ``base`` but is marked as no longer generated
    from its base whenever any factor differs from 1, which disables
    :func:`rebase` on it.
    """
    factors = scaling_factors(policy, table)
    if np.any(factors <= 0.0):
        raise ValueError("scale factors must be strictly positive")
    if np.all(factors == 1.0):
        return table
    return FreqTable(d=table.d, base=table.base, thetas=table.thetas / factors, from_base=False)


def rebase(table: FreqTable, new_base: float) -> FreqTable:
    """Regenerate the table from ``new_base``, e.g. for base-frequency raising.

    Only valid on tables still generated from a base; a rescaled table no
    longer encodes one schedule and cannot be rebased.
    """
    if not table.from_base:
        raise ValueError("cannot rebase a table whose frequencies were rescaled")
    return build_freq_table(table.d, new_base)


def soft_weight(theta, theta_start: float, theta_min: float):
    """Cosine-decay taper ``w(theta)``.

    Returns 1 for ``theta >= theta_start``, the half-cosine
    ``(1 + cos(pi (theta_start - theta) / (theta_start - theta_min))) / 2``
    on ``[theta_min, theta_start)``, and continues as 0 below ``theta_min``.
    The taper is continuous: 1 at the onset, exactly 0 at ``theta_min``.
    """
    th = np.asarray(theta, dtype=np.float64)
    scalar = th.ndim == 0
    th = np.atleast_1d(th)
    w = np.zeros_like(th)
    w[th >= theta_start] = 1.0
    ramp = (th < theta_start) & (th >= theta_min)
    if np.any(ramp):
        # theta_start > theta_min is guaranteed when the ramp mask is non-empty
        frac = (theta_start - th[ramp]) / (theta_start - theta_min)
        w[ramp] = 0.5 * (1.0 + np.cos(np.pi * frac))
    return float(w[0]) if scalar else w


def clip_window(table: FreqTable, mode: str, onset_index: int) -> ClipWindow:
    """Build a per-frequency clip window on a strictly decreasing table.

    ``onset_index`` is the chunk index where attenuation begins; the onset
    frequency is always derived from the table.  ``onset_index == d/2``
    leaves everything untouched in every mode.  Hard mode zeroes the weights
    from the onset on; soft mode applies :func:`soft_weight` with the onset
    frequency and the table's lowest frequency.
    """
    if mode not in CLIP_MODES:
        raise ValueError(f"unknown clip mode {mode!r}; expected one of {CLIP_MODES}")
    half = table.n_chunks
    if not isinstance(onset_index, (int, np.integer)):
        raise ValueError(f"onset_index must be an integer, got {type(onset_index).__name__}")
    if not 0 <= onset_index <= half:
        raise ValueError(f"onset_index {onset_index} out of range [0, {half}]")
    if np.any(np.diff(table.thetas) >= 0.0):
        raise ValueError("clip windows are defined on strictly decreasing spectra")
    theta_min = float(table.thetas[-1])
    if onset_index == half:
        return ClipWindow(mode, int(onset_index), math.inf, theta_min, np.ones(half))
    theta_start = float(table.thetas[onset_index])
    if mode == "none":
        weights = np.ones(half)
    elif mode == "hard":
        weights = (np.arange(half) < onset_index).astype(np.float64)
    else:
        weights = soft_weight(table.thetas, theta_start, theta_min)
    return ClipWindow(mode, int(onset_index), theta_start, theta_min, weights)
