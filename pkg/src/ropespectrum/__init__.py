"""Spectral toolkit for rotary position embeddings.

Frequency schedules and their periods, context-extension scaling policies,
per-frequency clipping windows, rotation and inverse-NUDFT score kernels,
Monte Carlo verification of the semantic-gap identity, spectral-leakage
analysis, and desk-scale study drivers with a CSV/SVG command-line front
end.
"""

from .curves import CurveSeries
from .experiments import (
    ReportTable,
    RetrievalConfig,
    decay_report,
    period_report,
    retrieval_sim,
    ringing_study,
    spectrum_report,
    window_label,
)
from .freq_schedule import (
    ClipWindow,
    FreqTable,
    ScalingPolicy,
    build_freq_table,
    clip_window,
    critical_dimension,
    load_scale_file,
    periods,
    rebase,
    scale_table,
    scaling_factors,
    soft_weight,
)
from .rotary_kernel import (
    apply_taper,
    attention_score,
    nudft_score,
    rotate,
    score_batch,
    score_series,
)
from .spectral_analysis import (
    GapEstimate,
    LeakageProfile,
    decay_curve,
    envelope_decay_exponent,
    flat_spectrum_signal,
    leakage_error,
    semantic_gap_analytic,
    semantic_gap_montecarlo,
    sinc_kernel,
    soft_complement_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "ClipWindow",
    "CurveSeries",
    "FreqTable",
    "GapEstimate",
    "LeakageProfile",
    "ReportTable",
    "RetrievalConfig",
    "ScalingPolicy",
    "__version__",
    "apply_taper",
    "attention_score",
    "build_freq_table",
    "clip_window",
    "critical_dimension",
    "decay_curve",
    "decay_report",
    "envelope_decay_exponent",
    "flat_spectrum_signal",
    "leakage_error",
    "load_scale_file",
    "nudft_score",
    "period_report",
    "periods",
    "rebase",
    "retrieval_sim",
    "ringing_study",
    "rotate",
    "scale_table",
    "scaling_factors",
    "score_batch",
    "score_series",
    "semantic_gap_analytic",
    "semantic_gap_montecarlo",
    "sinc_kernel",
    "soft_complement_kernel",
    "soft_weight",
    "spectrum_report",
    "window_label",
]
