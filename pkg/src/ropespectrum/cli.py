"""Command-line front end.

Each subcommand builds the configured tables and windows, runs the matching
study, and writes a CSV whose ``#`` header block echoes the full
configuration, so identical invocations produce byte-identical files.  With
``--plot`` a static SVG rendering is written next to the CSV.

Exit codes: 0 on success, 2 for usage errors, 1 for runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .experiments import (
    CLIP_ORDERS,
    ReportTable,
    RetrievalConfig,
    decay_report,
    period_report,
    retrieval_sim,
    ringing_study,
    spectrum_report,
)
from .freq_schedule import (
    CLIP_MODES,
    ScalingPolicy,
    build_freq_table,
    clip_window,
    critical_dimension,
    scale_table,
    scaling_factors,
)
from .spectral_analysis import semantic_gap_montecarlo

__all__ = ["build_parser", "emit_csv", "main", "read_csv", "run"]

_SUBCOMMANDS = ("freqs", "critdim", "scale", "decay", "gap", "ringing", "retrieval", "spectrum")

# Documented defaults: head geometry and clipping onset of the reference
# long-context recipe (base raised to 1e7, onset 44, 4x extension target).
_DEFAULT_D = 128
_DEFAULT_BASE = 1.0e7
_DEFAULT_PRETRAIN = 65536
_DEFAULT_ONSET = 44
_DEFAULT_TARGET_MULT = 4
_DEFAULT_DISTANCES = "8192,16384,32768,65536,131072,262144"


def _format_value(value) -> str:
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_format_value(v) for v in value)
    return str(value)


def emit_csv(table: ReportTable, path: str | Path) -> Path:
    """Write a report as CSV: ``#`` metadata block, header row, data rows.

    Floats are serialized with their shortest round-trip representation, so
    reading the file back reproduces the values exactly.
    """
    path = Path(path)
    lines = [f"# {key} = {_format_value(value)}" for key, value in table.metadata.items()]
    lines.append(",".join(table.columns.keys()))
    for row in zip(*table.columns.values()):
        lines.append(",".join(_format_value(v) for v in row))
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _parse_cell(cell: str):
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path: str | Path) -> ReportTable:
    """Parse a file written by :func:`emit_csv` back into a report."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    metadata: dict[str, object] = {}
    body: list[str] = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            metadata[key.strip()] = value.strip()
        elif line:
            body.append(line)
    if not body:
        raise ValueError(f"{path}: no header row")
    names = body[0].split(",")
    columns: dict[str, list] = {name: [] for name in names}
    for line in body[1:]:
        cells = line.split(",")
        if len(cells) != len(names):
            raise ValueError(f"{path}: ragged row: {line!r}")
        for name, cell in zip(names, cells):
            columns[name].append(_parse_cell(cell))
    return ReportTable(columns=columns, metadata=metadata)


def _policy_from_args(args) -> ScalingPolicy | None:
    if args.method == "none":
        return None
    target = args.target_len if args.target_len is not None else _DEFAULT_TARGET_MULT * args.pretrain_len
    return ScalingPolicy(
        method=args.method,
        pretrain_len=args.pretrain_len,
        target_len=target,
        yarn_alpha=args.yarn_alpha,
        yarn_beta=args.yarn_beta,
        table_path=args.scale_file,
    )


def _run_setup(args):
    """Base table, evaluation table after scaling, and the clip window."""
    base_table = build_freq_table(args.d, args.base)
    policy = _policy_from_args(args)
    scaled = scale_table(base_table, policy) if policy is not None else base_table
    source = base_table if args.clip_order == "clip-then-scale" else scaled
    window = clip_window(source, args.clip_mode, args.onset)
    return base_table, scaled, window, policy


def _common_metadata(args, command: str) -> dict[str, object]:
    meta: dict[str, object] = {"command": command, "d": args.d, "base": args.base}
    for name in (
        "pretrain_len",
        "target_len",
        "method",
        "yarn_alpha",
        "yarn_beta",
        "scale_file",
        "clip_mode",
        "onset",
        "clip_order",
        "tau_max",
        "tau_step",
        "tau",
        "sigma",
        "mu",
        "sigma_eps",
        "n_samples",
        "n_shards",
        "n_trials",
        "n_distractors",
        "distances",
        "seed",
    ):
        if hasattr(args, name):
            meta[name] = getattr(args, name)
    return meta


def _maybe_plot(args, draw, out_path: Path) -> Path | None:
    if not getattr(args, "plot", False):
        return None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig = draw(plt)
    svg = out_path.with_suffix(".svg")
    fig.savefig(svg, format="svg")
    plt.close(fig)
    return svg


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_freqs(args) -> None:
    table = build_freq_table(args.d, args.base)
    report = period_report(table, args.pretrain_len)
    report.metadata = {**_common_metadata(args, "freqs"), **report.metadata}
    out = emit_csv(report, args.out)

    def draw(plt):
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.semilogy(report.column("chunk_index"), report.column("period"), marker="o", ms=3)
        ax.axhline(args.pretrain_len, color="crimson", ls="--", label="pretrain length")
        ax.set_xlabel("chunk index")
        ax.set_ylabel("rotation period")
        ax.legend()
        fig.tight_layout()
        return fig

    _maybe_plot(args, draw, out)
    n_ood = sum(report.column("ood_flag"))
    print(f"wrote {report.n_rows} frequencies ({n_ood} beyond the pretrain window) to {out}")


def _cmd_critdim(args) -> None:
    value = critical_dimension(args.pretrain_len, args.d, args.base)
    print(value)
    if args.out is not None:
        report = ReportTable(
            columns={
                "pretrain_len": [args.pretrain_len],
                "d": [args.d],
                "base": [args.base],
                "critical_dimension": [value],
            },
            metadata=_common_metadata(args, "critdim"),
        )
        emit_csv(report, args.out)


def _cmd_scale(args) -> None:
    table = build_freq_table(args.d, args.base)
    policy = _policy_from_args(args)
    if policy is None:
        factors = np.ones(table.n_chunks)
        scaled = table
    else:
        factors = scaling_factors(policy, table)
        scaled = scale_table(table, policy)
    report = ReportTable(
        columns={
            "chunk_index": list(range(table.n_chunks)),
            "theta": [float(t) for t in table.thetas],
            "scale_factor": [float(s) for s in factors],
            "theta_scaled": [float(t) for t in scaled.thetas],
        },
        metadata=_common_metadata(args, "scale"),
    )
    out = emit_csv(report, args.out)

    def draw(plt):
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.semilogy(report.column("chunk_index"), report.column("theta"), label="theta")
        ax.semilogy(report.column("chunk_index"), report.column("theta_scaled"), label="theta scaled")
        ax.set_xlabel("chunk index")
        ax.set_ylabel("frequency")
        ax.legend()
        fig.tight_layout()
        return fig

    _maybe_plot(args, draw, out)
    print(f"wrote {args.method} scaling for {report.n_rows} chunks to {out}")


def _cmd_decay(args) -> None:
    _, eval_table, window, _ = _run_setup(args)
    taus = np.arange(0.0, args.tau_max + args.tau_step / 2, args.tau_step)
    windows = [clip_window(eval_table, "none", eval_table.n_chunks)]
    if window.mode != "none":
        windows.append(window)
    report = decay_report(eval_table, windows, taus)
    report.metadata = {**_common_metadata(args, "decay"), **report.metadata}
    out = emit_csv(report, args.out)

    def draw(plt):
        fig, ax = plt.subplots(figsize=(7, 4))
        for name in report.columns:
            if name.endswith("_normalized"):
                ax.plot(report.column("tau"), report.column(name), label=name, lw=0.8)
        ax.set_xlabel("relative distance")
        ax.set_ylabel("normalized weighted cosine sum")
        ax.legend()
        fig.tight_layout()
        return fig

    _maybe_plot(args, draw, out)
    print(f"wrote decay curves ({report.n_rows} points, {len(windows)} windows) to {out}")


def _cmd_gap(args) -> None:
    _, eval_table, window, _ = _run_setup(args)
    estimate = semantic_gap_montecarlo(
        sigma=args.sigma,
        mu=args.mu,
        sigma_eps=args.sigma_eps,
        table=eval_table,
        window=window,
        tau=args.tau,
        n_samples=args.n_samples,
        seed=args.seed,
        n_shards=args.n_shards,
    )
    z = (estimate.mean - estimate.analytic) / estimate.std_error if estimate.std_error else 0.0
    report = ReportTable(
        columns={
            "tau": [args.tau],
            "empirical_mean": [estimate.mean],
            "std_error": [estimate.std_error],
            "n_samples": [estimate.n_samples],
            "analytic": [estimate.analytic],
            "z_score": [z],
        },
        metadata={**_common_metadata(args, "gap"), "distribution": estimate.distribution},
    )
    out = emit_csv(report, args.out)
    print(
        f"gap at tau={args.tau}: empirical {estimate.mean:.6g} +/- {estimate.std_error:.3g}, "
        f"analytic {estimate.analytic:.6g}, z={z:+.2f}; wrote {out}"
    )


def _cmd_ringing(args) -> None:
    table = build_freq_table(args.d, args.base)
    report = ringing_study(
        table,
        args.onset,
        ring_periods=args.ring_periods,
        fit_periods=args.fit_periods,
        band_mult=args.band_mult,
        samples_per_period=args.samples_per_period,
        panels=args.panels,
    )
    report.metadata = {**_common_metadata(args, "ringing"), **report.metadata}
    out = emit_csv(report, args.out)

    def draw(plt):
        taus = np.asarray(report.column("tau"))
        fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
        axes[0].plot(taus, report.column("error_hard"), lw=0.6, label="hard clip")
        axes[0].set_ylabel("error")
        axes[0].legend()
        axes[1].plot(taus, report.column("error_soft"), lw=0.6, color="darkorange", label="soft clip")
        axes[1].set_xlabel("relative distance")
        axes[1].set_ylabel("error")
        axes[1].legend()
        fig.tight_layout()
        return fig

    _maybe_plot(args, draw, out)
    print(
        "envelope exponents: hard "
        f"{report.metadata['hard_envelope_exponent']:.3f}, soft "
        f"{report.metadata['soft_envelope_exponent']:.3f}; wrote {out}"
    )


def _cmd_retrieval(args) -> None:
    distances = tuple(int(part) for part in args.distances.split(","))
    cfg = RetrievalConfig(
        d=args.d,
        base=args.base,
        distances=distances,
        n_trials=args.n_trials,
        n_distractors=args.n_distractors,
        sigma=args.sigma,
        sigma_eps=args.sigma_eps,
        mu=args.mu,
        seed=args.seed,
        clip_mode=args.clip_mode,
        onset_index=args.onset,
        scaling=_policy_from_args(args),
        clip_order=args.clip_order,
    )
    report = retrieval_sim(cfg)
    report.metadata = {**_common_metadata(args, "retrieval"), **report.metadata}
    out = emit_csv(report, args.out)

    def draw(plt):
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.semilogx(report.column("distance"), report.column("accuracy"), marker="o")
        ax.axhline(1.0 / (1 + args.n_distractors), color="gray", ls=":", label="chance")
        ax.set_xlabel("distance")
        ax.set_ylabel("retrieval accuracy")
        ax.set_ylim(0, 1)
        ax.legend()
        fig.tight_layout()
        return fig

    _maybe_plot(args, draw, out)
    print(f"wrote retrieval accuracies for {report.n_rows} distances to {out}")


def _cmd_spectrum(args) -> None:
    table = build_freq_table(args.d, args.base)
    windows = [
        clip_window(table, "none", table.n_chunks),
        clip_window(table, "hard", args.onset),
        clip_window(table, "soft", args.onset),
    ]
    report = spectrum_report(table, windows)
    report.metadata = {**_common_metadata(args, "spectrum"), **report.metadata}
    out = emit_csv(report, args.out)

    def draw(plt):
        fig, ax = plt.subplots(figsize=(7, 4))
        idx = report.column("chunk_index")
        for name in report.columns:
            if name not in ("chunk_index", "theta"):
                ax.step(idx, report.column(name), where="mid", label=name)
        ax.set_xlabel("chunk index")
        ax.set_ylabel("weight")
        ax.set_ylim(-0.05, 1.05)
        ax.legend()
        fig.tight_layout()
        return fig

    _maybe_plot(args, draw, out)
    print(f"wrote weight spectra for {len(windows)} windows to {out}")


# ---------------------------------------------------------------------------
# parser


def _add_table_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, default=_DEFAULT_D, help="head dimension (even)")
    p.add_argument("--base", type=float, default=_DEFAULT_BASE, help="base frequency")


def _add_scaling_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=("none", "pi", "ntk", "yarn", "table"), default="none")
    p.add_argument("--pretrain-len", type=float, default=_DEFAULT_PRETRAIN, dest="pretrain_len")
    p.add_argument(
        "--target-len",
        type=float,
        default=None,
        dest="target_len",
        help=f"target context length (default: {_DEFAULT_TARGET_MULT} x pretrain length)",
    )
    p.add_argument("--yarn-alpha", type=float, default=1.0, dest="yarn_alpha")
    p.add_argument("--yarn-beta", type=float, default=32.0, dest="yarn_beta")
    p.add_argument("--scale-file", type=Path, default=None, dest="scale_file")


def _add_window_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--clip-mode", choices=CLIP_MODES, default="soft", dest="clip_mode")
    p.add_argument("--onset", type=int, default=_DEFAULT_ONSET, help="clipping onset chunk index")
    p.add_argument("--clip-order", choices=CLIP_ORDERS, default="clip-then-scale", dest="clip_order")


def _add_output_args(p: argparse.ArgumentParser, out_required: bool = True) -> None:
    p.add_argument("--out", type=Path, required=out_required, default=None, help="output CSV path")
    p.add_argument("--plot", action="store_true", help="also write an SVG plot next to the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ropespectrum",
        description="Spectral studies of rotary position embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("freqs", help="frequency table with periods and out-of-window flags")
    _add_table_args(p)
    p.add_argument("--pretrain-len", type=float, default=_DEFAULT_PRETRAIN, dest="pretrain_len")
    _add_output_args(p)
    p.set_defaults(func=_cmd_freqs)

    p = sub.add_parser("critdim", help="critical dimension for a configuration")
    _add_table_args(p)
    p.add_argument("--pretrain-len", type=float, default=_DEFAULT_PRETRAIN, dest="pretrain_len")
    p.add_argument("--out", type=Path, default=None, help="optional output CSV path")
    p.set_defaults(func=_cmd_critdim, plot=False)

    p = sub.add_parser("scale", help="per-frequency scale factors and the rescaled table")
    _add_table_args(p)
    _add_scaling_args(p)
    _add_output_args(p)
    p.set_defaults(func=_cmd_scale)

    p = sub.add_parser("decay", help="weighted cosine-decay curves over distance")
    _add_table_args(p)
    _add_scaling_args(p)
    _add_window_args(p)
    p.add_argument("--tau-max", type=float, default=262144, dest="tau_max")
    p.add_argument("--tau-step", type=float, default=64, dest="tau_step")
    _add_output_args(p)
    p.set_defaults(func=_cmd_decay)

    p = sub.add_parser("gap", help="Monte Carlo check of the similar-key score gap")
    _add_table_args(p)
    _add_scaling_args(p)
    _add_window_args(p)
    p.add_argument("--tau", type=int, default=8192)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma-eps", type=float, default=1.0, dest="sigma_eps")
    p.add_argument("--n-samples", type=int, default=100000, dest="n_samples")
    p.add_argument("--n-shards", type=int, default=1, dest="n_shards")
    p.add_argument("--seed", type=int, default=0)
    _add_output_args(p)
    p.set_defaults(func=_cmd_gap)

    p = sub.add_parser("ringing", help="hard-vs-soft clipping error on a synthetic spectrum")
    _add_table_args(p)
    p.add_argument("--onset", type=int, default=_DEFAULT_ONSET)
    p.add_argument("--ring-periods", type=float, default=22.0, dest="ring_periods")
    p.add_argument("--fit-periods", type=float, default=3.0, dest="fit_periods")
    p.add_argument("--band-mult", type=float, default=64.0, dest="band_mult")
    p.add_argument("--samples-per-period", type=int, default=16, dest="samples_per_period")
    p.add_argument("--panels", type=int, default=2048)
    _add_output_args(p)
    p.set_defaults(func=_cmd_ringing)

    p = sub.add_parser("retrieval", help="similar-key retrieval accuracy across distances")
    _add_table_args(p)
    _add_scaling_args(p)
    _add_window_args(p)
    p.add_argument("--distances", type=str, default=_DEFAULT_DISTANCES)
    p.add_argument("--n-trials", type=int, default=10000, dest="n_trials")
    p.add_argument("--n-distractors", type=int, default=3, dest="n_distractors")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--sigma-eps", type=float, default=1.0, dest="sigma_eps")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_output_args(p)
    p.set_defaults(func=_cmd_retrieval)

    p = sub.add_parser("spectrum", help="weight profiles of the clipping windows")
    _add_table_args(p)
    p.add_argument("--onset", type=int, default=_DEFAULT_ONSET)
    _add_output_args(p)
    p.set_defaults(func=_cmd_spectrum)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, dispatch, and return the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
