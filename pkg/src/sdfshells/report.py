"""CSV reports with companion figures for the CLI harnesses.

Every report writes a delimited file for machines and a rendered figure for
humans, side by side in the output directory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


@dataclass
class CheckResult:
    """Outcome of one validation check."""

    name: str
    passed: bool
    value: float
    detail: str

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def bench_report(out_dir, ks, results) -> tuple:
    """bench.csv plus a frame-time / throughput figure over the k sweep."""
    out = Path(out_dir)
    rows = [(k, f"{r.frame_ms:.3f}", f"{r.rays_per_s:.1f}", r.rays, r.frames)
            for k, r in zip(ks, results)]
    csv_path = write_csv(out / "bench.csv",
                         ["k", "frame_ms", "rays_per_s", "rays", "frames"],
                         rows)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    frame_ms = [r.frame_ms for r in results]
    ax.plot(ks, frame_ms, marker="o", color="tab:blue", label="frame time")
    ax.set_xlabel("shell count k")
    ax.set_ylabel("frame time (ms)", color="tab:blue")
    ax.set_xticks(list(ks))
    ax.grid(True, alpha=0.3)
    twin = ax.twinx()
    rays = [r.rays_per_s / 1e6 for r in results]
    twin.plot(ks, rays, marker="s", color="tab:orange", label="throughput")
    twin.set_ylabel("rays per second (millions)", color="tab:orange")
    ax.set_title("Fixed-order shell render cost vs layer count")
    fig.tight_layout()
    fig_path = out / "bench.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return csv_path, fig_path


def validate_report(out_dir, checks) -> tuple:
    """validate.csv plus a pass/fail margin chart."""
    out = Path(out_dir)
    rows = [(c.name, c.status, f"{c.value:.6g}", c.detail) for c in checks]
    csv_path = write_csv(out / "validate.csv",
                         ["check", "status", "value", "detail"], rows)
    fig, ax = plt.subplots(figsize=(6.5, 0.7 * max(len(checks), 2) + 1.2))
    names = [c.name for c in checks]
    values = [1.0 if c.passed else 0.0 for c in checks]
    colors = ["tab:green" if c.passed else "tab:red" for c in checks]
    bars = ax.barh(names, values, color=colors, height=0.6)
    for bar, c in zip(bars, checks):
        ax.text(0.02, bar.get_y() + bar.get_height() / 2.0,
                f"{c.status}: {c.detail}", va="center", fontsize=8,
                color="white" if c.passed else "black")
    ax.set_xlim(0.0, 1.0)
    ax.set_xticks([])
    ax.invert_yaxis()
    ax.set_title("Validation checks")
    fig.tight_layout()
    fig_path = out / "validate.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return csv_path, fig_path


def convergence_report(out_dir, betas, maes, threshold) -> tuple:
    """convergence.csv plus error-vs-sharpness figure against the bound."""
    out = Path(out_dir)
    rows = [(f"{b:.1f}", f"{m:.8f}", f"{m * 255.0:.4f}")
            for b, m in zip(betas, maes)]
    csv_path = write_csv(out / "convergence.csv",
                         ["beta", "mae", "mae_8bit"], rows)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogx(betas, [m * 255.0 for m in maes], marker="o",
                color="tab:blue", label="shells vs volumetric")
    ax.axhline(threshold * 255.0, color="tab:red", linestyle="--",
               label=f"bound {threshold * 255.0:.1f}/255")
    ax.set_xlabel("density sharpness beta")
    ax.set_ylabel("mean absolute pixel error (/255)")
    ax.set_title("Fixed-order shell render converges to the volume render")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig_path = out / "convergence.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return csv_path, fig_path
