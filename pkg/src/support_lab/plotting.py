"""Figures written next to delimited reports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .density import DensityReport  # noqa: E402
from .rigidity_sl2 import CensusTable  # noqa: E402
from .support import DivisibilityReport  # noqa: E402

# Fixed metadata keeps PNG bytes reproducible across runs.
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def _figure(width=7.0, height=None):
    golden = (math.sqrt(5) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, height or width * golden))
    ax.grid(True, alpha=0.3, linewidth=0.6)
    return fig, ax


def plot_scan(report: DivisibilityReport, path):
    fig, ax = _figure()
    ps = [r.p for r in report.rows]
    ax.scatter(ps, [r.ord_P / r.p for r in report.rows], s=4, label="ord P / p", color="tab:blue")
    ax.scatter(ps, [r.ord_Q / r.p for r in report.rows], s=4, label="ord Q / p", color="tab:orange", alpha=0.6)
    bad = [r for r in report.rows if not r.divides]
    if bad:
        ax.scatter([r.p for r in bad], [r.ord_Q / r.p for r in bad], s=18, marker="x",
                   color="tab:red", label=f"violations ({len(bad)})")
    ax.set_xlabel("p")
    ax.set_ylabel("order / p")
    ax.set_title(f"{report.kind}: {report.usable} usable primes <= {report.bound}")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_density(report: DensityReport, path):
    fig, ax = _figure()
    pts = [t for t in report.trace if t.density is not None]
    xs = [t.checkpoint for t in pts]
    ax.plot(xs, [float(t.density) for t in pts], marker="o", label=f"{report.ell} | ord")
    ax.plot(xs, [1 - float(t.density) for t in pts], marker="s", label=f"{report.ell} does not divide ord")
    ax.set_ylim(0, 1)
    ax.set_xlabel("prime bound")
    ax.set_ylabel("fraction of usable primes")
    ax.set_title(f"l = {report.ell}, {report.usable} usable primes")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_census(table: CensusTable, path):
    fig, ax = _figure()
    qs = sorted({q for q, _, _ in table.rows})
    for q in qs:
        rows = [(n, c) for qq, n, c in table.rows if qq == q]
        ax.plot([n for n, _ in rows], [c for _, c in rows], marker="o", linestyle=":", label=f"SL2(F_{q})")
    ax.set_xscale("log")
    ax.set_xlabel("element order")
    ax.set_ylabel("number of elements")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def _save(fig, path):
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def render_figure(report, path):
    """Figure for reports that have one; returns the path written or None."""
    if isinstance(report, DivisibilityReport):
        return plot_scan(report, path)
    if isinstance(report, DensityReport):
        return plot_density(report, path)
    if isinstance(report, CensusTable):
        return plot_census(report, path)
    return None
