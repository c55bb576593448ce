"""Report figures rendered alongside the delimited output.

Three views: relative errors against their tolerances per suite, the
equivalence-norm ratios across the corpus, and the appendix anchor
diagnostics (volume ratios and lift isometry errors).
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

_SUITE_COLORS = {
    "identities": "tab:blue",
    "reproducing": "tab:orange",
    "reconstruction": "tab:green",
    "uniqueness": "tab:red",
    "equivalence": "tab:purple",
    "appendix": "tab:brown",
}


def _finite_log(value, floor=1e-17):
    try:
        v = float(value)
    except (TypeError, ValueError):
        return None
    if not math.isfinite(v):
        return None
    return math.log10(max(abs(v), floor))


def render_report_figures(reports, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    written += _error_figure(reports, out_dir)
    written += _equivalence_figure(reports, out_dir)
    written += _appendix_figure(reports, out_dir)
    plt.close("all")
    return written


def _error_figure(reports, out_dir):
    rows = [
        r for r in reports
        if r.rel_error is not None and r.tolerance not in (None, 0)
    ]
    if not rows:
        return []
    rows.sort(key=lambda r: (r.suite, r.check_id))
    fig, ax = plt.subplots(figsize=(10, max(3.0, 0.22 * len(rows))))
    ys = range(len(rows))
    errs = [_finite_log(r.rel_error) for r in rows]
    tols = [_finite_log(r.tolerance) for r in rows]
    colors = [_SUITE_COLORS.get(r.suite, "gray") for r in rows]
    ax.scatter(errs, ys, c=colors, s=18, zorder=3, label=None)
    for y, t in zip(ys, tols):
        ax.plot([t, t], [y - 0.35, y + 0.35], color="black", lw=1.0, zorder=2)
    ax.set_yticks(list(ys))
    ax.set_yticklabels([r.check_id for r in rows], fontsize=6)
    ax.set_xlabel("log10 relative error (dot) vs tolerance (bar)")
    ax.set_title("closed form vs quadrature: errors against tolerances")
    ax.invert_yaxis()
    ax.grid(axis="x", alpha=0.3)
    fig.tight_layout()
    path = os.path.join(out_dir, "errors.png")
    fig.savefig(path, dpi=150)
    return [path]


def _equivalence_figure(reports, out_dir):
    rows = [
        r for r in reports
        if r.suite == "equivalence" and isinstance(r.details, dict)
        and "ratios" in r.details
    ]
    if not rows:
        return []
    fig, ax = plt.subplots(figsize=(9, 4.5))
    labels = []
    for i, r in enumerate(rows):
        ratios = r.details["ratios"]
        labels.append(r.check_id.replace("norm-equivalence", ""))
        for j, (name, marker) in enumerate(
            (("vertical_over_f", "o"), ("sum_over_f", "s"), ("sum_over_vertical", "^"))
        ):
            val = ratios.get(name)
            if val is None:
                continue
            ax.scatter(i, val, marker=marker, color=f"C{j}",
                       label=name if i == 0 else None)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=6)
    ax.set_ylabel("norm ratio")
    ax.set_title("derivative-norm equivalence: empirical ratios")
    ax.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = os.path.join(out_dir, "equivalence_ratios.png")
    fig.savefig(path, dpi=150)
    return [path]


def _appendix_figure(reports, out_dir):
    vol = [r for r in reports if r.check_id.startswith("volume-ratio")]
    lifts = [
        r for r in reports
        if r.check_id.startswith("lift-isometry") and "rel_error" in (r.details or {})
    ]
    if not vol and not lifts:
        return []
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.6))
    if vol:
        axes[0].axhline(0.25, color="gray", ls="--", lw=0.8, label="exact 1/4")
        axes[0].scatter(range(len(vol)), [float(r.computed.real if isinstance(r.computed, complex) else r.computed) for r in vol], color="tab:brown")
        axes[0].set_xticks(range(len(vol)))
        axes[0].set_xticklabels([r.check_id for r in vol], rotation=45,
                                ha="right", fontsize=6)
        axes[0].set_title("ball-to-halfspace volume ratios")
        axes[0].legend(fontsize=7)
    if lifts:
        axes[1].scatter(
            range(len(lifts)),
            [_finite_log(r.details["rel_error"]) for r in lifts],
            color="tab:cyan",
        )
        axes[1].set_xticks(range(len(lifts)))
        axes[1].set_xticklabels([r.check_id for r in lifts], rotation=45,
                                ha="right", fontsize=6)
        axes[1].set_title("lift isometry: log10 relative error")
    fig.tight_layout()
    path = os.path.join(out_dir, "appendix.png")
    fig.savefig(path, dpi=150)
    return [path]
