"""Figure rendering for the CLI report path (PNG files next to the CSVs)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DPI = 150


def domain_map(gf, nds, path) -> None:
    """Field heat map with nodal domain boundaries and label count."""
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    extent = (gf.vs[0], gf.vs[-1], gf.us[0], gf.us[-1])
    im = ax.imshow(gf.f, origin="lower", aspect="auto", cmap="RdBu_r",
                   extent=extent)
    fig.colorbar(im, ax=ax, label="f")
    ax.contour(gf.vs, gf.us, gf.f, levels=[0.0], colors="k", linewidths=0.8)
    ax.set_xlabel("v")
    ax.set_ylabel("u")
    ax.set_title(f"{gf.model.kind}: {len(nds)} nodal domains")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def sweep_plot(sweep, path) -> None:
    """beta(c) steps with Leray and lift lengths on a twin axis."""
    cs = np.array([r.c for r in sweep.records])
    betas = np.array([r.beta for r in sweep.records])
    regular = np.array([r.regular for r in sweep.records])
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    ax.step(cs, betas, where="mid", color="tab:blue", label="beta(c)")
    if np.any(~regular):
        ax.plot(cs[~regular], betas[~regular], ".", color="tab:red",
                markersize=3, label="irregular levels")
    ax.set_xlabel("c")
    ax.set_ylabel("beta", color="tab:blue")
    ax2 = ax.twinx()
    leray = np.array([r.leray if r.regular else np.nan for r in sweep.records])
    ax2.plot(cs, leray, color="tab:green", lw=0.9, label="leray length")
    for k, r in enumerate(sweep.rs):
        L = np.array([rec.sasaki[k] for rec in sweep.records])
        ax2.plot(cs, L, lw=0.9, label=f"L_sasaki r={r:g}")
    ax2.set_ylabel("length")
    lines, labels = ax.get_legend_handles_labels()
    l2, lb2 = ax2.get_legend_handles_labels()
    ax.legend(lines + l2, labels + lb2, fontsize=8, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def scaling_plot(fit, path) -> None:
    """Log-log family values with the fitted and expected slopes."""
    lam = np.array([p[0] for p in fit.family])
    val = np.array([p[1] for p in fit.family])
    fig, ax = plt.subplots(figsize=(6.0, 4.6))
    ax.loglog(lam, val, "o", color="tab:blue", label=fit.quantity)
    xs = np.linspace(math.log(lam.min()), math.log(lam.max()), 50)
    ax.loglog(np.exp(xs), np.exp(fit.intercept + fit.fitted_exponent * xs),
              "-", color="tab:orange",
              label=f"fit slope {fit.fitted_exponent:.3f}")
    anchor = fit.intercept + fit.fitted_exponent * xs[len(xs) // 2] \
        - fit.expected_exponent * xs[len(xs) // 2]
    ax.loglog(np.exp(xs), np.exp(anchor + fit.expected_exponent * xs), "--",
              color="gray", label=f"expected slope {fit.expected_exponent:g}")
    ax.set_xlabel("lambda")
    ax.set_ylabel(fit.quantity)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def ratios_plot(reports, path) -> None:
    """Check ratios against lambda, one series per check name."""
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    names = sorted({r.name for r in reports})
    for name in names:
        sel = [r for r in reports if r.name == name]
        ax.semilogx([r.lam for r in sel], [r.ratio for r in sel], "o-",
                    markersize=4, lw=0.8, label=name)
    ax.set_xlabel("lambda")
    ax.set_ylabel("lhs / rhs scale")
    ax.legend(fontsize=8)
    ax.set_title("inequality ratios")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
