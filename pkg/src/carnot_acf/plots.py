"""Figure rendering for the report commands.

Figures are written next to the delimited output and never feed back into
any computation; the CSV stays the authoritative artifact.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .acf import ACFEvaluation, Estimate, QuarticCoeffs

_FIGSIZE = (6.4, 4.2)


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.set_xlabel("r")
    return fig, ax


def save_phi_figure(
    path: str,
    evaluation: ACFEvaluation,
    quartic: Optional[Sequence[Estimate]] = None,
    coeffs: Optional[QuarticCoeffs] = None,
):
    quartic = quartic if quartic is not None else evaluation.phi_quartic
    fig, ax = _new_axes(f"weighted energy factor on {evaluation.metadata.get('group', '?')}")
    r = np.array(evaluation.r_grid)
    if evaluation.phi is not None:
        vals = np.array([e.value for e in evaluation.phi])
        errs = np.array([e.stderr for e in evaluation.phi])
        ax.errorbar(r, vals, yerr=3 * errs, fmt="o", ms=3.5, capsize=2,
                    label="direct (3 s.e.)", color="tab:blue")
    if quartic is not None:
        qv = np.array([e.value for e in quartic])
        ax.plot(r, qv, "-", color="tab:orange", label="quartic profile")
    if coeffs is not None and np.isfinite(coeffs.r_star.value):
        ax.axvline(coeffs.r_star.value, color="tab:red", ls="--", lw=1,
                   label=f"r* = {coeffs.r_star.value:.3g}")
    ax.set_ylabel("Phi(r)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_jay_figure(path: str, evaluation: ACFEvaluation):
    fig, ax = _new_axes(f"two-phase product on {evaluation.metadata.get('group', '?')}")
    r = np.array(evaluation.r_grid)
    jv = np.array([p.jay.value for p in evaluation.jay])
    je = np.array([p.jay.stderr for p in evaluation.jay])
    ip = np.array([p.i_plus.value for p in evaluation.jay])
    im = np.array([p.i_minus.value for p in evaluation.jay])
    ax.errorbar(r, jv, yerr=3 * je, fmt="o", ms=3.5, capsize=2, color="tab:purple",
                label="J (3 s.e.)")
    ax.plot(r, ip, "s-", ms=3, lw=0.8, color="tab:green", label="I+")
    ax.plot(r, im, "d-", ms=3, lw=0.8, color="tab:olive", label="I-")
    ax.set_ylabel("J(r), I±(r)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_coeffs_figure(path: str, coeffs: QuarticCoeffs, group_name: str):
    fig, ax = _new_axes(f"quartic profile from unit-ball coefficients ({group_name})")
    r_star = coeffs.r_star.value
    r_max = 1.2 * r_star if np.isfinite(r_star) else 1.5
    r = np.linspace(0, r_max, 200)
    phi = coeffs.a0.value - 2 * coeffs.a2.value * r**2 + coeffs.a4.value * r**4
    ax.plot(r, phi, color="tab:orange")
    if np.isfinite(r_star):
        ax.axvline(r_star, color="tab:red", ls="--", lw=1, label=f"r* = {r_star:.3g}")
        ax.legend()
    ax.set_ylabel("a0 - 2 a2 r^2 + a4 r^4")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
