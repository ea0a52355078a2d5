#!/usr/bin/env python3
"""Render figures from experiment CSV artifacts.

Usage: python3 render.py --spec spec.json

The spec file is JSON with fields:
  input_csv: path to a CSV produced by the experiment runner
  kind:      one of decay | resolvent_heatmap | penrose_trace | lg_budget
  output:    image path to write (format from the extension)
  summary:   optional path to the run's summary.json (decay fit overlay)
  options:   optional {gamma, xscale, yscale, theta0}

Rendering is read-only over inputs and overwrites the output in place.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

REQUIRED_COLUMNS = {
    "decay": ["tau", "abs_rho_1"],
    "resolvent_heatmap": ["tau", "tau_tilde", "value"],
    "penrose_trace": ["k", "omega", "abs_dielectric"],
    "lg_budget": ["x", "w_reference", "w_lg", "budget", "defect"],
}


class SchemaError(ValueError):
    """Input CSV does not match the columns its plot kind requires."""


@dataclass(frozen=True)
class PlotSpec:
    input_csv: Path
    kind: str
    output: Path
    summary: Path | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in REQUIRED_COLUMNS:
            raise SchemaError(
                f"unknown plot kind {self.kind!r}; expected one of "
                + ", ".join(sorted(REQUIRED_COLUMNS)))
        if not self.input_csv.is_file():
            raise SchemaError(f"input CSV not found: {self.input_csv}")

    @classmethod
    def from_json(cls, path: Path) -> "PlotSpec":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        missing = [k for k in ("input_csv", "kind", "output") if k not in raw]
        if missing:
            raise SchemaError("spec missing fields: " + ", ".join(missing))
        base = path.parent
        summary = raw.get("summary")
        return cls(input_csv=base / raw["input_csv"], kind=raw["kind"],
                   output=base / raw["output"],
                   summary=base / summary if summary else None,
                   options=dict(raw.get("options", {})))


def load_columns(path: Path, kind: str) -> dict[str, np.ndarray]:
    """Read the CSV into named float columns, checking the kind's schema."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path} is empty")
        rows = [row for row in reader if row]
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in header]
    if missing:
        raise SchemaError(
            f"{path} lacks columns required for {kind}: " + ", ".join(missing))
    data = np.array(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}


def _bracket(tau):
    return np.sqrt(1.0 + np.asarray(tau) ** 2)


def render_decay(spec: PlotSpec, cols, ax) -> None:
    gamma = float(spec.options.get("gamma", 1.0))
    tau = cols["tau"]
    mag = cols["abs_rho_1"]
    x = _bracket(tau) ** gamma
    pos = mag > 0
    ax.plot(x[pos], np.log(mag[pos]), ".-", lw=0.8, ms=3,
            label=r"$\log|\hat\rho_1|$")
    if spec.summary is not None:
        with open(spec.summary, encoding="utf-8") as f:
            summary = json.load(f)
        fit = summary.get("decay_fit")
        if fit is not None:
            g = fit["gamma_used"]
            lo, hi = fit["window"]
            tw = np.linspace(lo, hi, 200)
            # the fit abscissa is plain tau^gamma; draw it at the same
            # bracket positions used for the data
            ax.plot(_bracket(tw) ** gamma,
                    fit["c0_hat"] - fit["c_hat"] * tw ** g, "r--",
                    label=(rf"fit: $\hat c={fit['c_hat']:.3g}$, "
                           rf"$r^2={fit['r2']:.3g}$"))
    ax.set_xlabel(rf"$\langle\tau\rangle^{{{gamma:g}}}$")
    ax.set_ylabel(r"$\log|\hat\rho_1|$")
    ax.legend(frameon=False)


def render_resolvent_heatmap(spec: PlotSpec, cols, ax) -> None:
    theta0 = float(spec.options.get("theta0", 1.0))
    taus = np.unique(cols["tau"])
    n = len(taus)
    grid = np.full((n, n), np.nan)
    idx = np.searchsorted(taus, cols["tau"])
    jdx = np.searchsorted(taus, cols["tau_tilde"])
    grid[idx, jdx] = cols["value"]
    vmax = np.nanmax(np.abs(grid))
    im = ax.pcolormesh(taus, taus, grid, cmap="RdBu_r",
                       vmin=-vmax, vmax=vmax, shading="nearest")
    plt.colorbar(im, ax=ax, label=r"$R(\tau,\tilde\tau)$")
    # lag-envelope overlay: level sets of C (s + s^2) e^{-theta0 s}
    s = cols["tau"] - cols["tau_tilde"]
    env_shape = (s + s ** 2) * np.exp(-theta0 * s)
    with np.errstate(divide="ignore", invalid="ignore"):
        C = np.nanmax(np.where(env_shape > 0,
                               np.abs(cols["value"]) / env_shape, np.nan))
    TT, T = np.meshgrid(taus, taus)
    S = np.where(T >= TT, T - TT, np.nan)
    env = C * (S + S ** 2) * np.exp(-theta0 * S)
    cs = ax.contour(taus, taus, env, levels=5, colors="k",
                    linewidths=0.6, alpha=0.7)
    ax.clabel(cs, fmt="%.2g", fontsize=6)
    ax.set_xlabel(r"$\tilde\tau$")
    ax.set_ylabel(r"$\tau$")
    ax.set_title(rf"envelope $C(s+s^2)e^{{-\theta_0 s}}$, $C={C:.3g}$",
                 fontsize=9)


def render_penrose_trace(spec: PlotSpec, cols, ax) -> None:
    for k in np.unique(cols["k"]):
        sel = cols["k"] == k
        ax.plot(cols["omega"][sel], cols["abs_dielectric"][sel],
                label=rf"$k={k:g}$")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel(r"$|D(i\omega)|$")
    ax.set_yscale(spec.options.get("yscale", "log"))
    ax.legend(frameon=False)


def render_lg_budget(spec: PlotSpec, cols, ax) -> None:
    x = cols["x"]
    pos = cols["defect"] > 0
    ax.semilogy(x, np.maximum(cols["budget"], 1e-300), label="budget "
                r"$e^{\mathcal{V}}-1$")
    ax.semilogy(x[pos], cols["defect"][pos], ".", ms=3, label="defect")
    ax.set_xlabel(r"$x$")
    ax.set_ylabel("amplitude-normalized deviation")
    ax.legend(frameon=False, loc="lower right")
    inset = ax.inset_axes([0.08, 0.62, 0.5, 0.33])
    inset.plot(x, cols["w_reference"], lw=0.8, label="reference")
    inset.plot(x, cols["w_lg"], lw=0.8, ls="--", label="LG")
    inset.tick_params(labelsize=6)
    inset.legend(frameon=False, fontsize=6)


RENDERERS = {
    "decay": render_decay,
    "resolvent_heatmap": render_resolvent_heatmap,
    "penrose_trace": render_penrose_trace,
    "lg_budget": render_lg_budget,
}


def render(spec: PlotSpec) -> Path:
    cols = load_columns(spec.input_csv, spec.kind)
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=150)
    try:
        if spec.kind not in ("penrose_trace",):
            xs = spec.options.get("xscale")
            ys = spec.options.get("yscale")
            if xs:
                ax.set_xscale(xs)
            if ys:
                ax.set_yscale(ys)
        RENDERERS[spec.kind](spec, cols, ax)
        fig.tight_layout()
        spec.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.output)
    finally:
        plt.close(fig)
    return spec.output


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--spec", required=True, type=Path,
                        help="JSON plot specification")
    args = parser.parse_args(argv)
    try:
        out = render(PlotSpec.from_json(args.spec))
    except (SchemaError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
