"""Human-facing reporting: VR metric mapping and rendered figures.

The scalar QoS index is translated into concrete VR service metrics
(resolution, delay, reliability) by an affine map anchored at QoS 5
corresponding to 720p, 0.15 s delay, and 97% reliability.  Slopes scale the
metric bands onto the QoS span of the menu being reported and are recorded
in the metadata so the mapping is reproducible.  Delay is quoted in seconds
with a clamp band of 0.05 to 0.5 s so the anchor sits inside the band.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .contracts import ContractMenu

ANCHOR_Q = 5.0
ANCHOR = {"resolution": 720.0, "delay": 0.15, "reliability": 97.0}
CLAMP = {"resolution": (240.0, 1080.0), "delay": (0.05, 0.5),
         "reliability": (95.0, 99.0)}


def vr_slopes(q_min: float, q_max: float) -> dict:
    span = max(q_max - q_min, 1e-9)
    return {"resolution": (CLAMP["resolution"][1] - CLAMP["resolution"][0]) / span,
            "delay": -(CLAMP["delay"][1] - CLAMP["delay"][0]) / span,
            "reliability": (CLAMP["reliability"][1] - CLAMP["reliability"][0]) / span}


def vr_metrics(q: np.ndarray, slopes: dict | None = None) -> dict:
    """Affine QoS-to-VR map, clamped to the metric bands."""
    q = np.asarray(q, dtype=float)
    if slopes is None:
        slopes = vr_slopes(float(q.min()), float(q.max()))
    out = {}
    for name in ("resolution", "delay", "reliability"):
        vals = ANCHOR[name] + slopes[name] * (q - ANCHOR_Q)
        out[name] = np.clip(vals, *CLAMP[name])
    return out


def write_report(menu: ContractMenu, out_dir: str | Path,
                 figures: bool = True) -> dict:
    """Write the VR-annotated menu CSV, mapping metadata, and figures.

    Returns the metadata dict.  Artifacts: menu_vr.csv, report.meta.json,
    and PNG figures for the QoS curve, the price curve, and the VR metrics.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    slopes = vr_slopes(float(menu.q.min()), float(menu.q.max()))
    metrics = vr_metrics(menu.q, slopes)

    with open(out / "menu_vr.csv", "w", newline="\n") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["delta", "q", "p", "resolution", "delay", "reliability"])
        for i in range(len(menu.grid)):
            wr.writerow([repr(float(menu.grid[i])), repr(float(menu.q[i])),
                         repr(float(menu.p[i])),
                         repr(float(metrics["resolution"][i])),
                         repr(float(metrics["delay"][i])),
                         repr(float(metrics["reliability"][i]))])

    meta = {"anchor_q": ANCHOR_Q, "anchor": ANCHOR, "clamp": CLAMP,
            "slopes": slopes}
    with open(out / "report.meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)

    if figures:
        for name, ys, ylabel in (
                ("menu_q", menu.q, "QoS index q"),
                ("menu_p", menu.p, "price p")):
            fig, ax = plt.subplots(figsize=(5, 3.5))
            ax.plot(menu.grid, ys)
            ax.set_xlabel("user type delta")
            ax.set_ylabel(ylabel)
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            fig.savefig(out / f"{name}.png", dpi=120)
            plt.close(fig)

        fig, axes = plt.subplots(1, 3, figsize=(10, 3.2))
        for ax, name, ylabel in zip(
                axes, ("resolution", "delay", "reliability"),
                ("resolution (p)", "delay (s)", "reliability (%)")):
            ax.plot(menu.grid, metrics[name])
            ax.set_xlabel("type delta")
            ax.set_ylabel(ylabel)
            ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(out / "vr_metrics.png", dpi=120)
        plt.close(fig)
    return meta
