"""Frame records, energy series, curve snapshots, and report figures.

Frames go to JSON Lines with 17-significant-digit floats so a reload
reproduces every control point bit for bit; the energy series goes to CSV.
Per-frame SVG snapshots are written by a deterministic hand-rolled emitter
(identical frame and canvas give identical bytes).  The report path renders
matplotlib figures (energy, control-point count, curve evolution) next to
the delimited output.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bspline import ClosedBSplineCurve, curve_samples, make_uniform_periodic_knots
from .scheme import FlowState

__all__ = [
    "frame_record",
    "control_polygon_record",
    "curve_from_polygon_record",
    "emit_frames",
    "load_frames",
    "emit_energy_csv",
    "curve_from_record",
    "CanvasConfig",
    "frame_viewport",
    "render_svg",
    "render_report",
]


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def frame_record(frame) -> dict:
    """Normalize a FlowState (or an already-loaded record) to the wire schema."""
    if isinstance(frame, dict):
        return frame
    return {
        "n": frame.n,
        "t": frame.t,
        "dt": frame.dt,
        "N": frame.N,
        "energy": frame.energy,
        "dissipation_lhs": frame.dissipation_lhs,
        "dissipation_rhs": frame.dissipation_rhs,
        "turning_number": frame.turning_number,
        "control_points": [[float(x), float(y)] for x, y in frame.control_points],
    }


def _frame_line(rec: dict) -> str:
    cps = ",".join(f"[{_g17(x)},{_g17(y)}]" for x, y in rec["control_points"])
    return (
        "{"
        f'"n":{int(rec["n"])},'
        f'"t":{_g17(rec["t"])},'
        f'"dt":{_g17(rec["dt"])},'
        f'"N":{int(rec["N"])},'
        f'"energy":{_g17(rec["energy"])},'
        f'"dissipation_lhs":{_g17(rec["dissipation_lhs"])},'
        f'"dissipation_rhs":{_g17(rec["dissipation_rhs"])},'
        f'"turning_number":{int(rec["turning_number"])},'
        f'"control_points":[{cps}]'
        "}"
    )


def emit_frames(frames, path: str) -> None:
    """Write one self-contained JSON record per line, one line per frame."""
    try:
        with open(path, "w", encoding="ascii") as fh:
            for frame in frames:
                fh.write(_frame_line(frame_record(frame)))
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write frames to {path!r}: {exc}") from exc


def load_frames(path: str) -> list:
    """Reload emitted frame records (list of dicts)."""
    import json

    records = []
    try:
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    except OSError as exc:
        raise OSError(f"cannot read frames from {path!r}: {exc}") from exc
    return records


def emit_energy_csv(frames, path: str) -> None:
    """Write the per-frame energy series: header n,t,dt,N,energy then rows."""
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("n,t,dt,N,energy\n")
            for frame in frames:
                rec = frame_record(frame)
                fh.write(
                    f'{int(rec["n"])},{_g17(rec["t"])},{_g17(rec["dt"])},'
                    f'{int(rec["N"])},{_g17(rec["energy"])}\n'
                )
    except OSError as exc:
        raise OSError(f"cannot write energy series to {path!r}: {exc}") from exc


def curve_from_record(rec: dict, degree: int = 3) -> ClosedBSplineCurve:
    """Rebuild the curve of a loaded frame record (degree is not stored)."""
    knots = make_uniform_periodic_knots(0.0, 1.0, degree, int(rec["N"]))
    return ClosedBSplineCurve(knots, np.asarray(rec["control_points"], dtype=float))


def control_polygon_record(curve: ClosedBSplineCurve) -> dict:
    """Self-contained serialization of a curve: {p, N, a, b, points}."""
    k = curve.knots
    return {
        "p": k.p,
        "N": k.N,
        "a": k.a,
        "b": k.b,
        "points": [[float(x), float(y)] for x, y in curve.control_points],
    }


def curve_from_polygon_record(rec: dict) -> ClosedBSplineCurve:
    """Inverse of control_polygon_record."""
    knots = make_uniform_periodic_knots(
        float(rec["a"]), float(rec["b"]), int(rec["p"]), int(rec["N"])
    )
    return ClosedBSplineCurve(knots, np.asarray(rec["points"], dtype=float))


@dataclass(frozen=True)
class CanvasConfig:
    width: int = 640
    samples_per_span: int = 64
    markers: bool = True
    stroke: str = "#20609f"
    marker_fill: str = "#c23b22"
    viewport: Optional[tuple] = None  # (xmin, xmax, ymin, ymax); frame bbox if None


def frame_viewport(frame, degree: int = 3, margin: float = 0.1) -> tuple:
    """Bounding box of a frame's curve, padded by the given relative margin.

    Computed from the initial frame it makes all later snapshots comparable.
    """
    curve = frame.curve if isinstance(frame, FlowState) else curve_from_record(frame, degree)
    pts = curve_samples(curve, 64 * curve.N)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    pad = margin * max(hi[0] - lo[0], hi[1] - lo[1])
    return (lo[0] - pad, hi[0] + pad, lo[1] - pad, hi[1] + pad)


def render_svg(frame, canvas: CanvasConfig = CanvasConfig(), degree: int = 3) -> str:
    """Deterministic SVG snapshot of one frame's curve.

    The polyline samples the curve at samples_per_span * N parameters
    (at least 64 per span) and closes on itself; control points become
    circle markers when enabled.  The view box is the configured viewport,
    or the frame's own padded bounding box.
    """
    curve = frame.curve if isinstance(frame, FlowState) else curve_from_record(frame, degree)
    per_span = max(64, canvas.samples_per_span)
    pts = curve_samples(curve, per_span * curve.N)

    xmin, xmax, ymin, ymax = canvas.viewport or frame_viewport(frame, degree)
    w = xmax - xmin
    h = ymax - ymin
    height = max(1, int(round(canvas.width * h / w)))
    # SVG y grows downward; flip about the viewport midline when emitting.
    def fy(y):
        return ymin + ymax - y

    stroke_w = 0.004 * max(w, h)
    path = "M" + " L".join(f"{x:.6g},{fy(y):.6g}" for x, y in pts) + " Z"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas.width}" height="{height}" '
        f'viewBox="{xmin:.6g} {ymin:.6g} {w:.6g} {h:.6g}">',
        f'<path d="{path}" fill="none" stroke="{canvas.stroke}" '
        f'stroke-width="{stroke_w:.6g}" stroke-linejoin="round"/>',
    ]
    if canvas.markers:
        r = 1.5 * stroke_w
        for x, y in curve.control_points:
            parts.append(
                f'<circle cx="{x:.6g}" cy="{fy(y):.6g}" r="{r:.6g}" '
                f'fill="{canvas.marker_fill}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_report(frames, out_dir: str, degree: int = 3, overlays: int = 8) -> list:
    """Render the matplotlib report figures for a run into out_dir.

    Writes energy.png (energy vs. time), evolution.png (overlaid curve
    snapshots), and control_points.png when the control-point count varies.
    Returns the list of written paths.
    """
    records = [frame_record(f) for f in frames]
    os.makedirs(out_dir, exist_ok=True)
    written = []

    t = np.array([rec["t"] for rec in records])
    E = np.array([rec["energy"] for rec in records])
    Ns = np.array([rec["N"] for rec in records])

    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.plot(t, E, lw=1.4)
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    path = os.path.join(out_dir, "energy.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    if len(records) > 1:
        picks = np.unique(np.linspace(0, len(records) - 1, overlays).astype(int))
        fig, ax = plt.subplots(figsize=(4.6, 4.6))
        for rank, idx in enumerate(picks):
            curve = curve_from_record(records[idx], degree)
            pts = curve_samples(curve, 64 * curve.N)
            pts = np.vstack((pts, pts[:1]))
            shade = 0.15 + 0.75 * rank / max(1, len(picks) - 1)
            ax.plot(pts[:, 0], pts[:, 1], color=(0.1, 0.3, 0.6, shade), lw=1.2,
                    label=f"t={records[idx]['t']:.3g}")
        ax.set_aspect("equal")
        ax.legend(fontsize=7, loc="upper right")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, "evolution.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    if Ns.max() != Ns.min():
        fig, ax = plt.subplots(figsize=(5.2, 3.0))
        ax.step(t, Ns, where="post")
        ax.set_xlabel("t")
        ax.set_ylabel("control points")
        ax.grid(True, alpha=0.4)
        fig.tight_layout()
        path = os.path.join(out_dir, "control_points.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    return written
