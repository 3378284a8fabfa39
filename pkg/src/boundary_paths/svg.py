"""SVG and CSV export of one block's minimization diagram (t horizontal, s vertical)."""
from __future__ import annotations

import csv

import numpy as np

from .envelope import REGIONS, BlockDiagram, _gamma, _hdiff
from .errors import IoError

WIDTH = 640
HEIGHT = 480
PAD = 40


def _color(i: int) -> str:
    hue = (i * 137.508) % 360.0
    return f"hsl({hue:.1f},65%,70%)"


def boundary_curves(diag: BlockDiagram, s_lo: float, s_hi: float, samples: int = 33):
    """Per slab and per pair of adjacent labels, samples (t, s) of the separating curve."""
    out = []
    for k, labels in enumerate(diag.slabs):
        t0, t1 = float(diag.t_breaks[k]), float(diag.t_breaks[k + 1])
        t = np.linspace(t0, t1, samples)
        for lower, upper in zip(labels[:-1], labels[1:]):
            fi = diag.funcs[lower]
            fj = diag.funcs[upper]
            s = _gamma(fi, fj, t, s_lo, s_hi)
            miss = np.isnan(s)
            if miss.any():
                # no crossing inside: the wall on the losing side bounds the region
                at_lo = _hdiff(fi, fj, np.full(miss.sum(), s_lo), t[miss]) >= 0
                s[miss] = np.where(at_lo, s_lo, s_hi)
            out.append((k, lower, upper, t, s))
    return out


def render_svg(diag: BlockDiagram, s_lo: float, s_hi: float, samples: int = 33) -> tuple[str, list]:
    t0, t1 = float(diag.t_breaks[0]), float(diag.t_breaks[-1])
    sx = (WIDTH - 2 * PAD) / max(t1 - t0, 1e-300)
    sy = (HEIGHT - 2 * PAD) / max(s_hi - s_lo, 1e-300)

    def X(t):
        return PAD + (np.asarray(t) - t0) * sx

    def Y(s):
        return HEIGHT - PAD - (np.asarray(s) - s_lo) * sy

    def pts(xs, ys):
        return " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(xs, ys))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
             f'viewBox="0 0 {WIDTH} {HEIGHT}">',
             f"<title>block {diag.block_id} ({diag.kind})</title>"]
    if diag.kind != REGIONS:
        parts.append(f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
                     f'fill="{_color(0)}" stroke="black"><title>{diag.kind}</title></rect>')
        curves = []
    else:
        curves = boundary_curves(diag, s_lo, s_hi, samples)
        by_slab: dict = {}
        for k, lower, upper, t, s in curves:
            by_slab[(k, lower, "top")] = (t, s)
            by_slab[(k, upper, "bottom")] = (t, s)
        for k, labels in enumerate(diag.slabs):
            ta, tb = float(diag.t_breaks[k]), float(diag.t_breaks[k + 1])
            t = np.linspace(ta, tb, samples)
            for lab in labels:
                bot = by_slab.get((k, lab, "bottom"), (t, np.full(samples, s_lo)))[1]
                top = by_slab.get((k, lab, "top"), (t, np.full(samples, s_hi)))[1]
                xs = np.concatenate([X(t), X(t[::-1])])
                ys = np.concatenate([Y(bot), Y(top[::-1])])
                f = diag.funcs[lab]
                parts.append(f'<polygon points="{pts(xs, ys)}" fill="{_color(lab)}" stroke="none">'
                             f"<title>h{lab}: u={f.u} v={f.v}</title></polygon>")
        for k, lower, upper, t, s in curves:
            parts.append(f'<polyline points="{pts(X(t), Y(s))}" fill="none" stroke="black" '
                         f'stroke-width="1"/>')
        parts.append(f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
                     f'fill="none" stroke="black"/>')
    parts.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 8}" text-anchor="middle" font-size="12">'
                 f"t in [{t0:.6g}, {t1:.6g}]</text>")
    parts.append(f'<text x="12" y="{HEIGHT / 2}" font-size="12" transform="rotate(-90 12 {HEIGHT / 2})" '
                 f'text-anchor="middle">s in [{s_lo:.6g}, {s_hi:.6g}]</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n", curves


def export_block(diag: BlockDiagram, s_lo: float, s_hi: float, svg_path: str, csv_path: str | None = None,
                 samples: int = 33) -> dict:
    svg, curves = render_svg(diag, s_lo, s_hi, samples)
    try:
        with open(svg_path, "w") as fh:
            fh.write(svg)
        if csv_path:
            with open(csv_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["curve", "slab", "lower", "upper", "t", "s"])
                for c, (k, lower, upper, t, s) in enumerate(curves):
                    for a, b in zip(t, s):
                        w.writerow([c, k, lower, upper, repr(float(a)), repr(float(b))])
    except OSError as exc:
        raise IoError(f"cannot write export: {exc}") from exc
    return {"svg": svg_path, "csv": csv_path, "curves": len(curves), "slabs": len(diag.slabs)}
