"""Minimal SVG emitter: line plots, scatter plots and heat maps.

Plots are for looking at; every comparison in the package runs on the
tabulated data.
"""

from xml.sax.saxutils import escape

import numpy as np

__all__ = ["line_plot", "scatter_plot", "heat_map", "write_svg"]

W, H = 640, 420
ML, MR, MT, MB = 70, 20, 36, 50
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
PHASE_COLORS = {"I": "#4c72b0", "II": "#dd8452", "III": "#55a868", "IV": "#c44e52", "": "#bbbbbb"}


def _rng(v):
    v = np.asarray(v, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _frame(title, xlabel, ylabel, xr, yr):
    x0, x1 = xr
    y0, y1 = yr
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" fill="none" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle" font-family="sans-serif" font-size="13">{escape(xlabel)}</text>',
        f'<text x="16" y="{H / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {H / 2})">{escape(ylabel)}</text>',
    ]
    for k in range(5):
        fx = x0 + (x1 - x0) * k / 4
        fy = y0 + (y1 - y0) * k / 4
        px = ML + (W - ML - MR) * k / 4
        py = H - MB - (H - MT - MB) * k / 4
        out.append(f'<text x="{px:.1f}" y="{H - MB + 16}" text-anchor="middle" font-family="sans-serif" font-size="11">{fx:.3g}</text>')
        out.append(f'<text x="{ML - 6}" y="{py + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="11">{fy:.3g}</text>')
    return out


def _mapper(xr, yr):
    def f(x, y):
        px = ML + (W - ML - MR) * (x - xr[0]) / (xr[1] - xr[0])
        py = H - MB - (H - MT - MB) * (y - yr[0]) / (yr[1] - yr[0])
        return px, py

    return f


def line_plot(series, title="", xlabel="", ylabel="", logy=False):
    """series: list of (label, x, y)."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    if logy:
        ys = np.log10(np.where(ys > 0, ys, np.nan))
        ylabel = f"log10 {ylabel}"
    xr, yr = _rng(xs), _rng(ys)
    out = _frame(title, xlabel, ylabel, xr, yr)
    m = _mapper(xr, yr)
    for i, (label, x, y) in enumerate(series):
        y = np.asarray(y, float)
        if logy:
            y = np.log10(np.where(y > 0, y, np.nan))
        pts = [m(a, b) for a, b in zip(np.asarray(x, float), y) if np.isfinite(a) and np.isfinite(b)]
        c = PALETTE[i % len(PALETTE)]
        if pts:
            d = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        out.append(f'<text x="{W - MR - 8}" y="{MT + 16 + 16 * i}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="12" fill="{c}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_plot(x, y, title="", xlabel="", ylabel="", colors=None, r=2.0):
    xr, yr = _rng(x), _rng(y)
    out = _frame(title, xlabel, ylabel, xr, yr)
    m = _mapper(xr, yr)
    for i, (a, b) in enumerate(zip(np.asarray(x, float), np.asarray(y, float))):
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        px, py = m(a, b)
        c = colors[i] if colors is not None else PALETTE[0]
        out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{r}" fill="{c}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _gray(v):
    g = int(round(255 * (1.0 - v)))
    return f"#{g:02x}{g:02x}{255:02x}" if v > 0 else "#ffffff"


def heat_map(Z, x, y, title="", xlabel="", ylabel="", labels=None):
    """Z[i, j] at (x[j], y[i]); ``labels`` (same shape, strings) switches to categorical colors."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xr = (x.min(), x.max()) if x.max() > x.min() else (x.min() - 0.5, x.max() + 0.5)
    yr = (y.min(), y.max()) if y.max() > y.min() else (y.min() - 0.5, y.max() + 0.5)
    out = _frame(title, xlabel, ylabel, xr, yr)
    pw = (W - ML - MR) / len(x)
    ph = (H - MT - MB) / len(y)
    if labels is None:
        Z = np.asarray(Z, float)
        lo, hi = _rng(Z)
        N = (Z - lo) / (hi - lo)
    for i in range(len(y)):
        for j in range(len(x)):
            px = ML + pw * j
            py = H - MB - ph * (i + 1)
            if labels is not None:
                c = PHASE_COLORS.get(labels[i][j], "#bbbbbb")
            else:
                v = N[i, j]
                c = _gray(float(v)) if np.isfinite(v) else "#bbbbbb"
            out.append(f'<rect x="{px:.2f}" y="{py:.2f}" width="{pw + 0.3:.2f}" height="{ph + 0.3:.2f}" fill="{c}"/>')
    if labels is not None:
        for k, (lab, c) in enumerate((k, v) for k, v in PHASE_COLORS.items() if k):
            out.append(f'<rect x="{W - MR - 60}" y="{MT + 6 + 16 * k}" width="10" height="10" fill="{c}"/>')
            out.append(f'<text x="{W - MR - 45}" y="{MT + 15 + 16 * k}" font-family="sans-serif" font-size="12">{lab}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(text, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
