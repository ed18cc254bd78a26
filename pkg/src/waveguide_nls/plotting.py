"""Dependency-free SVG rendering of experiment reports.

Output depends only on the stored records, with fixed number formatting,
so identical reports give byte-identical files.
"""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = {"left": 70, "right": 150, "top": 40, "bottom": 55}
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    return f"{v:.3g}"


class _Axis:
    def __init__(self, values, log, lo_px, hi_px):
        vals = [v for v in values if v is not None and math.isfinite(v) and (v > 0 or not log)]
        if not vals:
            vals = [1.0]
        lo, hi = min(vals), max(vals)
        self.log = log
        if log:
            lo, hi = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
            if lo == hi:
                hi += 1
        else:
            if lo == hi:
                lo, hi = lo - 1, hi + 1
            pad = 0.05 * (hi - lo)
            lo, hi = lo - pad, hi + pad
        self.lo, self.hi = lo, hi
        self.lo_px, self.hi_px = lo_px, hi_px

    def ok(self, v):
        return v is not None and math.isfinite(v) and (v > 0 or not self.log)

    def __call__(self, v):
        x = math.log10(v) if self.log else v
        return self.lo_px + (x - self.lo) / (self.hi - self.lo) * (self.hi_px - self.lo_px)

    def ticks(self):
        if self.log:
            return [10.0 ** e for e in range(int(self.lo), int(self.hi) + 1)]
        step = (self.hi - self.lo) / 5
        mag = 10 ** math.floor(math.log10(step))
        step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= step), default=step)
        start = math.ceil(self.lo / step) * step
        out, v = [], start
        while v <= self.hi + 1e-12 * abs(step):
            out.append(round(v / step) * step)
            v += step
        return out


def svg_plot(series, title="", xlabel="", ylabel="", xlog=False, ylog=False, notes=()) -> str:
    """Render series as a standalone SVG document.

    Each series is a dict with ``x``, ``y``, ``label`` and ``style``
    (``"points"`` or ``"line"``).
    """
    xs = [v for s in series for v in s["x"]]
    ys = [v for s in series for v in s["y"]]
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    ax = _Axis(xs, xlog, x0, x1)
    ay = _Axis(ys, ylog, y0, y1)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>']
    for t in ax.ticks():
        px = ax(t)
        if x0 - 1e-9 <= px <= x1 + 1e-9:
            out.append(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(px)}" y="{y0 + 18}" text-anchor="middle">{_label(t)}</text>')
    for t in ay.ticks():
        py = ay(t)
        if y1 - 1e-9 <= py <= y0 + 1e-9:
            out.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" stroke="black"/>')
            out.append(f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" text-anchor="end">{_label(t)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{(y0 + y1) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {(y0 + y1) / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for i, s in enumerate(series):
        color = s.get("color", COLORS[i % len(COLORS)])
        pts = [(ax(x), ay(y)) for x, y in zip(s["x"], s["y"]) if ax.ok(x) and ay.ok(y)]
        if s.get("style", "line") == "points":
            for px, py in pts:
                out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="2" fill="{color}" fill-opacity="0.5"/>')
        elif pts:
            path = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in pts)
            dash = ' stroke-dasharray="6,4"' if s.get("dashed") else ""
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = y1 + 14 * (i + 1)
        out.append(f'<rect x="{x1 + 10}" y="{ly - 8}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{x1 + 25}" y="{ly + 1}">{escape(s.get("label", ""))}</text>')
    for j, note in enumerate(notes):
        out.append(f'<text x="{x0 + 8}" y="{y1 + 16 + 14 * j}">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _groups(records, key):
    seen = []
    for r in records:
        if r[key] not in seen:
            seen.append(r[key])
    return seen


def report_plots(report) -> dict:
    """Map of file name to SVG text for a loaded report."""
    records = [r for r in report.records if r.get("event") is None]
    if not records:
        raise ValueError("no records")
    kind = report.kind
    if kind == "strichartz":
        series, notes = [], []
        for i, fit in enumerate(report.summary["fits"]):
            p = fit["p"]
            rows = [r for r in records if float(r["p"]) == float(p)]
            Ns = [n for n, _ in fit["sup"]]
            series.append({"x": [r["N"] for r in rows], "y": [r["ratio"] for r in rows],
                           "style": "points", "label": f"ensemble p={p:g}", "color": COLORS[2 * i % 8]})
            series.append({"x": Ns, "y": [s for _, s in fit["sup"]], "label": f"sup p={p:g}",
                           "color": COLORS[(2 * i + 1) % 8]})
            series.append({"x": Ns, "y": [math.exp(fit["intercept"]) * n ** fit["slope"] for n in Ns],
                           "label": f"fit p={p:g}", "dashed": True, "color": COLORS[(2 * i + 1) % 8]})
            notes.append(f"p={p:g}: slope {fit['slope']:.4f} (threshold {fit['threshold']:.3g})")
        return {"strichartz.svg": svg_plot(series, "Strichartz ratio versus N", "N", "R(N)",
                                           True, True, notes)}
    if kind == "bilinear":
        series, notes = [], []
        for i, fit in enumerate(report.summary["fits"]):
            rows = [r for r in records if r["N2"] == fit["N2"]]
            series.append({"x": [r["N1"] for r in rows], "y": [r["ratio"] for r in rows],
                           "style": "points", "label": f"ensemble N2={fit['N2']}", "color": COLORS[2 * i % 8]})
            series.append({"x": [a for a, _ in fit["sup"]], "y": [s for _, s in fit["sup"]],
                           "label": f"sup N2={fit['N2']}", "color": COLORS[(2 * i + 1) % 8]})
            notes.append(f"N2={fit['N2']}: slope {fit['slope']:.4f}")
        return {"bilinear.svg": svg_plot(series, "Bilinear ratio versus N1", "N1", "B(N1, N2)",
                                         True, True, notes)}
    if kind == "conservation":
        series = []
        for kappa in _groups(records, "kappa"):
            for dt in _groups([r for r in records if r["kappa"] == kappa], "dt"):
                rows = [r for r in records if r["kappa"] == kappa and r["dt"] == dt]
                for key in ("mass_drift", "energy_drift", "momentum_drift"):
                    series.append({"x": [r["t"] for r in rows], "y": [r[key] for r in rows],
                                   "label": f"{key.split('_')[0]} k={kappa:+d} dt={dt:g}"})
        return {"conservation.svg": svg_plot(series, "Drift of conserved quantities", "t", "drift",
                                             False, True)}
    if kind == "picard":
        series = []
        for size in _groups(records, "size"):
            rows = [r for r in records if r["size"] == size]
            series.append({"x": [r["iter"] for r in rows], "y": [r["distance"] for r in rows],
                           "label": f"size {size:g}"})
        return {"picard.svg": svg_plot(series, "Picard iterate distances", "iteration",
                                       "max_k H1 distance", False, True)}
    ykey, title, ylabel, ylog = {
        "smalldata": ("ratio", "H1 norm relative to initial", "||u(t)||_H1 / ||u0||_H1", False),
        "focusing": ("growth", "max|u| relative to initial", "growth", True),
        "tail": ("tail", "High-frequency tail", "||P_>N u||_H1", True),
    }[kind]
    series = []
    for kappa in _groups(records, "kappa"):
        rows = [r for r in records if r["kappa"] == kappa]
        series.append({"x": [r["t"] for r in rows], "y": [r[ykey] for r in rows],
                       "label": f"kappa={kappa:+d}"})
    return {f"{kind}.svg": svg_plot(series, title, "t", ylabel, False, ylog)}
