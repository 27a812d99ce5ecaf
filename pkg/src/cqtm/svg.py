"""Minimal SVG view: log10 LR against k with a band/gap strip underneath.

Bands sit on the upper level of the strip and gaps on the lower one, as in
the usual band diagrams.  CSV stays the contract; this is only a quick look.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from cqtm.spectra import BandInterval, SweepRecord


class EmptyDocumentError(ValueError):
    pass


WIDTH, HEIGHT = 900, 420
MARGIN = 50
STRIP_H = 30


def _steps(spans: list[tuple[float, float, bool]]) -> list[tuple[float, bool]]:
    pts = []
    for lo, hi, is_band in spans:
        pts.append((lo, is_band))
        pts.append((hi, is_band))
    return pts


def _record_spans(records: list[SweepRecord]) -> list[tuple[float, float, bool]]:
    spans = []
    for i, r in enumerate(records):
        lo = r.k if i == 0 else 0.5 * (records[i - 1].k + r.k)
        hi = r.k if i == len(records) - 1 else 0.5 * (r.k + records[i + 1].k)
        spans.append((lo, hi, r.band))
    return spans


def render_svg(
    records: list[SweepRecord] | None = None,
    intervals: list[BandInterval] | None = None,
    title: str = "",
    y_clip: tuple[float, float] = (-8.0, 30.0),
) -> str:
    if not records and not intervals:
        raise EmptyDocumentError("nothing to draw")
    records = sorted(records or [], key=lambda r: r.k)
    if intervals:
        spans = [(iv.k_lo, iv.k_hi, iv.kind == "band") for iv in intervals]
    else:
        spans = _record_spans(records)
    ks = [r.k for r in records] + [s[0] for s in spans] + [s[1] for s in spans]
    k0, k1 = min(ks), max(ks)
    if k1 == k0:
        k1 = k0 + 1e-12

    plot_top, plot_bot = MARGIN, HEIGHT - MARGIN - STRIP_H - 10
    strip_top = plot_bot + 10

    def xs(k):
        return MARGIN + (k - k0) / (k1 - k0) * (WIDTH - 2 * MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{MARGIN}" y="{MARGIN - 20}" font-size="14">{escape(title)}</text>')

    finite = [r.log10_lr for r in records if math.isfinite(r.log10_lr)]
    if finite:
        lo = max(min(finite), y_clip[0])
        hi = min(max(finite), y_clip[1])
        if hi <= lo:
            hi = lo + 1.0

        def ys(v):
            v = min(max(v, lo), hi)
            return plot_bot - (v - lo) / (hi - lo) * (plot_bot - plot_top)

        pts = " ".join(f"{xs(r.k):.2f},{ys(r.log10_lr):.2f}" for r in records if math.isfinite(r.log10_lr))
        parts.append(f'<polyline class="log10-lr" fill="none" stroke="black" stroke-width="0.6" points="{pts}"/>')
        parts.append(
            f'<text x="5" y="{plot_top + 10}" font-size="10">{hi:.3g}</text>'
            f'<text x="5" y="{plot_bot}" font-size="10">{lo:.3g}</text>'
        )

    up, down = strip_top, strip_top + STRIP_H
    d = []
    for i, (k, is_band) in enumerate(_steps(spans)):
        d.append(f"{'M' if i == 0 else 'L'}{xs(k):.2f},{up if is_band else down}")
    parts.append(f'<path class="strip" fill="none" stroke="blue" stroke-width="1" d="{" ".join(d)}"/>')
    parts.append(
        f'<text x="{MARGIN}" y="{HEIGHT - 5}" font-size="10">k = {k0:.5g}</text>'
        f'<text x="{WIDTH - MARGIN - 60}" y="{HEIGHT - 5}" font-size="10">k = {k1:.5g}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
