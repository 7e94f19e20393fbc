"""Nemenyi critical-difference diagram as a standalone SVG.

Average ranks sit on a horizontal axis running from 1 (left, best) to G.
Each learner hangs off the axis at its rank with a labelled elbow line; the
better half is labelled on the left, the rest on the right.  Every group of
two or more learners whose ranks differ by less than the CD gets a thick
bar, and a ruler above the axis shows the CD length.
"""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

from ..stats import RankReport, group_by_cd

WIDTH = 640
MARGIN = 150
AXIS_Y = 70
ROW = 22


def _num(v: float) -> str:
    return f"{v:.2f}"


def render_nemenyi_svg(report: RankReport) -> str:
    G = len(report.learners)
    span = max(G - 1, 1)
    x_of = lambda r: MARGIN + (WIDTH - 2 * MARGIN) * (r - 1) / span
    groups = [g for g in group_by_cd(report.avg_ranks, report.cd) if len(g) >= 2]
    order = sorted(range(G), key=lambda j: (report.avg_ranks[j], j))
    n_left = (G + 1) // 2
    bar_top = AXIS_Y + 14
    label_top = bar_top + ROW * max(len(groups), 1) + 10
    height = label_top + ROW * max(n_left, G - n_left) + 20

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
    ]
    # CD ruler
    x0, x1 = x_of(1), x_of(1 + report.cd)
    out.append(f'<g class="cd"><line x1="{_num(x0)}" y1="22" x2="{_num(x1)}" y2="22" stroke="black" stroke-width="1.5"/>')
    for x in (x0, x1):
        out.append(f'<line x1="{_num(x)}" y1="17" x2="{_num(x)}" y2="27" stroke="black"/>')
    out.append(f'<text x="{_num((x0 + x1) / 2)}" y="13" text-anchor="middle">CD = {report.cd:.4f}</text></g>')
    # axis and ticks
    out.append(
        f'<g class="axis"><line x1="{_num(x_of(1))}" y1="{AXIS_Y}" x2="{_num(x_of(G))}" y2="{AXIS_Y}" stroke="black"/>'
    )
    for r in range(1, G + 1):
        x = _num(x_of(r))
        out.append(f'<line x1="{x}" y1="{AXIS_Y - 6}" x2="{x}" y2="{AXIS_Y}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{AXIS_Y - 10}" text-anchor="middle">{r}</text>')
    out.append("</g>")
    # learner labels
    out.append('<g class="learners">')
    for pos, j in enumerate(order):
        x = x_of(report.avg_ranks[j])
        left = pos < n_left
        row = pos if left else G - 1 - pos
        y = label_top + ROW * row
        end = MARGIN - 20 if left else WIDTH - MARGIN + 20
        name = escape(report.learners[j])
        label = f"{name} ({report.avg_ranks[j]:.3f})"
        out.append(
            f'<polyline points="{_num(x)},{AXIS_Y} {_num(x)},{y} {end},{y}" fill="none" stroke="black"/>'
        )
        anchor, tx = ("end", end - 4) if left else ("start", end + 4)
        out.append(f'<text x="{tx}" y="{y + 4}" text-anchor="{anchor}">{label}</text>')
    out.append("</g>")
    # group bars
    out.append('<g class="groups">')
    for i, g in enumerate(groups):
        ranks = [report.avg_ranks[j] for j in g]
        y = bar_top + ROW * i
        out.append(
            f'<line x1="{_num(x_of(min(ranks)) - 3)}" y1="{y}" x2="{_num(x_of(max(ranks)) + 3)}" y2="{y}" '
            f'stroke="black" stroke-width="4"/>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_nemenyi_diagram(report: RankReport, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(render_nemenyi_svg(report), encoding="utf-8")
    return path
