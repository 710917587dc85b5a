"""Energy-vs-iteration charts as small, byte-deterministic SVG files."""

from __future__ import annotations

from os import PathLike
from xml.sax.saxutils import escape

from .optim.trace import OptimizerTrace

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 50
N_TICKS = 5


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def render_convergence_svg(trace: OptimizerTrace, target: float, units: str = "J", title: str | None = None) -> str:
    """SVG 1.1 text: one polyline of the trace energies and a dashed line at ``target``."""
    if not trace.records:
        raise ValueError("cannot plot an empty trace")
    its = [r.iteration for r in trace.records]
    ens = [r.energy for r in trace.records]
    target = float(target)
    x0, x1 = min(its), max(its)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    y0, y1 = min(min(ens), target), max(max(ens), target)
    pad = 0.05 * (y1 - y0) if y1 > y0 else 0.5
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return TOP + (y1 - y) / (y1 - y0) * ph

    title = title or f"{trace.optimizer.upper()} convergence"
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{escape(title)}</text>',
        f'<g class="axes" stroke="black" stroke-width="1">'
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}"/>'
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}"/></g>',
    ]
    ticks = ['<g class="ticks" font-family="sans-serif" font-size="11">']
    for k in range(N_TICKS):
        xv = x0 + (x1 - x0) * k / (N_TICKS - 1)
        yv = y0 + (y1 - y0) * k / (N_TICKS - 1)
        ticks.append(f'<text x="{_fmt(px(xv))}" y="{TOP + ph + 16}" text-anchor="middle">{_tick_label(xv)}</text>')
        ticks.append(f'<text x="{LEFT - 6}" y="{_fmt(py(yv) + 4)}" text-anchor="end">{_tick_label(yv)}</text>')
    ticks.append("</g>")
    out.extend(ticks)
    out.append(
        f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle" font-family="sans-serif" font-size="13">iteration</text>'
    )
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">energy ({escape(units)})</text>'
    )
    out.append(
        f'<line class="reference" x1="{LEFT}" y1="{_fmt(py(target))}" x2="{LEFT + pw}" y2="{_fmt(py(target))}" '
        'stroke="crimson" stroke-width="1" stroke-dasharray="6 4"/>'
    )
    if len(its) == 1:
        out.append(f'<circle class="marker" cx="{_fmt(px(its[0]))}" cy="{_fmt(py(ens[0]))}" r="3" fill="steelblue"/>')
    else:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(its, ens))
        out.append(f'<polyline class="energy" fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_convergence_plot(
    trace: OptimizerTrace, target: float, out_path: str | PathLike, units: str = "J", title: str | None = None
) -> None:
    svg = render_convergence_svg(trace, target, units, title)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
