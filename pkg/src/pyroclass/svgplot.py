"""Minimal SVG 1.1 chart emitter with no plotting dependency.

Two chart kinds cover the reports: accuracy-vs-resolution line charts and
ROC charts with the chance diagonal. Output is plain text with fixed
number formatting, so identical inputs yield identical files.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

_WIDTH = 640
_HEIGHT = 480
_LEFT, _RIGHT = 62.0, 470.0
_TOP, _BOTTOM = 46.0, 420.0

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
            "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{_WIDTH}" height="{_HEIGHT}" '
            f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
            f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
            f'<text x="{(_LEFT + _RIGHT) / 2}" y="24" font-family="sans-serif" '
            f'font-size="15" text-anchor="middle">{escape(title)}</text>',
        ]

    def line(self, x1, y1, x2, y2, stroke="#333333", width=1.0, dash=None):
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
            f'y2="{_fmt(y2)}" stroke="{stroke}" '
            f'stroke-width="{width}"{dash_attr}/>')

    def text(self, x, y, content, size=10, anchor="middle", rotate=None):
        transform = (f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"'
                     if rotate is not None else "")
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}"{transform}>'
            f'{escape(str(content))}</text>')

    def polyline(self, pixel_points, color):
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pixel_points)
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _x_ticks(xs: list) -> list:
    distinct = sorted(set(xs))
    if len(distinct) <= 14:
        return distinct
    step = (len(distinct) + 13) // 14
    ticks = distinct[::step]
    if ticks[-1] != distinct[-1]:
        ticks.append(distinct[-1])
    return ticks


def _chart(series, title, x_label, y_label, x_range, diagonal=False) -> str:
    canvas = _Canvas(title)
    xmin, xmax = x_range
    if xmax <= xmin:
        xmin, xmax = xmin - 0.5, xmax + 0.5

    def px(x):
        return _LEFT + (x - xmin) / (xmax - xmin) * (_RIGHT - _LEFT)

    def py(y):
        return _BOTTOM - y * (_BOTTOM - _TOP)

    # y grid and ticks at 0, 0.2, ..., 1
    for i in range(6):
        y = i / 5.0
        canvas.line(_LEFT, py(y), _RIGHT, py(y), stroke="#dddddd")
        canvas.text(_LEFT - 8, py(y) + 3.5, f"{y:.1f}", anchor="end")
    all_x = [x for _, pts in series for x, _ in pts]
    for x in _x_ticks(all_x or [xmin, xmax]):
        canvas.line(px(x), _BOTTOM, px(x), _BOTTOM + 4)
        canvas.text(px(x), _BOTTOM + 16, f"{x:g}")
    # axes
    canvas.line(_LEFT, _TOP, _LEFT, _BOTTOM)
    canvas.line(_LEFT, _BOTTOM, _RIGHT, _BOTTOM)
    canvas.text((_LEFT + _RIGHT) / 2, _BOTTOM + 34, x_label, size=12)
    canvas.text(18, (_TOP + _BOTTOM) / 2, y_label, size=12, rotate=-90)

    if diagonal:
        canvas.line(px(xmin), py(0.0), px(xmax), py(1.0),
                    stroke="#999999", dash="5,4")

    legend_y = _TOP + 6
    for index, (name, pts) in enumerate(series):
        color = _PALETTE[index % len(_PALETTE)]
        ordered = sorted(pts)
        canvas.polyline([(px(x), py(y)) for x, y in ordered], color)
        canvas.line(_RIGHT + 10, legend_y, _RIGHT + 30, legend_y,
                    stroke=color, width=2.0)
        canvas.text(_RIGHT + 34, legend_y + 3.5, name, anchor="start")
        legend_y += 16
    return canvas.render()


def line_chart(series, title: str, x_label: str, y_label: str) -> str:
    """Line chart of (name, [(x, y), ...]) series; y axis fixed to [0, 1]."""
    xs = [x for _, pts in series for x, _ in pts]
    x_range = (min(xs), max(xs)) if xs else (0.0, 1.0)
    return _chart(series, title, x_label, y_label, x_range)


def roc_chart(curves, title: str) -> str:
    """ROC chart of (name, [(fpr, tpr), ...]) curves with the diagonal."""
    return _chart(curves, title, "false positive rate",
                  "true positive rate", (0.0, 1.0), diagonal=True)


def write_svg(text: str, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
