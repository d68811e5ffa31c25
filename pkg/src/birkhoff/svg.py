"""Minimal deterministic SVG emission.

No timestamps, no randomness, insertion-ordered elements, fixed number
formatting: the same inputs always produce byte-identical files.
"""

from __future__ import annotations

import json


def fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


class Canvas:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self._parts: list[str] = []

    def add(self, element: str) -> None:
        self._parts.append(element)

    def desc(self, metadata: dict) -> None:
        payload = json.dumps(metadata, sort_keys=True)
        self.add(f"<desc>{_escape(payload)}</desc>")

    def line(self, x1, y1, x2, y2, stroke="#222222", width=1.0, dash=None) -> None:
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<line x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{fmt(width)}"{extra}/>'
        )

    def polyline(self, points, stroke="#1f4e9c", width=1.2) -> None:
        coords = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in points)
        self.add(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{fmt(width)}"/>'
        )

    def rect(self, x, y, w, h, fill="#dddddd", stroke="none", opacity=None) -> None:
        extra = f' fill-opacity="{fmt(opacity)}"' if opacity is not None else ""
        self.add(
            f'<rect x="{fmt(x)}" y="{fmt(y)}" width="{fmt(w)}" height="{fmt(h)}" '
            f'fill="{fill}" stroke="{stroke}"{extra}/>'
        )

    def circle(self, cx, cy, r, fill="#b03030") -> None:
        self.add(f'<circle cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r)}" fill="{fill}"/>')

    def text(self, x, y, s, size=11, anchor="start", fill="#222222") -> None:
        self.add(
            f'<text x="{fmt(x)}" y="{fmt(y)}" font-size="{size}" '
            f'font-family="monospace" text-anchor="{anchor}" fill="{fill}">'
            f"{_escape(s)}</text>"
        )

    def render(self) -> str:
        body = "\n".join(self._parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {self.width} {self.height}" '
            f'width="{self.width}" height="{self.height}">\n{body}\n</svg>\n'
        )


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class Frame:
    """An axis-annotated data-coordinate frame inside a canvas region."""

    def __init__(self, canvas: Canvas, region, x_range, y_range):
        self.canvas = canvas
        self.x0, self.y0, self.w, self.h = region
        self.xmin, self.xmax = x_range
        self.ymin, self.ymax = y_range
        if self.xmax <= self.xmin:
            self.xmax = self.xmin + 1.0
        if self.ymax <= self.ymin:
            self.ymax = self.ymin + 1.0

    def px(self, x: float) -> float:
        return self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.w

    def py(self, y: float) -> float:
        return self.y0 + self.h - (y - self.ymin) / (self.ymax - self.ymin) * self.h

    def frame_box(self) -> None:
        self.canvas.rect(self.x0, self.y0, self.w, self.h, fill="none", stroke="#888888")

    def x_ticks(self, ticks) -> None:
        for value, label in ticks:
            x = self.px(value)
            self.canvas.line(x, self.y0 + self.h, x, self.y0 + self.h + 4)
            self.canvas.text(x, self.y0 + self.h + 15, label, size=9, anchor="middle")

    def y_ticks(self, ticks) -> None:
        for value, label in ticks:
            y = self.py(value)
            self.canvas.line(self.x0 - 4, y, self.x0, y)
            self.canvas.text(self.x0 - 6, y + 3, label, size=9, anchor="end")

    def title(self, s: str) -> None:
        self.canvas.text(self.x0, self.y0 - 6, s, size=11)

    def hline(self, y: float, stroke="#999999", dash="3,3") -> None:
        self.canvas.line(self.px(self.xmin), self.py(y), self.px(self.xmax), self.py(y), stroke=stroke, dash=dash)

    def steps(self, breakpoints, values, stroke="#1f4e9c", width=1.4) -> None:
        """Draw a right-continuous step function from float breakpoints."""
        points = []
        for j, v in enumerate(values):
            points.append((self.px(breakpoints[j]), self.py(v)))
            points.append((self.px(breakpoints[j + 1]), self.py(v)))
        self.canvas.polyline(points, stroke=stroke, width=width)

    def polyline(self, xy, stroke="#1f4e9c", width=1.0) -> None:
        self.canvas.polyline([(self.px(x), self.py(y)) for x, y in xy], stroke=stroke, width=width)

    def dots(self, xy, r=1.4, fill="#b03030") -> None:
        for x, y in xy:
            self.canvas.circle(self.px(x), self.py(y), r, fill=fill)
