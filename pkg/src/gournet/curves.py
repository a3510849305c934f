"""Deterministic SVG emission of training history curves.

Two panels (accuracy, loss), train and validation series each. The writer
is hand-rolled so identical histories produce byte-identical files; all
coordinates are formatted to fixed precision and nothing environmental
(timestamps, random ids) enters the output.
"""

from __future__ import annotations

from dataclasses import dataclass

PANEL_W, PANEL_H = 420, 320
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 58, 16, 34, 44
GAP = 26

TRAIN_COLOR = "#1f6feb"
VAL_COLOR = "#d4722c"


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Panel:
    def __init__(self, x0: int, title: str, y_label: str,
                 y_min: float, y_max: float, n_epochs: int):
        self.x0 = x0
        self.title = title
        self.y_label = y_label
        self.y_min, self.y_max = y_min, y_max
        self.n_epochs = n_epochs
        self.plot_x = x0 + MARGIN_L
        self.plot_y = MARGIN_T
        self.plot_w = PANEL_W - MARGIN_L - MARGIN_R
        self.plot_h = PANEL_H - MARGIN_T - MARGIN_B

    def x_of(self, epoch: int) -> float:
        if self.n_epochs == 1:
            return self.plot_x + self.plot_w / 2
        frac = (epoch - 1) / (self.n_epochs - 1)
        return self.plot_x + frac * self.plot_w

    def y_of(self, value: float) -> float:
        span = self.y_max - self.y_min
        frac = (value - self.y_min) / span if span > 0 else 0.5
        return self.plot_y + (1.0 - frac) * self.plot_h

    def frame(self) -> list[str]:
        x, y, w, h = self.plot_x, self.plot_y, self.plot_w, self.plot_h
        parts = [
            f'<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="none" '
            'stroke="#888" stroke-width="1"/>',
            f'<text x="{x + w / 2:.1f}" y="{MARGIN_T - 12}" text-anchor="middle" '
            f'font-size="14" font-weight="bold">{self.title}</text>',
            f'<text x="{x + w / 2:.1f}" y="{PANEL_H - 10}" text-anchor="middle" '
            'font-size="12">epoch</text>',
            f'<text x="{self.x0 + 16}" y="{y + h / 2:.1f}" text-anchor="middle" '
            f'font-size="12" transform="rotate(-90 {self.x0 + 16} {y + h / 2:.1f})">'
            f'{self.y_label}</text>',
        ]
        for frac, value in ((0.0, self.y_min), (0.5, (self.y_min + self.y_max) / 2),
                            (1.0, self.y_max)):
            ty = self.y_of(value)
            parts.append(f'<line x1="{x - 4}" y1="{ty:.2f}" x2="{x}" y2="{ty:.2f}" '
                         'stroke="#888" stroke-width="1"/>')
            parts.append(f'<text x="{x - 7}" y="{ty + 4:.2f}" text-anchor="end" '
                         f'font-size="11">{value:.3g}</text>')
        for epoch in sorted({1, self.n_epochs}):
            tx = self.x_of(epoch)
            parts.append(f'<line x1="{tx:.2f}" y1="{y + h}" x2="{tx:.2f}" '
                         f'y2="{y + h + 4}" stroke="#888" stroke-width="1"/>')
            parts.append(f'<text x="{tx:.2f}" y="{y + h + 16}" text-anchor="middle" '
                         f'font-size="11">{epoch}</text>')
        return parts

    def series(self, values: list[float], color: str, name: str) -> list[str]:
        pts = [(self.x_of(e + 1), self.y_of(v)) for e, v in enumerate(values)]
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
        parts = [f'<polyline class="{name}" points="{coords}" fill="none" '
                 f'stroke="{color}" stroke-width="1.5"/>']
        parts.extend(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.2" fill="{color}"/>'
                     for px, py in pts)
        return parts


def render_curves(history: list[EpochRecord]) -> str:
    """SVG text for a history; raises on an empty history."""
    if not history:
        raise ValueError("history is empty, nothing to plot")
    n = len(history)
    loss_top = max(max(r.train_loss for r in history),
                   max(r.val_loss for r in history))
    loss_top = loss_top * 1.05 if loss_top > 0 else 1.0
    acc = _Panel(0, "accuracy", "accuracy", 0.0, 1.0, n)
    loss = _Panel(PANEL_W + GAP, "loss", "loss", 0.0, loss_top, n)
    width = 2 * PANEL_W + GAP
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" '
        'font-family="Helvetica, Arial, sans-serif">',
        f'<rect x="0" y="0" width="{width}" height="{PANEL_H}" fill="white"/>',
    ]
    parts.extend(acc.frame())
    parts.extend(acc.series([r.train_accuracy for r in history], TRAIN_COLOR,
                            "train_accuracy"))
    parts.extend(acc.series([r.val_accuracy for r in history], VAL_COLOR,
                            "val_accuracy"))
    parts.extend(loss.frame())
    parts.extend(loss.series([r.train_loss for r in history], TRAIN_COLOR,
                             "train_loss"))
    parts.extend(loss.series([r.val_loss for r in history], VAL_COLOR,
                             "val_loss"))
    lx = acc.plot_x + 8
    parts.append(f'<rect x="{lx}" y="{MARGIN_T + 6}" width="10" height="3" '
                 f'fill="{TRAIN_COLOR}"/>')
    parts.append(f'<text x="{lx + 14}" y="{MARGIN_T + 11}" font-size="11">'
                 'train</text>')
    parts.append(f'<rect x="{lx + 56}" y="{MARGIN_T + 6}" width="10" height="3" '
                 f'fill="{VAL_COLOR}"/>')
    parts.append(f'<text x="{lx + 70}" y="{MARGIN_T + 11}" font-size="11">'
                 'validation</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_curves(history: list[EpochRecord], path: str) -> None:
    svg = render_curves(history)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(svg)
