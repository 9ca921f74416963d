"""Orbit iteration, period detection and orbit portraits (CSV and SVG)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .radicals import is_exact
from .rational import PoleError, RationalFn2, RationalMap2

DEFAULT_BIT_CAP = 4096
DEFAULT_BOX = 1e6
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")


class OrbitError(ValueError):
    pass


@dataclass
class OrbitRecord:
    initial: tuple
    points: list = field(default_factory=list)
    detected_period: int | None = None
    escaped: bool = False
    stop_reason: str = ""  # period | escape | pole | bit_cap | length
    eps: object = None

    @property
    def length(self) -> int:
        return len(self.points)


def _bits(v) -> int:
    if isinstance(v, Fraction):
        return max(v.numerator.bit_length(), v.denominator.bit_length())
    if isinstance(v, int):
        return v.bit_length()
    return 0


def _stepper(mp, mode: str) -> Callable:
    if mode not in ("exact", "floating"):
        raise OrbitError(f"unknown mode {mode!r}")
    if isinstance(mp, RationalMap2):
        return mp.evaluate if mode == "exact" else mp.float_evaluator()
    return mp


def iterate(mp, start, n: int, mode: str = "exact", detect_period: bool = True, tol: float = 1e-9,
            bit_cap: int = DEFAULT_BIT_CAP, box: float = DEFAULT_BOX, eps=None) -> OrbitRecord:
    """Orbit of `start` under `mp`, at most n steps.

    Stops early on return to the start (the first return time is the minimal
    period), on a pole, on leaving |x|, |y| <= box, or, in exact mode, when a
    coordinate needs more than bit_cap bits.
    """
    f = _stepper(mp, mode)
    if mode == "exact":
        p0 = tuple(Fraction(v) if isinstance(v, int) else v for v in start)
    else:
        p0 = (float(start[0]), float(start[1]))
    rec = OrbitRecord(p0, [p0], eps=eps)
    p = p0
    for k in range(1, n + 1):
        try:
            p = f(*p)
        except (PoleError, ZeroDivisionError):
            if k == 1:
                raise OrbitError(f"start point {p0} is a pole of the map") from None
            rec.escaped, rec.stop_reason = True, "pole"
            return rec
        if mode == "floating":
            p = (float(p[0]), float(p[1]))
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                rec.escaped, rec.stop_reason = True, "escape"
                return rec
        if abs(float(p[0])) > box or abs(float(p[1])) > box:
            rec.points.append(p)
            rec.escaped, rec.stop_reason = True, "escape"
            return rec
        if mode == "exact" and max(_bits(p[0]), _bits(p[1])) > bit_cap:
            rec.stop_reason = "bit_cap"
            return rec
        rec.points.append(p)
        if detect_period and _returned(p, p0, mode, tol):
            rec.detected_period = k
            rec.stop_reason = "period"
            return rec
    rec.stop_reason = "length"
    return rec


def _returned(p, p0, mode, tol) -> bool:
    if mode == "exact" and all(is_exact(v) for v in p + p0):
        return p == p0
    return math.hypot(float(p[0]) - float(p0[0]), float(p[1]) - float(p0[1])) <= tol * (1 + math.hypot(float(p0[0]), float(p0[1])))


def energy_drift(H: RationalFn2 | Callable, orbit: OrbitRecord):
    """max_k |H(p_k) - H(p_0)| / (1 + |H(p_0)|); exact when the orbit is."""
    ev = H.evaluate if isinstance(H, RationalFn2) else H
    h0 = ev(*orbit.points[0])
    worst = 0 * h0
    for p in orbit.points[1:]:
        d = abs(ev(*p) - h0) / (1 + abs(h0))
        if d > worst:
            worst = d
    return worst


# ---------------------------------------------------------------------------
# portraits
# ---------------------------------------------------------------------------

def radial_seed_fan(count: int, center=(0.0, 0.0), r_min: float = 0.02, r_max: float = 0.8,
                    angle: float = 0.0) -> list[tuple[float, float]]:
    """`count` seeds evenly spaced on a ray from `center`."""
    if count <= 0:
        return []
    if count == 1:
        radii = [r_min]
    else:
        radii = [r_min + (r_max - r_min) * i / (count - 1) for i in range(count)]
    c, s = math.cos(angle), math.sin(angle)
    return [(center[0] + r * c, center[1] + r * s) for r in radii]


def portrait(mp, seeds: Sequence, iters: int, csv_path=None, svg_path=None,
             box: float = DEFAULT_BOX) -> list[OrbitRecord]:
    """Floating orbits of every seed, written as CSV and/or SVG."""
    orbits = [iterate(mp, s, iters, mode="floating", detect_period=False, box=box) for s in seeds]
    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(portrait_csv(orbits))
    if svg_path is not None:
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(portrait_svg(orbits))
    return orbits


def portrait_csv(orbits: Sequence[OrbitRecord]) -> str:
    lines = ["seed,iter,x,y"]
    for i, o in enumerate(orbits):
        for k, (x, y) in enumerate(o.points):
            lines.append(f"{i},{k},{float(x):.17g},{float(y):.17g}")
    return "\n".join(lines) + "\n"


def portrait_svg(orbits: Sequence[OrbitRecord], size: int = 800, margin: int = 20) -> str:
    pts = [(float(x), float(y)) for o in orbits for x, y in o.points]
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">\n<rect width="{size}" height="{size}" fill="white"/>\n')
    if not pts:
        return head + "</svg>\n"
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0) or 1.0
    scale = (size - 2 * margin) / span
    body = []
    for i, o in enumerate(orbits):
        color = PALETTE[i % len(PALETTE)]
        body.append(f'<g fill="{color}">')
        for x, y in o.points:
            cx = margin + (float(x) - x0) * scale
            cy = size - margin - (float(y) - y0) * scale
            body.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="0.8"/>')
        body.append("</g>")
    return head + "\n".join(body) + "\n</svg>\n"
