"""Fundamental-diagram curves and static per-link parameters.

Demand d(x) is the maximum outflow a link can send: strictly increasing,
d(0) = 0. Supply s(x) is the maximum inflow a link can accept: strictly
decreasing, s(jam_density) = 0. Curves are defined on [0, jam_density];
evaluations clamp their argument into that box so integrator overshoot
stays well-defined.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import ClassVar, Optional


@dataclass(frozen=True)
class Exponential:
    """Saturating curve scale * (1 - exp(-rate * x)); used as demand."""

    scale: float
    rate: float
    kind: ClassVar[str] = "exponential"

    def __post_init__(self) -> None:
        if self.scale <= 0 or self.rate <= 0:
            raise ValueError("exponential curve needs scale > 0 and rate > 0")

    def __call__(self, x: float) -> float:
        return self.scale * (1.0 - math.exp(-self.rate * x))


@dataclass(frozen=True)
class Affine:
    """Curve intercept - x; used as supply with intercept == jam density."""

    intercept: float
    kind: ClassVar[str] = "affine"

    def __post_init__(self) -> None:
        if self.intercept <= 0:
            raise ValueError("affine curve needs intercept > 0")

    def __call__(self, x: float) -> float:
        return self.intercept - x


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation through (density, flow) breakpoints."""

    points: tuple[tuple[float, float], ...]
    kind: ClassVar[str] = "piecewise_linear"

    def __post_init__(self) -> None:
        pts = tuple((float(a), float(b)) for a, b in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("piecewise linear curve needs at least two points")
        for (x0, _), (x1, _) in zip(pts, pts[1:]):
            if x1 <= x0:
                raise ValueError("piecewise linear densities must strictly increase")
        object.__setattr__(self, "_xs", tuple(p[0] for p in pts))

    def __call__(self, x: float) -> float:
        xs = self._xs  # type: ignore[attr-defined]
        pts = self.points
        if x <= xs[0]:
            return pts[0][1]
        if x >= xs[-1]:
            return pts[-1][1]
        i = bisect_right(xs, x) - 1
        x0, y0 = pts[i]
        x1, y1 = pts[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def segment(self, x: float) -> int:
        """Active segment index; breakpoints are kinks, so evaluations that
        track smooth pieces record this."""
        xs = self._xs  # type: ignore[attr-defined]
        if x <= xs[0]:
            return 0
        if x >= xs[-1]:
            return len(xs) - 2
        return bisect_right(xs, x) - 1


Curve = Exponential | Affine | PiecewiseLinear


@dataclass(frozen=True)
class LinkParams:
    """Static data for one link.

    turn_ratio is the fraction of upstream demand bound for this link and is
    required exactly when the link has upstream links. exit_fraction is the
    share of the link's junction outflow that leaves via an off-ramp (links
    without downstream links send their whole demand out of the network
    instead). inflow_demand is the constant exogenous arrival rate, only
    meaningful on entry links.
    """

    jam_density: float
    demand: Curve
    supply: Curve
    turn_ratio: Optional[float] = None
    exit_fraction: float = 0.0
    inflow_demand: float = 0.0

    def __post_init__(self) -> None:
        if self.jam_density <= 0:
            raise ValueError("jam_density must be positive")
        if self.turn_ratio is not None and self.turn_ratio <= 0:
            raise ValueError("turn_ratio must be positive where given")
        if self.exit_fraction < 0:
            raise ValueError("exit_fraction must be nonnegative")
        if self.inflow_demand < 0:
            raise ValueError("inflow_demand must be nonnegative")
        if isinstance(self.supply, Affine) and self.supply.intercept != self.jam_density:
            # A mismatched intercept would silently violate s(jam) = 0.
            raise ValueError(
                f"affine supply intercept {self.supply.intercept} must equal "
                f"jam_density {self.jam_density}"
            )
        if self.demand(0.0) != 0.0:
            raise ValueError("demand must vanish exactly at zero density")
        if self.supply(self.jam_density) != 0.0:
            raise ValueError("supply must vanish exactly at jam density")


def clamp(p: LinkParams, x: float) -> float:
    if x < 0.0:
        return 0.0
    if x > p.jam_density:
        return p.jam_density
    return x


def demand(p: LinkParams, x: float) -> float:
    """Maximum outflow at density x (clamped into [0, jam])."""
    return p.demand(clamp(p, x))


def supply(p: LinkParams, x: float) -> float:
    """Maximum inflow at density x (clamped into [0, jam])."""
    return p.supply(clamp(p, x))


# Strict monotonicity is a property of the continuous curve; the numeric
# check walks a fine grid and demands each step move by more than this.
_STRICT_TOL = 1e-12
_GRID_STEPS = 1000


def curve_violations(p: LinkParams) -> list[str]:
    """Grid-check Assumption-style curve requirements; returns problems."""
    problems: list[str] = []
    h = p.jam_density / _GRID_STEPS
    prev_d = p.demand(0.0)
    prev_s = p.supply(0.0)
    for i in range(1, _GRID_STEPS + 1):
        x = i * h if i < _GRID_STEPS else p.jam_density
        cur_d = p.demand(x)
        cur_s = p.supply(x)
        if not (cur_d > prev_d + _STRICT_TOL):
            problems.append(f"demand not strictly increasing near x={x:.6g}")
            break
        if not (cur_s < prev_s - _STRICT_TOL):
            problems.append(f"supply not strictly decreasing near x={x:.6g}")
            break
        if not (math.isfinite(cur_d) and cur_d >= 0 and math.isfinite(cur_s) and cur_s >= -_STRICT_TOL):
            problems.append(f"curve value not finite and nonnegative at x={x:.6g}")
            break
        prev_d, prev_s = cur_d, cur_s
    return problems
