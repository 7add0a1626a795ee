"""Decomposition function and the doubled embedding system.

The decomposition g(x, y) re-evaluates each link's incoming FIFO flows at a
surrogate state in which the densities of that link's sibling outgoing
links are taken from y instead of x; everything else (non-FIFO inflows, all
outflows, exogenous terms) is evaluated at x. On the diagonal g(x, x)
reproduces the plain vector field, and g is nondecreasing in off-diagonal x
entries and nonincreasing in y, which makes the doubled system

    dx/dt = g(x, y),   dy/dt = g(y, x)

order-preserving for the southeast order: (x, y) <= (v, w) iff x <= v
componentwise and w <= y componentwise.

The exogenous terms stay at x on purpose: their sign conditions (inflow
nondecreasing, outflow nonincreasing in other densities) already point the
right way, so no surrogate is needed for them.

Because junction flows only read densities incident to their junction, the
surrogate evaluations are junction-local: swapping the sibling supplies of
one link touches one junction, so each link costs one extra junction
evaluation instead of a full network pass (links without siblings reuse the
base evaluation outright, which also covers every state on the diagonal).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .junctions import JunctionModel, _curves_at, _junction_flows, _min2
from .links import LinkParams
from .topology import LinkId, Network


@dataclass(frozen=True)
class EmbeddingState:
    """A point (x, y) of the doubled system; also used for its rates."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        if self.x.shape != self.y.shape:
            raise ValueError("embedding components must have equal shape")

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_stacked(cls, u: np.ndarray) -> "EmbeddingState":
        n = u.shape[0] // 2
        return cls(x=u[:n].copy(), y=u[n:].copy())

    def swapped(self) -> "EmbeddingState":
        return EmbeddingState(x=self.y, y=self.x)


def order_leq(a: EmbeddingState, b: EmbeddingState, tol: float = 0.0) -> bool:
    """Southeast order: a <= b iff a.x <= b.x and b.y <= a.y componentwise."""
    return bool(np.all(a.x <= b.x + tol) and np.all(b.y <= a.y + tol))


def box_upper(net: Network, params: Mapping[LinkId, LinkParams]) -> np.ndarray:
    """Jam densities in link order: the upper corner of the state box."""
    return np.array([params[l].jam_density for l in net.link_order])


def surrogate_state(net: Network, x: np.ndarray, y: np.ndarray, l: LinkId) -> np.ndarray:
    """State z with the densities of l's sibling links taken from y."""
    z = np.array(x, dtype=float)
    for m in net.adjacent[l]:
        j = net.index[m]
        z[j] = y[j]
    return z


def _g_core(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    model: JunctionModel,
    dem_x: dict[LinkId, float],
    sup_x: dict[LinkId, float],
    sup_y: dict[LinkId, float],
    record: Optional[list],
) -> np.ndarray:
    """g from precomputed curves: demand/supply at x, supply at y."""
    inflow_exo: dict[LinkId, float] = {}
    for l in net.entry_links:
        inflow_exo[l] = _min2(params[l].inflow_demand, sup_x[l], record)

    fifo: dict[tuple[LinkId, LinkId], float] = {}
    nonfifo: dict[tuple[LinkId, LinkId], float] = {}
    for v in net.junction_order:
        ins = net.in_links[v]
        outs = net.out_links[v]
        if ins and outs:
            _junction_flows(model, params, v, ins, outs, dem_x, sup_x, fifo, nonfifo, record)

    # FIFO inflows re-evaluated with sibling supplies taken from y
    fifo_in_surrogate: dict[LinkId, float] = {}
    for l in net.link_order:
        adj = net.adjacent[l]
        ups = net.upstream[l]
        if not adj or not ups:
            continue
        v = net.tail[l]
        outs = net.out_links[v]
        patched = {j: sup_x[j] for j in outs}
        for m in adj:
            patched[m] = sup_y[m]
        zf: dict[tuple[LinkId, LinkId], float] = {}
        znf: dict[tuple[LinkId, LinkId], float] = {}
        _junction_flows(model, params, v, ups, outs, dem_x, patched, zf, znf, record)
        fifo_in_surrogate[l] = sum(zf[(k, l)] for k in ups)

    g = np.empty(net.n)
    for i, l in enumerate(net.link_order):
        if l in fifo_in_surrogate:
            acc = fifo_in_surrogate[l]
            for k in net.upstream[l]:
                acc += nonfifo[(k, l)]
        else:
            acc = 0.0
            for k in net.upstream[l]:
                acc += fifo[(k, l)] + nonfifo[(k, l)]
        out_total = 0.0
        for j in net.downstream[l]:
            out_total += fifo[(l, j)] + nonfifo[(l, j)]
        acc -= out_total
        if net.downstream[l]:
            acc -= params[l].exit_fraction * out_total
        else:
            acc -= dem_x[l]
        acc += inflow_exo.get(l, 0.0)
        g[i] = acc
    return g


def decomposition(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    model: JunctionModel,
    x: np.ndarray,
    y: np.ndarray,
    record: Optional[list] = None,
    upper: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Evaluate g(x, y); both arguments are clamped into the box."""
    if upper is None:
        upper = box_upper(net, params)
    xc = np.clip(np.asarray(x, dtype=float), 0.0, upper)
    yc = np.clip(np.asarray(y, dtype=float), 0.0, upper)
    dem_x, sup_x = _curves_at(net, params, xc, record)
    _, sup_y = _curves_at(net, params, yc, record)
    return _g_core(net, params, model, dem_x, sup_x, sup_y, record)


def decomposition_pair(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    model: JunctionModel,
    x: np.ndarray,
    y: np.ndarray,
    upper: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(g(x, y), g(y, x)) sharing one set of curve evaluations; this is the
    embedding right-hand side, so the integrator calls it constantly."""
    if upper is None:
        upper = box_upper(net, params)
    xc = np.clip(np.asarray(x, dtype=float), 0.0, upper)
    yc = np.clip(np.asarray(y, dtype=float), 0.0, upper)
    dem_x, sup_x = _curves_at(net, params, xc)
    dem_y, sup_y = _curves_at(net, params, yc)
    return (
        _g_core(net, params, model, dem_x, sup_x, sup_y, None),
        _g_core(net, params, model, dem_y, sup_y, sup_x, None),
    )


def embedding_field(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    model: JunctionModel,
    state: EmbeddingState,
) -> EmbeddingState:
    """Rates (g(x, y), g(y, x)) of the doubled system."""
    gx, gy = decomposition_pair(net, params, model, state.x, state.y)
    return EmbeddingState(x=gx, y=gy)


def decomposition_signature(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    model: JunctionModel,
    x: np.ndarray,
    y: np.ndarray,
) -> tuple[int, ...]:
    """Active-branch fingerprint of g at (x, y)."""
    rec: list[int] = []
    decomposition(net, params, model, x, y, record=rec)
    return tuple(rec)
