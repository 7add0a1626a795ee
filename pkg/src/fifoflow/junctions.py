"""Junction flow rules and the network vector field.

Every rule splits the flow from link k to link l into a FIFO part, which is
throttled by congestion on sibling outgoing links, and a non-FIFO part,
which ignores siblings:

    non_fifo            everything non-FIFO; each outgoing link is limited
                        only by its own supply ratio
    full_fifo           everything FIFO; one jammed outgoing link stalls the
                        whole junction
    convex_combo        per-link blend fifo_share * full-FIFO +
                        (1 - fifo_share) * non-FIFO
    partial_fifo_lanes  shared lanes obey the junction-wide FIFO throttle,
                        exclusive lanes take whatever supply the FIFO flow
                        left over
    multi_set_fifo      several FIFO restriction sets per junction, each
                        throttling its members jointly; the residual share
                        behaves like exclusive lanes

The last two assume every diverging junction (more than one outgoing link)
has exactly one incoming link; merging junctions are still fine because a
single outgoing link has no siblings.

Flows at one junction depend only on densities incident to it, so the
evaluation is junction-by-junction (`_junction_flows`); the decomposition
reuses the same routine with patched sibling supplies instead of
re-evaluating the whole network per surrogate state.

All evaluation functions optionally record which branch of every min/argmin
was active into a caller-supplied list. Two states with equal records are on
the same smooth piece of the flow field, which is how finite differencing
detects kinks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Mapping, Optional, Sequence

import numpy as np

from .links import LinkParams, PiecewiseLinear
from .topology import JunctionId, LinkId, Network


class DivergeRuleViolation(ValueError):
    """A diverge has more than one incoming link under a model that forbids it."""


def _check_share(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class NonFifo:
    kind: ClassVar[str] = "non_fifo"
    requires_single_in_diverge: ClassVar[bool] = False


@dataclass(frozen=True)
class FullFifo:
    kind: ClassVar[str] = "full_fifo"
    requires_single_in_diverge: ClassVar[bool] = False


@dataclass(frozen=True)
class ConvexCombo:
    """fifo_share[l] blends the full-FIFO and non-FIFO rates for link l."""

    fifo_share: Mapping[LinkId, float]
    kind: ClassVar[str] = "convex_combo"
    requires_single_in_diverge: ClassVar[bool] = False

    def __post_init__(self) -> None:
        for l, eta in self.fifo_share.items():
            _check_share(f"fifo_share[{l!r}]", eta)


@dataclass(frozen=True)
class PartialFifoLanes:
    """Shared/exclusive lanes: fifo_share[l] of the traffic bound for l uses
    shared lanes (FIFO-throttled); the rest uses exclusive lanes. Links
    without siblings are implicitly all-FIFO and need no entry."""

    fifo_share: Mapping[LinkId, float]
    kind: ClassVar[str] = "partial_fifo_lanes"
    requires_single_in_diverge: ClassVar[bool] = True

    def __post_init__(self) -> None:
        for l, eta in self.fifo_share.items():
            _check_share(f"fifo_share[{l!r}]", eta)


@dataclass(frozen=True)
class RestrictionSet:
    """One FIFO restriction: `members` (outgoing links of one junction) are
    jointly throttled; shares[l] is how strongly member l is influenced."""

    members: frozenset[LinkId]
    shares: Mapping[LinkId, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.members:
            raise ValueError("restriction set must have at least one member")
        for l, eta in self.shares.items():
            if l not in self.members:
                raise ValueError(
                    f"share given for {l!r} which is not a member of the restriction set"
                )
            _check_share(f"shares[{l!r}]", eta)
        object.__setattr__(self, "_sorted_members", tuple(sorted(self.members)))

    def sorted_members(self) -> tuple[LinkId, ...]:
        return self._sorted_members  # type: ignore[attr-defined]


@dataclass(frozen=True)
class MultiSetFifo:
    """Per-junction collections of FIFO restriction sets."""

    restrictions: Mapping[JunctionId, tuple[RestrictionSet, ...]]
    kind: ClassVar[str] = "multi_set_fifo"
    requires_single_in_diverge: ClassVar[bool] = True

    def __post_init__(self) -> None:
        norm = {v: tuple(sets) for v, sets in self.restrictions.items()}
        object.__setattr__(self, "restrictions", norm)
        for v, sets in norm.items():
            totals: dict[LinkId, float] = {}
            for rs in sets:
                for l, eta in rs.shares.items():
                    totals[l] = totals.get(l, 0.0) + eta
            for l, tot in totals.items():
                if tot > 1.0 + 1e-12:
                    raise ValueError(
                        f"fifo shares for link {l!r} at junction {v!r} sum to {tot:.6g} > 1"
                    )

    def residual_share(self, v: JunctionId, l: LinkId) -> float:
        tot = sum(rs.shares.get(l, 0.0) for rs in self.restrictions.get(v, ()))
        return 1.0 - tot


JunctionModel = NonFifo | FullFifo | ConvexCombo | PartialFifoLanes | MultiSetFifo


@dataclass
class FlowBreakdown:
    """All flows at one state: FIFO/non-FIFO per incident (from, to) pair
    plus exogenous inflow/outflow per link. Non-incident pairs carry no
    entry and are structurally zero."""

    fifo: dict[tuple[LinkId, LinkId], float]
    nonfifo: dict[tuple[LinkId, LinkId], float]
    inflow_exo: dict[LinkId, float]
    outflow_exo: dict[LinkId, float]

    def pair(self, k: LinkId, l: LinkId) -> float:
        key = (k, l)
        return self.fifo.get(key, 0.0) + self.nonfifo.get(key, 0.0)

    def fifo_into(self, net: Network, l: LinkId) -> float:
        return sum(self.fifo.get((k, l), 0.0) for k in net.upstream[l])

    def nonfifo_into(self, net: Network, l: LinkId) -> float:
        return sum(self.nonfifo.get((k, l), 0.0) for k in net.upstream[l])

    def total_into(self, net: Network, l: LinkId) -> float:
        return self.fifo_into(net, l) + self.nonfifo_into(net, l)

    def pairs_out_of(self, net: Network, l: LinkId) -> float:
        return sum(self.pair(l, j) for j in net.downstream[l])


def _min2(a: float, b: float, rec: Optional[list]) -> float:
    """min with branch recording; ties resolve to the first argument."""
    if b < a:
        if rec is not None:
            rec.append(1)
        return b
    if rec is not None:
        rec.append(0)
    return a


def _alpha_ratio(sup_l: float, beta_l: float, total_demand: float, rec: Optional[list]) -> float:
    """min{1, sup / (beta * total_demand)}; 1 when nothing is arriving."""
    denom = beta_l * total_demand
    if denom == 0.0:
        if rec is not None:
            rec.append(-1)
        return 1.0
    return _min2(1.0, sup_l / denom, rec)


def _alpha_min_over(ratios: Sequence[float], rec: Optional[list]) -> float:
    """min{1, min(ratios)} recording the argmin (0 = the cap at 1)."""
    best = 1.0
    arg = 0
    for i, r in enumerate(ratios):
        if r < best:
            best = r
            arg = i + 1
    if rec is not None:
        rec.append(arg)
    return best


def _junction_flows(
    model: JunctionModel,
    params: Mapping[LinkId, LinkParams],
    v: JunctionId,
    ins: tuple[LinkId, ...],
    outs: tuple[LinkId, ...],
    dem: Mapping[LinkId, float],
    sup: Mapping[LinkId, float],
    fifo: dict,
    nonfifo: dict,
    rec: Optional[list],
) -> None:
    """Write the pair flows through one junction into fifo/nonfifo.

    dem must cover the incoming links and sup the outgoing links; callers
    may patch sup to evaluate surrogate sibling densities without touching
    the rest of the network.
    """
    kind = model.kind

    if kind == "non_fifo":
        total = 0.0
        for j in ins:
            total += dem[j]
        for l in outs:
            beta = params[l].turn_ratio
            a = _alpha_ratio(sup[l], beta, total, rec)
            ab = a * beta
            for k in ins:
                nonfifo[(k, l)] = ab * dem[k]
                fifo[(k, l)] = 0.0
        return

    if kind == "full_fifo" or (
        kind in ("partial_fifo_lanes", "multi_set_fifo") and len(outs) == 1
    ):
        # Single exit has no siblings: the whole flow is FIFO through it.
        total = 0.0
        for j in ins:
            total += dem[j]
        if total == 0.0:
            if rec is not None:
                rec.append(-1)
            a = 1.0
        else:
            a = _alpha_min_over(
                [sup[k] / (params[k].turn_ratio * total) for k in outs], rec
            )
        for l in outs:
            ab = a * params[l].turn_ratio
            for k in ins:
                fifo[(k, l)] = ab * dem[k]
                nonfifo[(k, l)] = 0.0
        return

    if kind == "convex_combo":
        total = 0.0
        for j in ins:
            total += dem[j]
        if total == 0.0:
            if rec is not None:
                rec.append(-1)
            a_f = 1.0
        else:
            a_f = _alpha_min_over(
                [sup[k] / (params[k].turn_ratio * total) for k in outs], rec
            )
        for l in outs:
            beta = params[l].turn_ratio
            a_nf = _alpha_ratio(sup[l], beta, total, rec)
            eta = model.fifo_share[l]
            cf = eta * a_f * beta
            cn = (1.0 - eta) * a_nf * beta
            for k in ins:
                fifo[(k, l)] = cf * dem[k]
                nonfifo[(k, l)] = cn * dem[k]
        return

    # partial_fifo_lanes / multi_set_fifo at a true diverge
    if len(ins) != 1:
        raise DivergeRuleViolation(
            f"junction {v!r} has {len(ins)} incoming links; "
            f"{kind} needs exactly one at a diverge"
        )
    k = ins[0]
    dk = dem[k]

    if kind == "partial_fifo_lanes":
        if dk == 0.0:
            if rec is not None:
                rec.append(-1)
            a_f = 1.0
        else:
            a_f = _alpha_min_over(
                [sup[j] / (params[j].turn_ratio * dk) for j in outs], rec
            )
        for l in outs:
            beta_dk = params[l].turn_ratio * dk
            eta = model.fifo_share[l]
            f_f = eta * a_f * beta_dk
            f_nf = _min2((1.0 - eta) * beta_dk, sup[l] - f_f, rec)
            fifo[(k, l)] = f_f
            # the leftover-supply branch is nonnegative in exact arithmetic;
            # clip the ulp-level negatives rounding can leave
            nonfifo[(k, l)] = f_nf if f_nf > 0.0 else 0.0
        return

    sets = model.restrictions.get(v, ())
    alphas = []
    for rs in sets:
        if dk == 0.0:
            if rec is not None:
                rec.append(-1)
            alphas.append(1.0)
        else:
            alphas.append(
                _alpha_min_over(
                    [
                        sup[j] / (params[j].turn_ratio * dk)
                        for j in rs.sorted_members()
                    ],
                    rec,
                )
            )
    for l in outs:
        beta_dk = params[l].turn_ratio * dk
        f_f = 0.0
        residual = 1.0
        for rs, a in zip(sets, alphas):
            eta = rs.shares.get(l, 0.0)
            residual -= eta
            f_f += eta * a * beta_dk
        f_nf = _min2(residual * beta_dk, sup[l] - f_f, rec)
        fifo[(k, l)] = f_f
        nonfifo[(k, l)] = f_nf if f_nf > 0.0 else 0.0


def _curves_at(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    x,
    rec: Optional[list] = None,
) -> tuple[dict[LinkId, float], dict[LinkId, float]]:
    """Clamped demand/supply of every link at state x (positional array).

    Piecewise-linear breakpoints are kinks of the flow field too, so the
    active segment of every such curve joins the branch record.
    """
    xv = np.asarray(x, dtype=float).tolist()
    dem: dict[LinkId, float] = {}
    sup: dict[LinkId, float] = {}
    for i, l in enumerate(net.link_order):
        p = params[l]
        xi = xv[i]
        if xi < 0.0:
            xi = 0.0
        elif xi > p.jam_density:
            xi = p.jam_density
        dcurve = p.demand
        scurve = p.supply
        dem[l] = dcurve(xi)
        sup[l] = scurve(xi)
        if rec is not None:
            if type(dcurve) is PiecewiseLinear:
                rec.append(dcurve.segment(xi))
            if type(scurve) is PiecewiseLinear:
                rec.append(scurve.segment(xi))
    return dem, sup


def link_to_link_flows(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    model: JunctionModel,
    x,
    record: Optional[list] = None,
) -> FlowBreakdown:
    """Evaluate every flow at state x (clamped into the box).

    `record`, when given, collects the active branch of every min/argmin in
    a fixed deterministic order; equal records at two states mean the flow
    field is on the same smooth piece between them.
    """
    dem, sup = _curves_at(net, params, x, record)

    inflow_exo: dict[LinkId, float] = {}
    for l in net.entry_links:
        inflow_exo[l] = _min2(params[l].inflow_demand, sup[l], record)

    fifo: dict[tuple[LinkId, LinkId], float] = {}
    nonfifo: dict[tuple[LinkId, LinkId], float] = {}
    for v in net.junction_order:
        ins = net.in_links[v]
        outs = net.out_links[v]
        if ins and outs:
            _junction_flows(model, params, v, ins, outs, dem, sup, fifo, nonfifo, record)

    outflow_exo: dict[LinkId, float] = {}
    for l in net.link_order:
        down = net.downstream[l]
        if down:
            total = 0.0
            for j in down:
                total += fifo[(l, j)] + nonfifo[(l, j)]
            outflow_exo[l] = params[l].exit_fraction * total
        else:
            outflow_exo[l] = dem[l]

    return FlowBreakdown(fifo=fifo, nonfifo=nonfifo, inflow_exo=inflow_exo, outflow_exo=outflow_exo)


def alpha_nonfifo(
    net: Network, params: Mapping[LinkId, LinkParams], x, l: LinkId
) -> float:
    """Supply ratio limiting non-FIFO flow into l: min{1, s_l / (beta_l * sum
    of upstream demands)}, taken as 1 when no upstream demand."""
    ups = net.upstream[l]
    if not ups:
        raise ValueError(f"link {l!r} has no upstream links")
    dem, sup = _curves_at(net, params, x)
    total = sum(dem[j] for j in ups)
    return _alpha_ratio(sup[l], params[l].turn_ratio, total, None)


def alpha_fifo(
    net: Network, params: Mapping[LinkId, LinkParams], x, v: JunctionId
) -> float:
    """Junction-wide FIFO throttle: the worst supply ratio over outgoing
    links, capped at 1; 1 when no upstream demand."""
    outs = net.out_links[v]
    if not outs:
        raise ValueError(f"junction {v!r} has no outgoing links")
    dem, sup = _curves_at(net, params, x)
    total = sum(dem[j] for j in net.in_links[v])
    if total == 0.0:
        return 1.0
    return _alpha_min_over(
        [sup[k] / (params[k].turn_ratio * total) for k in outs], None
    )


def alpha_phi(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    x,
    v: JunctionId,
    members: Sequence[LinkId],
) -> float:
    """Throttle of one FIFO restriction set: worst supply ratio over its
    members against the unique upstream demand."""
    ins = net.in_links[v]
    if len(ins) != 1:
        raise DivergeRuleViolation(
            f"junction {v!r} has {len(ins)} incoming links; restriction sets need exactly one"
        )
    dem, sup = _curves_at(net, params, x)
    dk = dem[ins[0]]
    if dk == 0.0:
        return 1.0
    return _alpha_min_over(
        [sup[j] / (params[j].turn_ratio * dk) for j in sorted(members)], None
    )


def exogenous_inflow(
    net: Network, params: Mapping[LinkId, LinkParams], x, l: LinkId
) -> float:
    """min{inflow_demand, supply} on entry links, 0 elsewhere."""
    if l not in net.entry_links:
        return 0.0
    p = params[l]
    xi = min(max(float(x[net.index[l]]), 0.0), p.jam_density)
    return min(p.inflow_demand, p.supply(xi))


def exogenous_outflow(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    x,
    l: LinkId,
    total_downstream_outflow: float,
) -> float:
    """exit_fraction * junction outflow, or the full demand on sink links."""
    p = params[l]
    if net.downstream[l]:
        return p.exit_fraction * total_downstream_outflow
    xi = min(max(float(x[net.index[l]]), 0.0), p.jam_density)
    return p.demand(xi)


def vector_field(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    model: JunctionModel,
    x,
) -> np.ndarray:
    """Density rate per link: inflows minus outflows, exogenous included."""
    bd = link_to_link_flows(net, params, model, x)
    fifo, nonfifo = bd.fifo, bd.nonfifo
    out = np.empty(net.n)
    for i, l in enumerate(net.link_order):
        acc = bd.inflow_exo.get(l, 0.0) - bd.outflow_exo[l]
        for k in net.upstream[l]:
            acc += fifo[(k, l)] + nonfifo[(k, l)]
        for j in net.downstream[l]:
            acc -= fifo[(l, j)] + nonfifo[(l, j)]
        out[i] = acc
    return out


def branch_signature(
    net: Network,
    params: Mapping[LinkId, LinkParams],
    model: JunctionModel,
    x,
) -> tuple[int, ...]:
    """Active-branch fingerprint of the flow field at x."""
    rec: list[int] = []
    link_to_link_flows(net, params, model, x, record=rec)
    return tuple(rec)
