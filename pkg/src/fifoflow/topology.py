"""Directed traffic network with precomputed incidence sets.

A network is a directed multigraph of links and junctions. Each link has an
optional tail junction (where its traffic comes from) and an optional head
junction (where its traffic goes); a missing junction marks a network
boundary. The incidence algebra used by every flow rule:

    in_links[v]   links whose head is v (traffic arriving at v)
    out_links[v]  links whose tail is v (traffic leaving v)
    upstream[l]   in_links[tail(l)]   -- links feeding l's tail junction
    downstream[l] out_links[head(l)]  -- links fed by l's head junction
    adjacent[l]   out_links[tail(l)] minus l -- sibling outgoing links

Entry links (no upstream links at all) are the only place exogenous traffic
enters the network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence

if TYPE_CHECKING:  # only for annotations; avoids an import cycle
    from .junctions import JunctionModel
    from .links import LinkParams

LinkId = str
JunctionId = str


class TopologyError(ValueError):
    """Structural defect that prevents building a network."""


class DuplicateLinkId(TopologyError):
    pass


class SelfLoop(TopologyError):
    pass


@dataclass(frozen=True)
class Violation:
    """One structural finding, reported as data rather than raised."""

    code: str       # "diverge_rule" | "turn_ratio_sum" | "turn_ratio_exit_sum"
    severity: str   # "error" | "warning"
    subject: str    # link or junction id
    message: str

    def __str__(self) -> str:
        return f"[{self.severity}] {self.code} at {self.subject!r}: {self.message}"


@dataclass(frozen=True)
class Network:
    """Immutable directed network; safe for concurrent reads.

    All incidence sets are precomputed at construction and stored as sorted
    tuples so iteration order (and therefore every sum over links) is
    deterministic.
    """

    edges: tuple[tuple[LinkId, Optional[JunctionId], Optional[JunctionId]], ...]
    link_order: tuple[LinkId, ...]
    index: Mapping[LinkId, int]
    junction_order: tuple[JunctionId, ...]
    tail: Mapping[LinkId, Optional[JunctionId]]
    head: Mapping[LinkId, Optional[JunctionId]]
    in_links: Mapping[JunctionId, tuple[LinkId, ...]]
    out_links: Mapping[JunctionId, tuple[LinkId, ...]]
    upstream: Mapping[LinkId, tuple[LinkId, ...]]
    downstream: Mapping[LinkId, tuple[LinkId, ...]]
    adjacent: Mapping[LinkId, tuple[LinkId, ...]]
    entry_links: tuple[LinkId, ...]
    # nonempty adjacency classes: links sharing an adjacency set share one
    # surrogate-state evaluation in the decomposition
    adjacency_classes: tuple[tuple[frozenset[LinkId], tuple[LinkId, ...]], ...] = field(
        default=()
    )

    @property
    def n(self) -> int:
        return len(self.link_order)

    def index_of(self, link: LinkId) -> int:
        return self.index[link]

    def incident_pairs(self) -> tuple[tuple[LinkId, LinkId], ...]:
        """All (from, to) pairs connected through a junction, sorted."""
        pairs = []
        for l in self.link_order:
            for k in self.upstream[l]:
                pairs.append((k, l))
        return tuple(sorted(pairs))


def build_network(
    edges: Iterable[Sequence[Optional[str]]],
) -> Network:
    """Build a network from (link_id, tail_junction, head_junction) triples.

    Either junction may be None to mark a network boundary. Raises
    DuplicateLinkId / SelfLoop on malformed input.
    """
    norm: list[tuple[LinkId, Optional[JunctionId], Optional[JunctionId]]] = []
    seen: set[LinkId] = set()
    for entry in edges:
        link, tail, head = entry
        link = str(link)
        tail = None if tail is None else str(tail)
        head = None if head is None else str(head)
        if link in seen:
            raise DuplicateLinkId(f"link id {link!r} appears more than once")
        seen.add(link)
        if tail is not None and tail == head:
            raise SelfLoop(f"link {link!r} has identical tail and head {tail!r}")
        norm.append((link, tail, head))

    link_order = tuple(sorted(l for l, _, _ in norm))
    index = {l: i for i, l in enumerate(link_order)}
    tail_map = {l: t for l, t, _ in norm}
    head_map = {l: h for l, _, h in norm}

    junctions = sorted(
        {j for _, t, h in norm for j in (t, h) if j is not None}
    )
    in_links = {v: tuple(sorted(l for l in link_order if head_map[l] == v)) for v in junctions}
    out_links = {v: tuple(sorted(l for l in link_order if tail_map[l] == v)) for v in junctions}

    upstream = {}
    downstream = {}
    adjacent = {}
    for l in link_order:
        t, h = tail_map[l], head_map[l]
        upstream[l] = in_links[t] if t is not None else ()
        downstream[l] = out_links[h] if h is not None else ()
        adjacent[l] = (
            tuple(k for k in out_links[t] if k != l) if t is not None else ()
        )

    entry = tuple(l for l in link_order if not upstream[l])

    classes: dict[frozenset[LinkId], list[LinkId]] = {}
    for l in link_order:
        if adjacent[l]:
            classes.setdefault(frozenset(adjacent[l]), []).append(l)
    adjacency_classes = tuple(
        sorted(
            ((k, tuple(v)) for k, v in classes.items()),
            key=lambda kv: kv[1],
        )
    )

    return Network(
        edges=tuple(norm),
        link_order=link_order,
        index=index,
        junction_order=tuple(junctions),
        tail=tail_map,
        head=head_map,
        in_links=in_links,
        out_links=out_links,
        upstream=upstream,
        downstream=downstream,
        adjacent=adjacent,
        entry_links=entry,
        adjacency_classes=adjacency_classes,
    )


# Warnings use a tiny slack so that turn ratios summing to exactly 1.0
# (e.g. 0.8 + 0.2) never trip on rounding.
_SUM_SLACK = 1e-9


def validate_structure(
    net: Network,
    model: "JunctionModel",
    params: Mapping[LinkId, "LinkParams"],
) -> list[Violation]:
    """Check the network/model/parameter combination, returning findings.

    Errors: diverging junctions with more than one incoming link under
    models that require a unique upstream feeder.
    Warnings: downstream turn ratios summing above 1, and the stronger
    (exit_fraction + 1) * sum > 1 which breaks the demand bound on total
    outflow.
    """
    out: list[Violation] = []
    if getattr(model, "requires_single_in_diverge", False):
        for v in net.junction_order:
            if len(net.out_links[v]) > 1 and len(net.in_links[v]) != 1:
                out.append(
                    Violation(
                        "diverge_rule",
                        "error",
                        v,
                        f"junction has {len(net.out_links[v])} outgoing links but "
                        f"{len(net.in_links[v])} incoming; this model needs exactly one "
                        "incoming link at every diverge",
                    )
                )
    for l in net.link_order:
        down = net.downstream[l]
        if not down:
            continue
        bsum = sum(params[k].turn_ratio or 0.0 for k in down)
        if bsum > 1.0 + _SUM_SLACK:
            out.append(
                Violation(
                    "turn_ratio_sum",
                    "warning",
                    l,
                    f"turn ratios downstream of {l!r} sum to {bsum:.6g} > 1",
                )
            )
        gamma = params[l].exit_fraction
        if (gamma + 1.0) * bsum > 1.0 + _SUM_SLACK:
            out.append(
                Violation(
                    "turn_ratio_exit_sum",
                    "warning",
                    l,
                    f"(exit_fraction + 1) * turn-ratio sum = {(gamma + 1.0) * bsum:.6g} > 1 "
                    f"for {l!r}; total outflow may exceed demand",
                )
            )
    return out
