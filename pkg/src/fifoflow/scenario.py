"""Scenario files: parsing, validation, and the bundled simulation setup.

The canonical on-disk form is TOML (see the repository README for the
schema); files ending in .json are accepted with the identical structure as
the interchange form. A scenario bundles the network, per-link parameters,
the junction model, and run defaults, and is fully validated at load time:
anything that loads will simulate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from . import embedding as _embedding
from .junctions import (
    ConvexCombo,
    FullFifo,
    JunctionModel,
    MultiSetFifo,
    NonFifo,
    PartialFifoLanes,
    RestrictionSet,
    branch_signature,
    link_to_link_flows,
    vector_field,
)
from .links import Affine, Exponential, LinkParams, PiecewiseLinear, curve_violations
from .topology import (
    LinkId,
    Network,
    TopologyError,
    Violation,
    build_network,
    validate_structure,
)


class ScenarioError(Exception):
    """Base class for scenario loading failures."""


class ParseError(ScenarioError):
    """The file is not syntactically valid TOML/JSON."""


class ValidationError(ScenarioError):
    """The file parsed but the scenario it describes is invalid."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid scenario:\n" + "\n".join(f"  - {p}" for p in self.problems)
        )


@dataclass(frozen=True)
class RunDefaults:
    dt: float = 1e-2
    t_final: float = 200.0
    residual_tol: float = 1e-8
    gap_tol: float = 1e-6
    audit_tolerance: float = 1e-6
    samples: int = 1000
    seed: int = 0


@dataclass(frozen=True)
class Scenario:
    """A validated network + parameters + junction model + run defaults."""

    net: Network
    params: Mapping[LinkId, LinkParams]
    model: JunctionModel
    defaults: RunDefaults = field(default_factory=RunDefaults)
    name: str = ""
    warnings: tuple[Violation, ...] = ()
    source: Optional[str] = None

    @property
    def n(self) -> int:
        return self.net.n

    @cached_property
    def _upper(self) -> np.ndarray:
        return _embedding.box_upper(self.net, self.params)

    def upper(self) -> np.ndarray:
        return self._upper.copy()

    def breakdown(self, x, record=None):
        return link_to_link_flows(self.net, self.params, self.model, x, record=record)

    def field(self, x) -> np.ndarray:
        return vector_field(self.net, self.params, self.model, x)

    def signature(self, x) -> tuple:
        return branch_signature(self.net, self.params, self.model, x)

    def decomposition(self, x, y, record=None) -> np.ndarray:
        return _embedding.decomposition(
            self.net, self.params, self.model, x, y, record=record, upper=self._upper
        )

    def embedding_rates(self, u: np.ndarray) -> np.ndarray:
        """Stacked right-hand side of the doubled system at u = [x; y]."""
        n = self.net.n
        gx, gy = _embedding.decomposition_pair(
            self.net, self.params, self.model, u[:n], u[n:], upper=self._upper
        )
        return np.concatenate([gx, gy])

    def decomposition_signature(self, x, y) -> tuple:
        return _embedding.decomposition_signature(
            self.net, self.params, self.model, x, y
        )

    def with_model(self, model: JunctionModel) -> "Scenario":
        return replace(self, model=model)


_CURVE_KINDS = ("exponential", "affine", "piecewise_linear")
_MODEL_KINDS = (
    "non_fifo",
    "full_fifo",
    "convex_combo",
    "partial_fifo_lanes",
    "multi_set_fifo",
)


def _build_curve(spec: Any, where: str, problems: list[str]):
    if not isinstance(spec, Mapping) or "kind" not in spec:
        problems.append(f"{where}: curve must be a table with a 'kind' field")
        return None
    kind = spec["kind"]
    try:
        if kind == "exponential":
            return Exponential(scale=float(spec["scale"]), rate=float(spec["rate"]))
        if kind == "affine":
            return Affine(intercept=float(spec["intercept"]))
        if kind == "piecewise_linear":
            pts = tuple((float(a), float(b)) for a, b in spec["points"])
            return PiecewiseLinear(points=pts)
    except (KeyError, TypeError, ValueError) as exc:
        problems.append(f"{where}: {exc}")
        return None
    problems.append(
        f"{where}: unknown curve kind {kind!r} (expected one of {_CURVE_KINDS})"
    )
    return None


def _build_model(
    data: Mapping[str, Any],
    net: Network,
    raw_shares: Mapping[LinkId, float],
    problems: list[str],
) -> Optional[JunctionModel]:
    model_tbl = data.get("model")
    if not isinstance(model_tbl, Mapping) or "kind" not in model_tbl:
        problems.append("missing [model] table with a 'kind' field")
        return None
    kind = model_tbl["kind"]
    if kind not in _MODEL_KINDS:
        problems.append(f"unknown model kind {kind!r} (expected one of {_MODEL_KINDS})")
        return None

    def shares_required(links: list[LinkId], why: str) -> Optional[dict[LinkId, float]]:
        shares = {}
        ok = True
        for l in links:
            if l not in raw_shares:
                problems.append(f"link {l!r}: fifo_share required {why}")
                ok = False
            else:
                shares[l] = raw_shares[l]
        return shares if ok else None

    if kind in ("non_fifo", "full_fifo"):
        for l in sorted(raw_shares):
            problems.append(f"link {l!r}: fifo_share has no meaning under {kind!r}")
        return NonFifo() if kind == "non_fifo" else FullFifo()

    if kind == "convex_combo":
        with_up = [l for l in net.link_order if net.upstream[l]]
        shares = shares_required(with_up, "for every link with upstream links under convex_combo")
        if shares is None:
            return None
        try:
            return ConvexCombo(fifo_share=shares)
        except ValueError as exc:
            problems.append(str(exc))
            return None

    if kind == "partial_fifo_lanes":
        diverge_outs = [l for l in net.link_order if net.adjacent[l] and net.upstream[l]]
        for l in sorted(raw_shares):
            if l not in diverge_outs:
                if raw_shares[l] != 1.0:
                    problems.append(
                        f"link {l!r}: has no sibling links, its fifo_share is forced to 1"
                    )
        shares = shares_required(diverge_outs, "for every diverge outgoing link")
        if shares is None:
            return None
        try:
            return PartialFifoLanes(fifo_share=shares)
        except ValueError as exc:
            problems.append(str(exc))
            return None

    # multi_set_fifo
    for l in sorted(raw_shares):
        problems.append(
            f"link {l!r}: per-link fifo_share has no meaning under multi_set_fifo; "
            "use [[model.restrictions]] shares"
        )
    restrictions: dict[str, list[RestrictionSet]] = {}
    entries = model_tbl.get("restrictions", [])
    if not isinstance(entries, list):
        problems.append("[model] restrictions must be an array of tables")
        entries = []
    for idx, entry in enumerate(entries):
        where = f"model.restrictions[{idx}]"
        junction = entry.get("junction")
        if junction is None:
            problems.append(f"{where}: missing 'junction'")
            continue
        junction = str(junction)
        outs = net.out_links.get(junction)
        if outs is None:
            problems.append(f"{where}: unknown junction {junction!r}")
            continue
        if len(outs) <= 1:
            problems.append(
                f"{where}: junction {junction!r} is not a diverge; restriction sets "
                "only apply where there are sibling outgoing links"
            )
            continue
        members = entry.get("members", [])
        bad = [m for m in members if str(m) not in outs]
        if bad:
            problems.append(
                f"{where}: members {bad} are not outgoing links of {junction!r}"
            )
            continue
        if len(set(members)) != len(members):
            problems.append(f"{where}: duplicate members")
            continue
        shares_raw = entry.get("shares", {})
        try:
            rs = RestrictionSet(
                members=frozenset(str(m) for m in members),
                shares={str(k): float(v) for k, v in shares_raw.items()},
            )
        except ValueError as exc:
            problems.append(f"{where}: {exc}")
            continue
        restrictions.setdefault(junction, []).append(rs)
    try:
        return MultiSetFifo(
            restrictions={v: tuple(sets) for v, sets in restrictions.items()}
        )
    except ValueError as exc:
        problems.append(str(exc))
        return None


def build_scenario(data: Mapping[str, Any], source: Optional[str] = None) -> Scenario:
    """Validate a parsed scenario mapping; raises ValidationError."""
    problems: list[str] = []

    links_raw = data.get("links")
    if not isinstance(links_raw, list) or not links_raw:
        raise ValidationError(["scenario needs a non-empty [[links]] array"])

    edges = []
    for idx, entry in enumerate(links_raw):
        lid = entry.get("id")
        if lid is None:
            problems.append(f"links[{idx}]: missing 'id'")
            continue
        edges.append((str(lid), entry.get("from"), entry.get("to")))
    if problems:
        raise ValidationError(problems)

    try:
        net = build_network(edges)
    except TopologyError as exc:
        raise ValidationError([str(exc)]) from exc

    params: dict[LinkId, LinkParams] = {}
    raw_shares: dict[LinkId, float] = {}
    for entry in links_raw:
        lid = str(entry["id"])
        where = f"link {lid!r}"
        demand = _build_curve(entry.get("demand"), f"{where} demand", problems)
        supply = _build_curve(entry.get("supply"), f"{where} supply", problems)
        if demand is None or supply is None:
            continue
        turn_ratio = entry.get("turn_ratio")
        if net.upstream[lid] and turn_ratio is None:
            problems.append(f"{where}: turn_ratio required (link has upstream links)")
            continue
        if not net.upstream[lid] and turn_ratio is not None:
            problems.append(f"{where}: turn_ratio given but the link has no upstream links")
            continue
        if float(entry.get("inflow_demand", 0.0)) > 0.0 and lid not in net.entry_links:
            problems.append(
                f"{where}: inflow_demand given but exogenous traffic only enters at entry links"
            )
            continue
        try:
            p = LinkParams(
                jam_density=float(entry.get("jam_density", 0.0)),
                demand=demand,
                supply=supply,
                turn_ratio=None if turn_ratio is None else float(turn_ratio),
                exit_fraction=float(entry.get("exit_fraction", 0.0)),
                inflow_demand=float(entry.get("inflow_demand", 0.0)),
            )
        except ValueError as exc:
            problems.append(f"{where}: {exc}")
            continue
        for msg in curve_violations(p):
            problems.append(f"{where}: {msg}")
        params[lid] = p
        if "fifo_share" in entry:
            share = float(entry["fifo_share"])
            if not 0.0 <= share <= 1.0:
                problems.append(f"{where}: fifo_share must lie in [0, 1], got {share}")
                continue
            raw_shares[lid] = share

    model = None
    if len(params) == net.n and not problems:
        model = _build_model(data, net, raw_shares, problems)

    warnings: tuple[Violation, ...] = ()
    if model is not None and not problems:
        findings = validate_structure(net, model, params)
        errors = [f for f in findings if f.severity == "error"]
        warnings = tuple(f for f in findings if f.severity == "warning")
        problems.extend(str(f) for f in errors)

    defaults_tbl = data.get("defaults", {})
    defaults = RunDefaults()
    if isinstance(defaults_tbl, Mapping):
        known = {
            "dt": float,
            "t_final": float,
            "residual_tol": float,
            "gap_tol": float,
            "audit_tolerance": float,
            "samples": int,
            "seed": int,
        }
        kwargs = {}
        for k, v in defaults_tbl.items():
            if k not in known:
                problems.append(f"[defaults]: unknown key {k!r}")
            else:
                kwargs[k] = known[k](v)
        if kwargs:
            defaults = RunDefaults(**kwargs)
    else:
        problems.append("[defaults] must be a table")

    if problems:
        raise ValidationError(problems)
    assert model is not None

    return Scenario(
        net=net,
        params=params,
        model=model,
        defaults=defaults,
        name=str(data.get("name", "")),
        warnings=warnings,
        source=source,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario file (.json or TOML)."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix == ".json":
        try:
            data = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    else:
        try:
            data = tomllib.loads(raw.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ParseError(f"{path}: top level must be a table/object")
    return build_scenario(data, source=str(path))
