"""Numerical audits of the structural flow conditions plus convergence
certification via the extreme embedding trajectory.

The audits sample states uniformly in the box (deterministically from a
seed) and check finite-difference sign conditions of the flow breakdown.
Probes whose stencil straddles a min-branch switch are excluded from
pass/fail but counted, so thin-set coverage gaps stay visible. The nine
flow conditions:

    A1  exogenous inflow to a link never falls when another density rises
    A2  exogenous outflow never rises when another density rises
    A3  non-FIFO pair flow only reads densities incident to its junction
    A4  FIFO pair flow only reads densities incident to its junction
    A5  total FIFO inflow to a link is nondecreasing in upstream densities
    A6  total non-FIFO inflow is nondecreasing in upstream densities
    A7  total pair outflow of a link is nonincreasing in other incident
        densities
    A8  non-FIFO pair flow is nondecreasing in sibling densities
    A9  FIFO pair flow is nonincreasing in sibling densities

and the three decomposition conditions:

    D1.identity  g(x, x) reproduces the vector field exactly
    D1.x-sign    off-diagonal partials of g in x are nonnegative
    D1.y-sign    partials of g in y are nonpositive

Certification integrates the doubled system from the extreme corner
(0, jam) and certifies a globally attractive equilibrium when the
trajectory is order-monotone, settles, and both components meet. It is
one-sided: an Inconclusive result never asserts divergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .junctions import FlowBreakdown
from .numerics import FdSpec, integrate, jacobian_fd
from .scenario import Scenario
from .topology import LinkId

_IDENTITY_TOL = 1e-12


@dataclass
class ConditionResult:
    condition: str
    description: str
    passed: bool = True
    violation: float = 0.0
    witness: Optional[dict] = None
    probes: int = 0
    masked: int = 0

    def note(self, excess: float, witness: dict) -> None:
        if excess > self.violation:
            self.violation = excess
            self.witness = witness
        self.passed = False


@dataclass
class AuditReport:
    kind: str
    conditions: dict[str, ConditionResult]
    samples: int
    seed: int
    tolerance: float
    scenario: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def failed_conditions(self) -> list[str]:
        return [k for k, c in self.conditions.items() if not c.passed]

    def as_table(self) -> str:
        rows = [
            f"{'condition':<14} {'result':<6} {'violation':>12} {'masked/probes':>16}  description"
        ]
        for name, c in self.conditions.items():
            rows.append(
                f"{name:<14} {'pass' if c.passed else 'FAIL':<6} "
                f"{c.violation:>12.3e} {f'{c.masked}/{c.probes}':>16}  {c.description}"
            )
        return "\n".join(rows)

    def to_mapping(self) -> dict:
        conds: dict[str, dict] = {}
        for name, c in self.conditions.items():
            entry: dict = {
                "description": c.description,
                "passed": c.passed,
                "violation": float(c.violation),
                "probes": c.probes,
                "masked": c.masked,
            }
            if c.witness is not None:
                entry["witness"] = {
                    k: (list(map(float, v)) if isinstance(v, (list, tuple, np.ndarray)) else v)
                    for k, v in c.witness.items()
                }
            conds[name] = entry
        return {
            "kind": self.kind,
            "scenario": self.scenario,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": float(self.tolerance),
            "passed": self.passed,
            "conditions": conds,
        }


_A_DESCRIPTIONS = {
    "A1": "exogenous inflow nondecreasing in other links' densities",
    "A2": "exogenous outflow nonincreasing in other links' densities",
    "A3": "non-FIFO pair flow local to its junction (zero elsewhere)",
    "A4": "FIFO pair flow local to its junction (zero elsewhere)",
    "A5": "total FIFO inflow nondecreasing in upstream densities",
    "A6": "total non-FIFO inflow nondecreasing in upstream densities",
    "A7": "total pair outflow nonincreasing in other incident densities",
    "A8": "non-FIFO pair flow nondecreasing in sibling densities",
    "A9": "FIFO pair flow nonincreasing in sibling densities",
}


def _sample_states(
    rng: np.random.Generator, count: int, upper: np.ndarray, h: np.ndarray
) -> np.ndarray:
    """Uniform box samples, clipped interior so FD probes stay in the box."""
    states = rng.uniform(size=(count, upper.shape[0])) * upper
    return np.clip(states, h, upper - h)


def _relevancy(scenario: Scenario):
    """Static per-coordinate lists of which flow entries each condition
    inspects; computed once per network."""
    net = scenario.net
    pairs = net.incident_pairs()
    incident = {
        v: frozenset(net.in_links[v]) | frozenset(net.out_links[v])
        for v in net.junction_order
    }
    up_sets = {l: frozenset(net.upstream[l]) for l in net.link_order}
    adj_sets = {l: frozenset(net.adjacent[l]) for l in net.link_order}

    rel = {}
    for mid in net.link_order:
        others = tuple(l for l in net.link_order if l != mid)
        nonlocal_pairs = tuple(
            (k, l) for (k, l) in pairs if mid not in incident[net.head[k]]
        )
        a5 = tuple(l for l in net.link_order if mid in up_sets[l])
        a7 = tuple(
            l
            for l in others
            if net.head[l] is not None and mid in incident[net.head[l]]
        )
        a89 = tuple((k, l) for (k, l) in pairs if mid in adj_sets[l])
        rel[mid] = {
            "others": others,
            "nonlocal_pairs": nonlocal_pairs,
            "a5": a5,
            "a7": a7,
            "a89": a89,
        }
    return rel


def check_assumptions(
    scenario: Scenario,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    tolerance: Optional[float] = None,
    fd: Optional[FdSpec] = None,
    flow_fn: Optional[Callable[[np.ndarray], FlowBreakdown]] = None,
    signature_fn: Optional[Callable[[np.ndarray], tuple]] = None,
) -> AuditReport:
    """Finite-difference audit of the nine flow sign conditions.

    flow_fn/signature_fn default to the scenario's own model; tests inject
    corrupted evaluators through them to prove violations are caught.
    """
    net = scenario.net
    d = scenario.defaults
    n_samples = d.samples if n_samples is None else n_samples
    seed = d.seed if seed is None else seed
    tolerance = d.audit_tolerance if tolerance is None else tolerance
    upper = scenario.upper()
    fd = fd or FdSpec.for_box(upper)
    flow_fn = flow_fn or scenario.breakdown
    signature_fn = signature_fn or scenario.signature

    h = fd.step_for(net.n)
    r = fd.radius_for(net.n)
    rel = _relevancy(scenario)
    conds = {
        name: ConditionResult(name, _A_DESCRIPTIONS[name]) for name in _A_DESCRIPTIONS
    }

    rng = np.random.default_rng(seed)
    states = _sample_states(rng, n_samples, upper, h)

    def witness(x, entry: str, wrt: LinkId) -> dict:
        return {"state": [float(v) for v in x], "entry": entry, "wrt": wrt}

    for x in states:
        for j, mid in enumerate(net.link_order):
            e = np.zeros(net.n)
            e[j] = 1.0
            lists = rel[mid]
            if signature_fn(x + r[j] * e) != signature_fn(x - r[j] * e):
                for name, count in (
                    ("A1", len(lists["others"])),
                    ("A2", len(lists["others"])),
                    ("A3", len(lists["nonlocal_pairs"])),
                    ("A4", len(lists["nonlocal_pairs"])),
                    ("A5", len(lists["a5"])),
                    ("A6", len(lists["a5"])),
                    ("A7", len(lists["a7"])),
                    ("A8", len(lists["a89"])),
                    ("A9", len(lists["a89"])),
                ):
                    conds[name].masked += count
                continue
            bp = flow_fn(x + h[j] * e)
            bm = flow_fn(x - h[j] * e)
            inv = 1.0 / (2.0 * h[j])

            c = conds["A1"]
            for l in lists["others"]:
                dv = (bp.inflow_exo.get(l, 0.0) - bm.inflow_exo.get(l, 0.0)) * inv
                c.probes += 1
                if dv < -tolerance:
                    c.note(-tolerance - dv, witness(x, f"inflow_exo[{l}]", mid))

            c = conds["A2"]
            for l in lists["others"]:
                dv = (bp.outflow_exo[l] - bm.outflow_exo[l]) * inv
                c.probes += 1
                if dv > tolerance:
                    c.note(dv - tolerance, witness(x, f"outflow_exo[{l}]", mid))

            c3, c4 = conds["A3"], conds["A4"]
            for key in lists["nonlocal_pairs"]:
                dnf = (bp.nonfifo[key] - bm.nonfifo[key]) * inv
                dff = (bp.fifo[key] - bm.fifo[key]) * inv
                c3.probes += 1
                c4.probes += 1
                tag = f"[{key[0]}->{key[1]}]"
                if abs(dnf) > tolerance:
                    c3.note(abs(dnf) - tolerance, witness(x, "nonfifo" + tag, mid))
                if abs(dff) > tolerance:
                    c4.note(abs(dff) - tolerance, witness(x, "fifo" + tag, mid))

            c5, c6 = conds["A5"], conds["A6"]
            for l in lists["a5"]:
                dff = sum(
                    bp.fifo[(k, l)] - bm.fifo[(k, l)] for k in net.upstream[l]
                ) * inv
                dnf = sum(
                    bp.nonfifo[(k, l)] - bm.nonfifo[(k, l)] for k in net.upstream[l]
                ) * inv
                c5.probes += 1
                c6.probes += 1
                if dff < -tolerance:
                    c5.note(-tolerance - dff, witness(x, f"fifo_into[{l}]", mid))
                if dnf < -tolerance:
                    c6.note(-tolerance - dnf, witness(x, f"nonfifo_into[{l}]", mid))

            c = conds["A7"]
            for l in lists["a7"]:
                dv = sum(
                    (bp.fifo[(l, k)] + bp.nonfifo[(l, k)])
                    - (bm.fifo[(l, k)] + bm.nonfifo[(l, k)])
                    for k in net.downstream[l]
                ) * inv
                c.probes += 1
                if dv > tolerance:
                    c.note(dv - tolerance, witness(x, f"pairs_out[{l}]", mid))

            c8, c9 = conds["A8"], conds["A9"]
            for key in lists["a89"]:
                dnf = (bp.nonfifo[key] - bm.nonfifo[key]) * inv
                dff = (bp.fifo[key] - bm.fifo[key]) * inv
                c8.probes += 1
                c9.probes += 1
                tag = f"[{key[0]}->{key[1]}]"
                if dnf < -tolerance:
                    c8.note(-tolerance - dnf, witness(x, "nonfifo" + tag, mid))
                if dff > tolerance:
                    c9.note(dff - tolerance, witness(x, "fifo" + tag, mid))

    return AuditReport(
        kind="assumptions",
        conditions=conds,
        samples=n_samples,
        seed=seed,
        tolerance=tolerance,
        scenario=scenario.name,
    )


def check_decomposition(
    scenario: Scenario,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    tolerance: Optional[float] = None,
    fd: Optional[FdSpec] = None,
) -> AuditReport:
    """Audit the diagonal identity and the decomposition sign conditions."""
    net = scenario.net
    d = scenario.defaults
    n_samples = d.samples if n_samples is None else n_samples
    seed = d.seed if seed is None else seed
    tolerance = d.audit_tolerance if tolerance is None else tolerance
    upper = scenario.upper()
    fd = fd or FdSpec.for_box(upper)
    n = net.n
    h = fd.step_for(n)
    r = fd.radius_for(n)
    h2 = np.concatenate([h, h])
    r2 = np.concatenate([r, r])

    conds = {
        "D1.identity": ConditionResult(
            "D1.identity", "g(x, x) equals the vector field exactly"
        ),
        "D1.x-sign": ConditionResult(
            "D1.x-sign", "off-diagonal partials of g in x are nonnegative"
        ),
        "D1.y-sign": ConditionResult(
            "D1.y-sign", "partials of g in y are nonpositive"
        ),
    }

    def g_of(u: np.ndarray) -> np.ndarray:
        return scenario.decomposition(u[:n], u[n:])

    def sig_of(u: np.ndarray) -> tuple:
        return scenario.decomposition_signature(u[:n], u[n:])

    rng = np.random.default_rng(seed)
    xs = _sample_states(rng, n_samples, upper, h)
    ys = _sample_states(rng, n_samples, upper, h)

    ident = conds["D1.identity"]
    for x in xs:
        ident.probes += 1
        gap = float(np.max(np.abs(scenario.decomposition(x, x) - scenario.field(x))))
        if gap > _IDENTITY_TOL:
            ident.note(
                gap - _IDENTITY_TOL,
                {"state": [float(v) for v in x], "entry": "g(x,x)-F(x)", "wrt": ""},
            )

    cx, cy = conds["D1.x-sign"], conds["D1.y-sign"]
    for x, y in zip(xs, ys):
        u = np.concatenate([x, y])
        for j in range(2 * n):
            e = np.zeros(2 * n)
            e[j] = 1.0
            if sig_of(u + r2[j] * e) != sig_of(u - r2[j] * e):
                if j < n:
                    cx.masked += n - 1
                else:
                    cy.masked += n
                continue
            col = (g_of(u + h2[j] * e) - g_of(u - h2[j] * e)) / (2.0 * h2[j])
            if j < n:
                wrt = net.link_order[j]
                for i in range(n):
                    if i == j:
                        continue
                    cx.probes += 1
                    if col[i] < -tolerance:
                        cx.note(
                            -tolerance - col[i],
                            {
                                "state": [float(v) for v in u],
                                "entry": f"g[{net.link_order[i]}] wrt x[{wrt}]",
                                "wrt": wrt,
                            },
                        )
            else:
                wrt = net.link_order[j - n]
                for i in range(n):
                    cy.probes += 1
                    if col[i] > tolerance:
                        cy.note(
                            col[i] - tolerance,
                            {
                                "state": [float(v) for v in u],
                                "entry": f"g[{net.link_order[i]}] wrt y[{wrt}]",
                                "wrt": wrt,
                            },
                        )

    return AuditReport(
        kind="decomposition",
        conditions=conds,
        samples=n_samples,
        seed=seed,
        tolerance=tolerance,
        scenario=scenario.name,
    )


@dataclass
class SignSummary:
    classification: str  # "zero" | "nonnegative" | "nonpositive" | "mixed" | "unsampled"
    low: float
    high: float
    probes: int
    masked: int


@dataclass
class SignSurvey:
    """Per-entry sign behavior of the vector-field Jacobian over the box."""

    entries: dict[tuple[LinkId, LinkId], SignSummary]
    samples: int
    seed: int
    tolerance: float
    orthant_consistent: bool
    scenario: str = ""

    def mixed_entries(self) -> list[tuple[LinkId, LinkId]]:
        return [k for k, s in self.entries.items() if s.classification == "mixed"]

    def as_table(self) -> str:
        rows = [f"{'entry':<16} {'class':<12} {'min':>12} {'max':>12} {'masked/probes':>14}"]
        for (i, j), s in self.entries.items():
            label = f"dF[{i}]/dx[{j}]"
            rows.append(
                f"{label:<16} {s.classification:<12} {s.low:>12.3e} "
                f"{s.high:>12.3e} {f'{s.masked}/{s.probes}':>14}"
            )
        rows.append(
            "sign pattern admits a consistent orthant order: "
            + ("yes" if self.orthant_consistent else "no")
        )
        return "\n".join(rows)

    def to_mapping(self) -> dict:
        return {
            "scenario": self.scenario,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": float(self.tolerance),
            "orthant_consistent": self.orthant_consistent,
            "mixed_entries": [f"{i}->{j}" for i, j in self.mixed_entries()],
            "entries": {
                f"{i}->{j}": {
                    "classification": s.classification,
                    "min": float(s.low),
                    "max": float(s.high),
                    "probes": s.probes,
                    "masked": s.masked,
                }
                for (i, j), s in self.entries.items()
            },
        }


def _orthant_consistent(
    n: int, constraints: list[tuple[int, int, int]]
) -> bool:
    """Is there a sign vector s with s_i * s_j = want for each constraint?
    Parity union-find over the links."""
    parent = list(range(n))
    parity = [0] * n  # parity relative to parent

    def find(a: int) -> tuple[int, int]:
        p = 0
        while parent[a] != a:
            p ^= parity[a]
            a = parent[a]
        return a, p

    for i, j, want in constraints:
        ri, pi = find(i)
        rj, pj = find(j)
        rel = 0 if want > 0 else 1
        if ri == rj:
            if pi ^ pj != rel:
                return False
        else:
            parent[ri] = rj
            parity[ri] = pi ^ pj ^ rel
    return True


def jacobian_sign_survey(
    scenario: Scenario,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    tolerance: Optional[float] = None,
    fd: Optional[FdSpec] = None,
) -> SignSurvey:
    """Sample the Jacobian of the vector field and classify each
    off-diagonal entry as sign-stable or mixed-sign. An entry is mixed when
    it falls below -tolerance at some sampled state and above +tolerance at
    another; such entries rule out the simple sign-stability route to a
    decomposition function."""
    net = scenario.net
    d = scenario.defaults
    n_samples = d.samples if n_samples is None else n_samples
    seed = d.seed if seed is None else seed
    tolerance = d.audit_tolerance if tolerance is None else tolerance
    upper = scenario.upper()
    fd = fd or FdSpec.for_box(upper)
    n = net.n
    h = fd.step_for(n)

    lo = np.full((n, n), np.inf)
    hi = np.full((n, n), -np.inf)
    probes = np.zeros((n, n), dtype=int)
    masked_ct = np.zeros((n, n), dtype=int)

    rng = np.random.default_rng(seed)
    for x in _sample_states(rng, n_samples, upper, h):
        J, mask = jacobian_fd(scenario.field, x, fd, signature=scenario.signature)
        for j in range(n):
            if mask[0, j]:
                masked_ct[:, j] += 1
                continue
            probes[:, j] += 1
            lo[:, j] = np.minimum(lo[:, j], J[:, j])
            hi[:, j] = np.maximum(hi[:, j], J[:, j])

    entries: dict[tuple[LinkId, LinkId], SignSummary] = {}
    constraints: list[tuple[int, int, int]] = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if probes[i, j] == 0:
                cls = "unsampled"
                low, high = 0.0, 0.0
            else:
                low, high = float(lo[i, j]), float(hi[i, j])
                neg = low < -tolerance
                pos = high > tolerance
                if neg and pos:
                    cls = "mixed"
                elif pos:
                    cls = "nonnegative"
                    constraints.append((i, j, +1))
                elif neg:
                    cls = "nonpositive"
                    constraints.append((i, j, -1))
                else:
                    cls = "zero"
            entries[(net.link_order[i], net.link_order[j])] = SignSummary(
                classification=cls,
                low=low,
                high=high,
                probes=int(probes[i, j]),
                masked=int(masked_ct[i, j]),
            )

    consistent = not any(
        s.classification == "mixed" for s in entries.values()
    ) and _orthant_consistent(n, constraints)

    return SignSurvey(
        entries=entries,
        samples=n_samples,
        seed=seed,
        tolerance=tolerance,
        orthant_consistent=consistent,
        scenario=scenario.name,
    )


@dataclass
class ConvergenceCertificate:
    """Outcome of the extreme-trajectory certification run.

    status is "certified" only when every check passed, in which case
    equilibrium holds the midpoint of the settled embedding corners and is,
    up to the reported gap, the globally attractive equilibrium of the
    plain dynamics. "inconclusive" asserts nothing.
    """

    status: str
    link_order: tuple[LinkId, ...]
    equilibrium: Optional[np.ndarray]
    residual: float
    gap: float
    initial_signs_ok: bool
    monotone: bool
    settled: bool
    horizon: float
    dt: float
    residual_tol: float
    gap_tol: float
    hints: tuple[str, ...] = ()
    tail_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    tail_x: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    tail_y: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def as_table(self) -> str:
        rows = [
            f"status            {self.status}",
            f"horizon / dt      {self.horizon:g} / {self.dt:g}",
            f"initial signs ok  {self.initial_signs_ok}",
            f"order-monotone    {self.monotone}",
            f"settled           {self.settled}",
            f"gap |x*-y*|       {self.gap:.3e} (tol {self.gap_tol:g})",
            f"residual |F(xe)|  {self.residual:.3e} (tol {self.residual_tol:g})",
        ]
        if self.equilibrium is not None:
            eq = ", ".join(
                f"{l}={float(v)!r}" for l, v in zip(self.link_order, self.equilibrium)
            )
            rows.append(f"equilibrium       {eq}")
        for hint in self.hints:
            rows.append(f"hint              {hint}")
        return "\n".join(rows)

    def to_mapping(self) -> dict:
        out: dict = {
            "status": self.status,
            "horizon": float(self.horizon),
            "dt": float(self.dt),
            "initial_signs_ok": self.initial_signs_ok,
            "monotone": self.monotone,
            "settled": self.settled,
            "gap": float(self.gap),
            "gap_tol": float(self.gap_tol),
            "residual": float(self.residual),
            "residual_tol": float(self.residual_tol),
            "hints": list(self.hints),
        }
        if self.equilibrium is not None:
            out["equilibrium"] = {
                l: float(v) for l, v in zip(self.link_order, self.equilibrium)
            }
        out["tail"] = {
            "times": [float(t) for t in self.tail_times],
            "x": [[float(v) for v in row] for row in self.tail_x],
            "y": [[float(v) for v in row] for row in self.tail_y],
        }
        return out


_SIGN_TOL = 1e-12
_TAIL_ROWS = 10


def certify_convergence(
    scenario: Scenario,
    t_horizon: Optional[float] = None,
    dt: Optional[float] = None,
    residual_tol: Optional[float] = None,
    gap_tol: Optional[float] = None,
    order_tol: float = 1e-9,
) -> ConvergenceCertificate:
    """Integrate the doubled system from (0, jam) and certify convergence.

    Certifies only when (a) the initial rates point into the order cone,
    (b) the trajectory is order-monotone at every output step, (c) the
    embedding rates have settled below residual_tol at the horizon, and
    (d) the two components meet within gap_tol; the reported equilibrium
    midpoint must then also satisfy the residual tolerance on the plain
    dynamics. Anything else is Inconclusive (never a divergence claim).
    """
    net = scenario.net
    d = scenario.defaults
    t_horizon = d.t_final if t_horizon is None else t_horizon
    dt = d.dt if dt is None else dt
    residual_tol = d.residual_tol if residual_tol is None else residual_tol
    gap_tol = d.gap_tol if gap_tol is None else gap_tol

    upper = scenario.upper()
    n = net.n
    x0 = np.zeros(n)
    y0 = upper.copy()

    g_xy = scenario.decomposition(x0, y0)
    g_yx = scenario.decomposition(y0, x0)
    signs_ok = bool(np.all(g_xy >= -_SIGN_TOL) and np.all(g_yx <= _SIGN_TOL))

    stacked_field = scenario.embedding_rates

    lower2 = np.zeros(2 * n)
    upper2 = np.concatenate([upper, upper])
    traj = integrate(
        stacked_field,
        np.concatenate([x0, y0]),
        t_horizon,
        dt,
        lower=lower2,
        upper=upper2,
    )

    X = traj.states[:, :n]
    Y = traj.states[:, n:]
    monotone = bool(
        np.all(np.diff(X, axis=0) >= -order_tol)
        and np.all(np.diff(Y, axis=0) <= order_tol)
    )

    final_rates = stacked_field(traj.states[-1])
    settle_norm = float(np.max(np.abs(final_rates)))
    settled = settle_norm <= residual_tol

    gap = float(np.max(np.abs(X[-1] - Y[-1])))
    gap_ok = gap <= gap_tol

    x_e = 0.5 * (X[-1] + Y[-1])
    residual = float(np.max(np.abs(scenario.field(x_e))))
    residual_ok = residual <= residual_tol

    hints: list[str] = []
    if not settled:
        # still-decreasing residual means the run simply stopped too early
        probe = traj.states[int(0.9 * (len(traj) - 1))]
        earlier = float(np.max(np.abs(stacked_field(probe))))
        if settle_norm < earlier:
            hints.append(
                "HorizonTooShort: embedding rates are still decreasing at the "
                "horizon; retry with a larger t_final"
            )
    if settled and not gap_ok:
        hints.append(
            "embedding settled with distinct corner limits (x* != y*); the "
            "one-sided certificate cannot conclude"
        )

    certified = signs_ok and monotone and settled and gap_ok and residual_ok
    tail = slice(max(0, len(traj) - _TAIL_ROWS), len(traj))

    return ConvergenceCertificate(
        status="certified" if certified else "inconclusive",
        link_order=net.link_order,
        equilibrium=x_e if certified else None,
        residual=residual,
        gap=gap,
        initial_signs_ok=signs_ok,
        monotone=monotone,
        settled=settled,
        horizon=t_horizon,
        dt=dt,
        residual_tol=residual_tol,
        gap_tol=gap_tol,
        hints=tuple(hints),
        tail_times=traj.times[tail].copy(),
        tail_x=X[tail].copy(),
        tail_y=Y[tail].copy(),
    )
