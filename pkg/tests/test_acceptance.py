"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with `pytest -s` to see them as they complete)."""

import math
import time

import numpy as np
import pytest

import fifoflow as ff
from fifoflow.cli import run_cli

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from conftest import FIG1_BY_KIND, TWOJUNC_BY_KIND, load, scenario_path

AUDIT_SCENARIOS = sorted(set(FIG1_BY_KIND.values()) | set(TWOJUNC_BY_KIND.values()))


def _criterion(num: int, desc: str, ok: bool, detail: str = "") -> None:
    line = f"[acceptance] criterion {num} ({desc}): {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" - {detail}"
    print(line)
    assert ok, line


def test_criterion_1_reference_certification(tmp_path):
    report_path = tmp_path / "cert.toml"
    t0 = time.monotonic()
    code = run_cli(
        ["certify", str(scenario_path("div3.scenario")), "--out", str(report_path)]
    )
    elapsed = time.monotonic() - t0
    report = tomllib.loads(report_path.read_text())
    certified = code == 0 and report["status"] == "certified"
    residual_ok = report["residual"] <= 1e-8
    gap_ok = report["gap"] <= 1e-6

    scen = load("div3.scenario")
    x_e = np.array([report["equilibrium"][l] for l in scen.net.link_order])
    rng = np.random.default_rng(2026)
    worst = 0.0
    for _ in range(20):
        x0 = rng.uniform(size=scen.n) * scen.upper()
        traj = ff.integrate(
            scen.field, x0, 200.0, 0.05, lower=np.zeros(scen.n), upper=scen.upper()
        )
        worst = max(worst, float(np.max(np.abs(traj.final() - x_e))))
    oracle_ok = worst <= 1e-5

    _criterion(
        1,
        "reference diverge certifies and its equilibrium is globally attractive",
        certified and elapsed < 10.0 and residual_ok and gap_ok and oracle_ok,
        f"elapsed={elapsed:.2f}s residual={report['residual']:.2e} "
        f"gap={report['gap']:.2e} oracle-worst={worst:.2e}",
    )


def test_criterion_2_extreme_corner_rates_exact():
    scen = load("div3.scenario")
    x0 = np.zeros(3)
    y0 = np.array([6.0, 4.0, 2.0])
    g_up = scen.decomposition(x0, y0)
    g_down = scen.decomposition(y0, x0)
    expected_down = np.array(
        [0.0, -3.0 * (1.0 - math.exp(-2.0)), -2.0 * (1.0 - math.exp(-1.0))]
    )
    err_up = float(np.max(np.abs(g_up - np.array([4.0, 0.0, 0.0]))))
    err_down = float(np.max(np.abs(g_down - expected_down)))
    _criterion(
        2,
        "decomposition at the extreme corners matches the closed forms",
        err_up <= 1e-12 and err_down <= 1e-12,
        f"err_up={err_up:.2e} err_down={err_down:.2e}",
    )


def test_criterion_3_assumption_audit_all_models():
    failures = []
    for name in AUDIT_SCENARIOS:
        scen = load(name)
        a = ff.check_assumptions(scen, n_samples=1000, seed=scen.defaults.seed,
                                 tolerance=1e-6)
        d = ff.check_decomposition(scen, n_samples=1000, seed=scen.defaults.seed,
                                   tolerance=1e-6)
        if not a.passed:
            failures.append(f"{name}:{a.failed_conditions()}")
        if not d.passed:
            failures.append(f"{name}:{d.failed_conditions()}")

    fig1 = load("div3.scenario")
    wide = load("twojunc_ex4.scenario")
    i2 = fig1.net.index["2"]
    i3 = fig1.net.index["3"]
    i1 = fig1.net.index["1"]
    ia = wide.net.index["a"]

    def control(scen, condition, mutate):
        def flow(x):
            bd = scen.breakdown(x)
            mutate(bd, x)
            return bd

        rep = ff.check_assumptions(scen, n_samples=150, seed=13, flow_fn=flow)
        cond = rep.conditions[condition]
        return (not cond.passed) and cond.witness is not None

    controls = {
        "A1": control(fig1, "A1", lambda bd, x: bd.inflow_exo.__setitem__(
            "1", bd.inflow_exo["1"] - 0.5 * float(x[i2]))),
        "A2": control(fig1, "A2", lambda bd, x: bd.outflow_exo.__setitem__(
            "2", bd.outflow_exo["2"] + 0.5 * float(x[i3]))),
        "A3": control(wide, "A3", lambda bd, x: bd.nonfifo.__setitem__(
            ("c", "d"), bd.nonfifo[("c", "d")] + 0.5 * float(x[ia]))),
        "A4": control(wide, "A4", lambda bd, x: bd.fifo.__setitem__(
            ("c", "d"), bd.fifo[("c", "d")] + 0.5 * float(x[ia]))),
        "A5": control(fig1, "A5", lambda bd, x: bd.fifo.__setitem__(
            ("1", "2"), bd.fifo[("1", "2")] - 0.5 * float(x[i1]))),
        "A6": control(fig1, "A6", lambda bd, x: bd.nonfifo.__setitem__(
            ("1", "2"), bd.nonfifo[("1", "2")] - 0.5 * float(x[i1]))),
        "A7": control(fig1, "A7", lambda bd, x: bd.fifo.__setitem__(
            ("1", "2"), bd.fifo[("1", "2")] + 0.5 * float(x[i2]))),
        "A8": control(fig1, "A8", lambda bd, x: bd.nonfifo.__setitem__(
            ("1", "2"), bd.nonfifo[("1", "2")] - 0.5 * float(x[i3]))),
        "A9": control(fig1, "A9", lambda bd, x: bd.fifo.__setitem__(
            ("1", "2"), bd.fifo[("1", "2")] + 0.5 * float(x[i3]))),
    }
    missed = [k for k, caught in controls.items() if not caught]
    _criterion(
        3,
        "flow and decomposition conditions audited on every model; "
        "injected violations caught",
        not failures and not missed,
        f"audit failures={failures or 'none'} uncaught controls={missed or 'none'}",
    )


def test_criterion_4_extreme_trajectory_is_order_monotone(tmp_path):
    out = tmp_path / "embed.csv"
    code = run_cli(["embed", str(scenario_path("div3.scenario")), "--out", str(out)])
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    n = 3
    X = data[:, 1 : 1 + n]
    Y = data[:, 1 + n :]
    x_monotone = bool(np.all(np.diff(X, axis=0) >= -1e-9))
    y_monotone = bool(np.all(np.diff(Y, axis=0) <= 1e-9))
    _criterion(
        4,
        "extreme embedding trajectory is monotone in the southeast order",
        code == 0 and x_monotone and y_monotone,
        f"rows={data.shape[0]} x-monotone={x_monotone} y-monotone={y_monotone}",
    )


def test_criterion_5_flow_bounds_everywhere():
    bad = []
    for name in AUDIT_SCENARIOS + ["parallel_ex4.scenario"]:
        scen = load(name)
        net = scen.net
        rng = np.random.default_rng(99)
        states = rng.uniform(size=(10_000, scen.n)) * scen.upper()
        for x in states:
            bd = scen.breakdown(x)
            for (k, l), v in bd.fifo.items():
                cap = scen.params[l].turn_ratio * ff.demand(
                    scen.params[k], x[net.index[k]]
                )
                if v + bd.nonfifo[(k, l)] > cap + 1e-12:
                    bad.append(f"{name}: pair cap at {(k, l)}")
            for l in net.link_order:
                if bd.total_into(net, l) > ff.supply(
                    scen.params[l], x[net.index[l]]
                ) + 1e-12:
                    bad.append(f"{name}: supply bound at {l}")
                total_out = bd.pairs_out_of(net, l) + bd.outflow_exo[l]
                if total_out > ff.demand(scen.params[l], x[net.index[l]]) + 1e-12:
                    bad.append(f"{name}: demand bound at {l}")
            if bad:
                break
        # box faces
        for _ in range(200):
            x = rng.uniform(size=scen.n) * scen.upper()
            for i in range(scen.n):
                low = x.copy()
                low[i] = 0.0
                if scen.field(low)[i] < -1e-12:
                    bad.append(f"{name}: low face {i}")
                high = x.copy()
                high[i] = scen.upper()[i]
                if scen.field(high)[i] > 1e-12:
                    bad.append(f"{name}: high face {i}")
            if bad:
                break
    _criterion(
        5,
        "pair/supply/demand flow bounds and box-face signs hold",
        not bad,
        f"violations={bad[:3] or 'none'}",
    )


def test_criterion_6_model_collapse_equivalences():
    fig_nf = load("fig1_ex1.scenario")
    fig_ff = load("fig1_ex2.scenario")
    lanes = load("div3.scenario")

    shares0 = {l: 0.0 for l in fig_nf.net.link_order if fig_nf.net.upstream[l]}
    shares1 = {l: 1.0 for l in shares0}
    blend0 = fig_nf.with_model(ff.ConvexCombo(fifo_share=shares0))
    blend1 = fig_ff.with_model(ff.ConvexCombo(fifo_share=shares1))
    single_set = lanes.with_model(
        ff.MultiSetFifo(
            restrictions={
                "v": (
                    ff.RestrictionSet(
                        members=frozenset({"2", "3"}), shares={"2": 0.1, "3": 0.9}
                    ),
                )
            }
        )
    )
    lanes_all_one = lanes.with_model(
        ff.PartialFifoLanes(fifo_share={"2": 1.0, "3": 1.0})
    )

    pairs = [
        ("blend@0 vs non-FIFO", blend0, fig_nf, "pair"),
        ("blend@1 vs full-FIFO", blend1, fig_ff, "pair"),
        ("single restriction set vs lanes", single_set, lanes, "split"),
        ("lanes@1 vs full-FIFO", lanes_all_one, fig_ff, "pair"),
    ]
    rng = np.random.default_rng(123)
    states = rng.uniform(size=(10_000, 3)) * lanes.upper()
    worst = {label: 0.0 for label, *_ in pairs}
    for x in states:
        for label, a, b, mode in pairs:
            bd_a = a.breakdown(x)
            bd_b = b.breakdown(x)
            for key in bd_a.fifo:
                if mode == "split":
                    gap = max(
                        abs(bd_a.fifo[key] - bd_b.fifo[key]),
                        abs(bd_a.nonfifo[key] - bd_b.nonfifo[key]),
                    )
                else:
                    gap = abs(bd_a.pair(*key) - bd_b.pair(*key))
                worst[label] = max(worst[label], gap)
    ok = all(v <= 1e-12 for v in worst.values())
    _criterion(
        6,
        "model-collapse equivalences agree to 1e-12",
        ok,
        " ".join(f"{k}={v:.2e}" for k, v in worst.items()),
    )


def test_criterion_7_mixed_sign_jacobian_demonstration():
    lanes = ff.jacobian_sign_survey(load("div3.scenario"), n_samples=1000, seed=0)
    nonfifo = ff.jacobian_sign_survey(load("fig1_ex1.scenario"), n_samples=1000, seed=0)
    lanes_mixed = lanes.mixed_entries()
    nonfifo_mixed = nonfifo.mixed_entries()
    detail = (
        f"lane-model mixed entries={lanes_mixed or 'none'} "
        f"(entry ranges: 2,3=[{lanes.entries[('2','3')].low:.3f},"
        f"{lanes.entries[('2','3')].high:.3f}] "
        f"3,2=[{lanes.entries[('3','2')].low:.3f},{lanes.entries[('3','2')].high:.3f}]); "
        f"non-FIFO mixed={nonfifo_mixed or 'none'}; "
        f"orthant-consistent: lanes={lanes.orthant_consistent} "
        f"non-FIFO={nonfifo.orthant_consistent}"
    )
    # Known shortfall: on this three-link diverge every off-diagonal entry is
    # sign-stable (their sum telescopes through min{fifo + free, supply}), so
    # no mixed entry exists to report even though the sign PATTERN fits no
    # orthant order; see the sign survey docs and parallel_ex4 for a network
    # where per-entry mixed signs genuinely occur.
    _criterion(
        7,
        "lane model reports a mixed-sign Jacobian entry, non-FIFO reports none",
        len(lanes_mixed) >= 1 and len(nonfifo_mixed) == 0,
        detail,
    )


def test_criterion_8_integrator_order():
    def err(dt):
        traj = ff.integrate(lambda x: -x, np.array([1.0]), 1.0, dt)
        return abs(float(traj.final()[0]) - math.exp(-1.0))

    ratio = err(0.1) / err(0.05)
    _criterion(
        8,
        "fourth-order error reduction on the exponential-decay oracle",
        8.0 <= ratio <= 32.0,
        f"error ratio per halving = {ratio:.2f} (theory: 16)",
    )
