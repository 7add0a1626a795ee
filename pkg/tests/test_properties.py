"""Property tests over randomly drawn two-junction setups.

The shipped scenarios pin concrete values; these tests draw layered
networks (entries -> junction u -> middles -> junction w -> sinks, with
parallel middles allowed), random curves, turn ratios, off-ramp fractions,
and a random flow rule, then check the structural invariants that every
rule must satisfy: flow caps, box-face signs, nonnegativity, the diagonal
identity of the decomposition, and the embedding swap symmetry.
"""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

import fifoflow as ff

KINDS = ["non_fifo", "full_fifo", "convex_combo", "partial_fifo_lanes", "multi_set_fifo"]


@st.composite
def flow_setups(draw):
    kind = draw(st.sampled_from(KINDS))
    single_in_needed = kind in ("partial_fifo_lanes", "multi_set_fifo")

    n_entry = draw(st.integers(0, 2))
    n_middle = draw(st.integers(1, 2))
    n_sink = draw(st.integers(1, 3))
    if single_in_needed:
        # every diverge needs exactly one feeder
        if n_middle > 1:
            n_entry, n_sink = 1, 1
        elif n_sink > 1:
            n_middle = 1
            n_entry = max(n_entry, 0)

    edges = []
    entries = [f"a{i}" for i in range(n_entry)]
    middles = [f"m{i}" for i in range(n_middle)]
    sinks = [f"s{i}" for i in range(n_sink)]
    for l in entries:
        edges.append((l, None, "u"))
    for l in middles:
        edges.append((l, "u", "w"))
    for l in sinks:
        edges.append((l, "w", None))
    net = ff.build_network(edges)

    def curve_pair(jam):
        scale = draw(st.floats(0.5, 5.0))
        rate = draw(st.floats(0.2, 1.0))
        return ff.Exponential(scale, rate), ff.Affine(jam)

    def ratios(count):
        raw = [draw(st.floats(0.05, 1.0)) for _ in range(count)]
        total = sum(raw)
        budget = draw(st.floats(0.4, 0.95))
        return [r / total * budget for r in raw]

    params = {}
    beta_m = ratios(n_middle)
    beta_s = ratios(n_sink)
    for l in entries:
        jam = draw(st.floats(1.0, 8.0))
        dem, sup = curve_pair(jam)
        params[l] = ff.LinkParams(
            jam_density=jam, demand=dem, supply=sup,
            exit_fraction=draw(st.floats(0.0, 0.05)),
            inflow_demand=draw(st.floats(0.0, 5.0)),
        )
    for l, beta in zip(middles, beta_m):
        jam = draw(st.floats(1.0, 8.0))
        dem, sup = curve_pair(jam)
        params[l] = ff.LinkParams(
            jam_density=jam, demand=dem, supply=sup,
            turn_ratio=None if n_entry == 0 else beta,
            exit_fraction=draw(st.floats(0.0, 0.05)),
            inflow_demand=draw(st.floats(0.0, 5.0)) if n_entry == 0 else 0.0,
        )
    for l, beta in zip(sinks, beta_s):
        jam = draw(st.floats(1.0, 8.0))
        dem, sup = curve_pair(jam)
        params[l] = ff.LinkParams(jam_density=jam, demand=dem, supply=sup, turn_ratio=beta)

    needs_share = [l for l in net.link_order if net.upstream[l]]
    if kind == "non_fifo":
        model = ff.NonFifo()
    elif kind == "full_fifo":
        model = ff.FullFifo()
    elif kind == "convex_combo":
        model = ff.ConvexCombo(
            fifo_share={l: draw(st.floats(0.0, 1.0)) for l in needs_share}
        )
    elif kind == "partial_fifo_lanes":
        model = ff.PartialFifoLanes(
            fifo_share={
                l: draw(st.floats(0.0, 1.0))
                for l in net.link_order
                if net.adjacent[l] and net.upstream[l]
            }
        )
    else:
        restrictions = {}
        for v in net.junction_order:
            outs = net.out_links[v]
            if len(outs) <= 1 or not net.in_links[v]:
                continue
            sets = []
            n_sets = draw(st.integers(0, 2))
            budget = {l: 1.0 for l in outs}
            for _ in range(n_sets):
                members = [l for l in outs if draw(st.booleans())] or [outs[0]]
                shares = {}
                for l in members:
                    eta = draw(st.floats(0.0, 1.0)) * budget[l]
                    budget[l] -= eta
                    shares[l] = eta
                sets.append(ff.RestrictionSet(members=frozenset(members), shares=shares))
            if sets:
                restrictions[v] = tuple(sets)
        model = ff.MultiSetFifo(restrictions=restrictions)

    errors = [
        f for f in ff.validate_structure(net, model, params) if f.severity == "error"
    ]
    assert not errors, errors
    return net, params, model


def _states(net, params, count, seed):
    upper = np.array([params[l].jam_density for l in net.link_order])
    rng = np.random.default_rng(seed)
    return rng.uniform(size=(count, len(upper))) * upper, upper


@given(flow_setups())
@settings(max_examples=50, deadline=None)
def test_flow_caps_hold_everywhere(setup):
    net, params, model = setup
    states, _ = _states(net, params, 5, 101)
    for x in states:
        bd = ff.link_to_link_flows(net, params, model, x)
        for (k, l), v in bd.fifo.items():
            cap = params[l].turn_ratio * ff.demand(params[k], x[net.index[k]])
            assert v + bd.nonfifo[(k, l)] <= cap + 1e-12
            assert v >= 0.0 and bd.nonfifo[(k, l)] >= 0.0
        for l in net.link_order:
            assert bd.total_into(net, l) <= ff.supply(params[l], x[net.index[l]]) + 1e-12


@given(flow_setups())
@settings(max_examples=50, deadline=None)
def test_outflow_within_demand_under_ratio_budget(setup):
    # turn ratios are drawn with (1 + exit_fraction) * sum <= 1
    net, params, model = setup
    states, _ = _states(net, params, 5, 103)
    for x in states:
        bd = ff.link_to_link_flows(net, params, model, x)
        for l in net.link_order:
            total = bd.pairs_out_of(net, l) + bd.outflow_exo[l]
            assert total <= ff.demand(params[l], x[net.index[l]]) + 1e-12


@given(flow_setups())
@settings(max_examples=50, deadline=None)
def test_box_faces_point_inward(setup):
    net, params, model = setup
    states, upper = _states(net, params, 3, 107)
    for x in states:
        for i in range(len(upper)):
            low = x.copy()
            low[i] = 0.0
            assert ff.vector_field(net, params, model, low)[i] >= -1e-12
            high = x.copy()
            high[i] = upper[i]
            assert ff.vector_field(net, params, model, high)[i] <= 1e-12


@given(flow_setups())
@settings(max_examples=50, deadline=None)
def test_diagonal_identity_and_swap_symmetry(setup):
    net, params, model = setup
    states, upper = _states(net, params, 4, 109)
    rng = np.random.default_rng(113)
    for x in states:
        g = ff.decomposition(net, params, model, x, x)
        f = ff.vector_field(net, params, model, x)
        assert np.max(np.abs(g - f)) <= 1e-12
        y = rng.uniform(size=len(upper)) * upper
        fwd = ff.embedding_field(net, params, model, ff.EmbeddingState(x, y))
        rev = ff.embedding_field(net, params, model, ff.EmbeddingState(y, x))
        assert np.array_equal(fwd.x, rev.y)
        assert np.array_equal(fwd.y, rev.x)


@given(flow_setups())
@settings(max_examples=30, deadline=None)
def test_signature_stable_under_reevaluation(setup):
    net, params, model = setup
    states, _ = _states(net, params, 2, 127)
    for x in states:
        assert ff.branch_signature(net, params, model, x) == ff.branch_signature(
            net, params, model, x
        )


class TestStructuralEdgeCases:
    def test_entry_diverge_has_no_pair_flows(self):
        # a junction with outgoing links but no feeders moves no pair flow;
        # its outgoing links are entries and take exogenous inflow instead
        net = ff.build_network([("m0", "u", "w"), ("m1", "u", "w"), ("s0", "w", None)])
        params = {
            "m0": ff.LinkParams(4.0, ff.Exponential(2.0, 0.5), ff.Affine(4.0),
                                inflow_demand=1.0),
            "m1": ff.LinkParams(3.0, ff.Exponential(2.0, 0.5), ff.Affine(3.0),
                                inflow_demand=0.5),
            "s0": ff.LinkParams(5.0, ff.Exponential(3.0, 0.5), ff.Affine(5.0),
                                turn_ratio=0.9),
        }
        bd = ff.link_to_link_flows(net, params, ff.NonFifo(), np.array([1.0, 1.0, 1.0]))
        assert set(bd.fifo) == {("m0", "s0"), ("m1", "s0")}
        assert bd.inflow_exo == {"m0": 1.0, "m1": 0.5}

    def test_multi_set_with_no_restrictions_is_supply_capped_free_flow(self):
        net = ff.build_network(
            [("a", None, "v"), ("b", "v", None), ("c", "v", None)]
        )
        params = {
            "a": ff.LinkParams(6.0, ff.Exponential(4.0, 0.5), ff.Affine(6.0),
                               inflow_demand=2.0),
            "b": ff.LinkParams(4.0, ff.Exponential(3.0, 0.5), ff.Affine(4.0),
                               turn_ratio=0.7),
            "c": ff.LinkParams(2.0, ff.Exponential(2.0, 0.5), ff.Affine(2.0),
                               turn_ratio=0.3),
        }
        model = ff.MultiSetFifo(restrictions={})
        x = np.array([4.0, 3.0, 1.5])
        bd = ff.link_to_link_flows(net, params, model, x)
        for l in ("b", "c"):
            expect = min(
                params[l].turn_ratio * ff.demand(params["a"], 4.0),
                ff.supply(params[l], x[net.index[l]]),
            )
            assert bd.fifo[("a", l)] == 0.0
            assert bd.nonfifo[("a", l)] == expect

    def test_three_way_merge_under_full_fifo(self):
        net = ff.build_network(
            [("a", None, "v"), ("b", None, "v"), ("c", None, "v"), ("o", "v", None)]
        )
        params = {
            l: ff.LinkParams(4.0, ff.Exponential(2.0, 0.5), ff.Affine(4.0),
                             inflow_demand=1.0)
            for l in ("a", "b", "c")
        }
        params["o"] = ff.LinkParams(
            3.0, ff.Exponential(2.5, 0.5), ff.Affine(3.0), turn_ratio=0.9
        )
        x = np.array([3.0, 2.0, 1.0, 2.5])
        bd = ff.link_to_link_flows(net, params, ff.FullFifo(), x)
        total_dem = sum(ff.demand(params[l], x[net.index[l]]) for l in ("a", "b", "c"))
        alpha = min(1.0, ff.supply(params["o"], 2.5) / (0.9 * total_dem))
        for l in ("a", "b", "c"):
            expect = alpha * 0.9 * ff.demand(params[l], x[net.index[l]])
            assert bd.fifo[(l, "o")] == expect
        assert bd.total_into(net, "o") <= ff.supply(params["o"], 2.5) + 1e-12


class TestMaskingBookkeeping:
    def test_oversized_radius_masks_probes(self, div3):
        # with a huge exclusion radius nearly every probe straddles a branch
        # switch; masked counts must show up and reduce evaluated probes
        wide = ff.FdSpec(step=1e-6 * div3.upper(), kink_exclusion_radius=div3.upper())
        rep = ff.check_assumptions(div3, n_samples=40, seed=3, fd=wide)
        masked = sum(c.masked for c in rep.conditions.values())
        assert masked > 0
        narrow = ff.check_assumptions(div3, n_samples=40, seed=3)
        assert sum(c.probes for c in rep.conditions.values()) < sum(
            c.probes for c in narrow.conditions.values()
        )
        assert rep.passed  # masked probes never count as failures
