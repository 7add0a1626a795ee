from pathlib import Path

import pytest

import fifoflow as ff

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

ALL_SCENARIOS = sorted(p.name for p in SCENARIO_DIR.glob("*.scenario"))

# one scenario per flow rule on the three-link diverge (div3 is the
# partial-FIFO member) and on the six-link merge+diverge
FIG1_BY_KIND = {
    "non_fifo": "fig1_ex1.scenario",
    "full_fifo": "fig1_ex2.scenario",
    "convex_combo": "fig1_ex3.scenario",
    "partial_fifo_lanes": "div3.scenario",
    "multi_set_fifo": "fig1_ex5.scenario",
}
TWOJUNC_BY_KIND = {
    "non_fifo": "twojunc_ex1.scenario",
    "full_fifo": "twojunc_ex2.scenario",
    "convex_combo": "twojunc_ex3.scenario",
    "partial_fifo_lanes": "twojunc_ex4.scenario",
    "multi_set_fifo": "twojunc_ex5.scenario",
}


def scenario_path(name: str) -> Path:
    return SCENARIO_DIR / name


_cache: dict[str, ff.Scenario] = {}


def load(name: str) -> ff.Scenario:
    if name not in _cache:
        _cache[name] = ff.load_scenario(scenario_path(name))
    return _cache[name]


@pytest.fixture(scope="session")
def div3() -> ff.Scenario:
    return load("div3.scenario")


@pytest.fixture(scope="session")
def twojunc_ex4() -> ff.Scenario:
    return load("twojunc_ex4.scenario")
