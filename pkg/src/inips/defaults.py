"""Reference experiment assets: the 10-switch topology, its traffic
endpoints, and curated cost-optimal placements for both deployment modes.

Link set is reconstructed from the published hop-by-hop routes; the two
switches not mentioned by any route (S4, S5) are attached with a side ring
so the graph is fully connected.  All link costs are 1.
"""

from __future__ import annotations

from .deploy import (
    Commodity,
    NetworkGraph,
    Placement,
    WL_MODE,
    plan_from_placement,
    sl_pseudo_placement,
)

N_LEARNERS = 3

SWITCHES = tuple(f"S{i}" for i in range(10))

LINKS = (
    ("S7", "S6", 1.0),
    ("S6", "S2", 1.0),
    ("S8", "S3", 1.0),
    ("S3", "S1", 1.0),
    ("S1", "S0", 1.0),
    ("S9", "S3", 1.0),
    ("S0", "S6", 1.0),
    ("S8", "S7", 1.0),
    ("S2", "S4", 1.0),
    ("S4", "S5", 1.0),
    ("S5", "S9", 1.0),
)

HOST_ATTACH = {
    "H1": "S7", "H2": "S6", "H3": "S2", "H4": "S2", "H5": "S9",
    "H6": "S6", "H7": "S8", "H8": "S8", "H9": "S7", "H10": "S0",
    "H11": "S9",
}

BENIGN_PAIRS = (("H1", "H2"), ("H8", "H10"), ("H5", "H6"), ("H8", "H3"))
MALICIOUS_PAIRS = (("H9", "H2"), ("H11", "H6"), ("H7", "H4"))

# Cost-optimal (zero-stretch) placement chosen among ties so the busiest
# transit switch hosts a single color.
WL_COLOR_MAP = {
    "S6": frozenset({0}), "S1": frozenset({0}), "S8": frozenset({0}),
    "S7": frozenset({1, 2}), "S3": frozenset({1}), "S5": frozenset({1}),
    "S0": frozenset({2}), "S2": frozenset({2}),
}

SL_SWITCHES = ("S6",)


def reference_topology() -> NetworkGraph:
    return NetworkGraph(switches=SWITCHES, host_attach=dict(HOST_ATTACH), links=LINKS)


def commodities(include_malicious: bool = True):
    pairs = BENIGN_PAIRS + (MALICIOUS_PAIRS if include_malicious else ())
    return [Commodity(src, dst) for src, dst in pairs]


def default_wl_plan(graph=None):
    graph = graph or reference_topology()
    placement = Placement(color_map=dict(WL_COLOR_MAP), mode=WL_MODE)
    return plan_from_placement(graph, placement, commodities(), N_LEARNERS)


def default_sl_plan(graph=None):
    graph = graph or reference_topology()
    return plan_from_placement(graph, sl_pseudo_placement(SL_SWITCHES),
                               commodities(), N_LEARNERS)
