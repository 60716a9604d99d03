"""Weak-learner placement and colored shortest-path routing.

Every traffic commodity must follow a minimum-cost walk whose visited
switches collectively host all N learner colors (WL mode) or at least one
strong-learner instance (SL mode).  Small instances are solved exactly by
enumeration; larger ones by a biased random-key genetic algorithm whose
decoder places, per color, the R switches holding the largest keys.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

WL_MODE = "wl"
SL_MODE = "sl"

INFEASIBLE = math.inf


class DeployError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkGraph:
    switches: tuple  # node ids, sorted
    host_attach: dict  # host id -> switch id
    links: tuple  # (a, b, cost) undirected, cost > 0
    adjacency: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        known = set(self.switches)
        for a, b, cost in self.links:
            if a not in known or b not in known:
                raise DeployError(f"link ({a},{b}) references unknown switch")
            if cost <= 0:
                raise DeployError("link costs must be positive")
        for host, sw in self.host_attach.items():
            if sw not in known:
                raise DeployError(f"host {host} attached to unknown switch {sw}")
        adj = {s: [] for s in self.switches}
        for a, b, cost in self.links:
            adj[a].append((b, cost))
            adj[b].append((a, cost))
        for nbrs in adj.values():
            nbrs.sort()
        object.__setattr__(self, "adjacency", adj)

    @property
    def max_link_cost(self) -> float:
        return max((c for _, _, c in self.links), default=1.0)

    def attach(self, host):
        if host not in self.host_attach:
            raise DeployError(f"unknown host {host}")
        return self.host_attach[host]


@dataclass(frozen=True)
class Commodity:
    src_host: str
    dst_host: str
    demand: float = 1.0


@dataclass(frozen=True)
class Placement:
    color_map: dict  # switch -> frozenset of colors
    mode: str = WL_MODE

    def colors_at(self, switch) -> frozenset:
        return self.color_map.get(switch, frozenset())

    def placed_colors(self) -> set:
        out = set()
        for cs in self.color_map.values():
            out |= cs
        return out


@dataclass
class CommodityRoute:
    commodity: Commodity
    walk: list  # switch ids, may revisit nodes
    cost: float
    shortest_cost: float
    feasible: bool


@dataclass
class DeploymentPlan:
    placement: Placement
    routes: list  # CommodityRoute per commodity
    objective: float
    coverage: float
    stretch_pct: float
    feasible: bool


def shortest_path(g: NetworkGraph, src, dst):
    """Dijkstra; equal-cost ties resolve to the lexicographically
    smallest node sequence."""
    if src == dst:
        return [src], 0.0
    adj = g.adjacency
    heap = [(0.0, (src,))]
    done = set()
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == dst:
            return list(path), cost
        for nbr, c in adj[node]:
            if nbr not in done:
                heapq.heappush(heap, (cost + c, path + (nbr,)))
    return None, INFEASIBLE


def colored_shortest_path(g: NetworkGraph, placement: Placement, commodity: Commodity, n_colors: int):
    """Exact label-setting search over (switch, collected-color-set) states.

    Returns (walk, cost); walks may revisit switches, which is what makes a
    cost-minimal color-collecting route well-defined.
    """
    src = g.attach(commodity.src_host)
    dst = g.attach(commodity.dst_host)
    full = (1 << n_colors) - 1

    def mask_at(sw):
        m = 0
        for c in placement.colors_at(sw):
            if c < n_colors:
                m |= 1 << c
        return m

    adj = g.adjacency
    start_mask = mask_at(src)
    heap = [(0.0, (src,), start_mask)]
    best = {}
    while heap:
        cost, path, mask = heapq.heappop(heap)
        node = path[-1]
        state = (node, mask)
        if state in best:
            continue
        best[state] = cost
        if node == dst and mask == full:
            return list(path), cost
        for nbr, c in adj[node]:
            nmask = mask | mask_at(nbr)
            if (nbr, nmask) not in best:
                heapq.heappush(heap, (cost + c, path + (nbr,), nmask))
    return None, INFEASIBLE


def _colored_cost_only(adj, src, dst, mask_at, full):
    """Cost of the cheapest color-collecting walk, without reconstructing it.

    Used inside the BRKGA fitness loop where only the objective matters.
    """
    heap = [(0.0, src, mask_at.get(src, 0))]
    best = set()
    while heap:
        cost, node, mask = heapq.heappop(heap)
        state = (node, mask)
        if state in best:
            continue
        best.add(state)
        if node == dst and mask == full:
            return cost
        for nbr, c in adj[node]:
            nmask = mask | mask_at.get(nbr, 0)
            if (nbr, nmask) not in best:
                heapq.heappush(heap, (cost + c, nbr, nmask))
    return INFEASIBLE


def _placement_objective(g, placement, pairs, demands, n_colors):
    """(objective, coverage) over precomputed attach-switch pairs."""
    n_eff = 1 if placement.mode == SL_MODE else n_colors
    full = (1 << n_eff) - 1
    mask_at = {}
    for sw, colors in placement.color_map.items():
        m = 0
        for c in colors:
            if c < n_eff:
                m |= 1 << c
        mask_at[sw] = m
    adj = g.adjacency
    big_m = penalty_cost(g)
    objective = 0.0
    feasible = 0
    for (src, dst), demand in zip(pairs, demands):
        cost = _colored_cost_only(adj, src, dst, mask_at, full)
        if cost == INFEASIBLE:
            objective += big_m
        else:
            objective += demand * cost
            feasible += 1
    coverage = feasible / len(pairs) if pairs else 1.0
    return objective, coverage


def sl_pseudo_placement(sl_switches) -> Placement:
    """SL mode reduces to a single pseudo-color on the SL-hosting switches."""
    return Placement(color_map={s: frozenset({0}) for s in sl_switches}, mode=SL_MODE)


def penalty_cost(g: NetworkGraph) -> float:
    return 1e6 * g.max_link_cost * len(g.switches)


def route_commodities(g: NetworkGraph, placement: Placement, commodities, n_colors: int):
    n_eff = 1 if placement.mode == SL_MODE else n_colors
    routes = []
    for com in commodities:
        walk, cost = colored_shortest_path(g, placement, com, n_eff)
        _, plain = shortest_path(g, g.attach(com.src_host), g.attach(com.dst_host))
        routes.append(CommodityRoute(
            commodity=com,
            walk=walk or [],
            cost=cost,
            shortest_cost=plain,
            feasible=walk is not None,
        ))
    return routes


def evaluate_placement(g: NetworkGraph, placement: Placement, commodities, n_colors: int):
    """Demand-weighted colored cost with a large penalty per uncovered
    commodity; coverage is the feasible fraction (1.0 when vacuous)."""
    routes = route_commodities(g, placement, commodities, n_colors)
    if not routes:
        return 0.0, 1.0, routes
    big_m = penalty_cost(g)
    objective = 0.0
    feasible = 0
    for r in routes:
        if r.feasible:
            objective += r.commodity.demand * r.cost
            feasible += 1
        else:
            objective += big_m
    return objective, feasible / len(routes), routes


def stretch_overhead(routes) -> float:
    """Mean percentage excess of colored walks over plain shortest paths."""
    samples = []
    for r in routes:
        if r.feasible and r.shortest_cost > 0:
            samples.append((r.cost - r.shortest_cost) / r.shortest_cost * 100.0)
    return sum(samples) / len(samples) if samples else 0.0


def _make_plan(g, placement, commodities, n_colors):
    objective, coverage, routes = evaluate_placement(g, placement, commodities, n_colors)
    return DeploymentPlan(
        placement=placement,
        routes=routes,
        objective=objective,
        coverage=coverage,
        stretch_pct=stretch_overhead(routes),
        feasible=coverage == 1.0,
    )


def brute_force_placement(g: NetworkGraph, commodities, n_colors: int, replicas: int,
                          mode: str = WL_MODE, guard: int = 10**6) -> DeploymentPlan:
    """Exact optimum by enumerating every R-subset assignment per color."""
    switches = list(g.switches)
    per_color = math.comb(len(switches), replicas)
    n_eff = 1 if mode == SL_MODE else n_colors
    if per_color ** n_eff > guard:
        raise DeployError(f"{per_color ** n_eff} placements exceed enumeration guard {guard}")
    best = None
    subsets = list(itertools.combinations(switches, replicas))
    for combo in itertools.product(subsets, repeat=n_eff):
        color_map = {}
        for color, group in enumerate(combo):
            for sw in group:
                color_map.setdefault(sw, set()).add(color)
        placement = Placement(
            color_map={s: frozenset(cs) for s, cs in color_map.items()}, mode=mode
        )
        objective, coverage, routes = evaluate_placement(g, placement, commodities, n_colors)
        if best is None or objective < best.objective - 1e-9:
            best = DeploymentPlan(
                placement=placement, routes=routes, objective=objective,
                coverage=coverage, stretch_pct=stretch_overhead(routes),
                feasible=coverage == 1.0,
            )
    return best


@dataclass(frozen=True)
class BrkgaParams:
    population: int = 100
    elite_fraction: float = 0.2
    mutant_fraction: float = 0.15
    inherit_prob_rho: float = 0.7
    generations: int = 200
    seed: int = 0
    replicas_per_color: int = 1

    def __post_init__(self):
        if not (0 < self.elite_fraction < 1 and 0 < self.mutant_fraction < 1):
            raise ValueError("fractions must lie in (0,1)")
        if self.elite_fraction + self.mutant_fraction >= 1:
            raise ValueError("elite + mutant fractions must be < 1")


def decode_keys(keys: np.ndarray, switches, n_colors: int, replicas: int, mode: str) -> Placement:
    """Per color, the R switches with the largest keys host that color."""
    n_eff = 1 if mode == SL_MODE else n_colors
    color_map = {}
    n_sw = len(switches)
    for color in range(n_eff):
        block = keys[color * n_sw:(color + 1) * n_sw]
        order = np.lexsort((np.arange(n_sw), -block))  # ties -> lowest switch index
        for idx in order[:replicas]:
            sw = switches[int(idx)]
            color_map.setdefault(sw, set()).add(color)
    return Placement(color_map={s: frozenset(cs) for s, cs in color_map.items()}, mode=mode)


def brkga_solve(g: NetworkGraph, commodities, n_colors: int,
                params: BrkgaParams = BrkgaParams(), mode: str = WL_MODE) -> DeploymentPlan:
    switches = list(g.switches)
    n_eff = 1 if mode == SL_MODE else n_colors
    chrom_len = len(switches) * n_eff
    rng = np.random.default_rng(params.seed)
    pop = rng.random((params.population, chrom_len))
    n_elite = max(1, int(params.elite_fraction * params.population))
    n_mutant = max(1, int(params.mutant_fraction * params.population))
    n_cross = params.population - n_elite - n_mutant

    pairs = [(g.attach(c.src_host), g.attach(c.dst_host)) for c in commodities]
    demands = [c.demand for c in commodities]

    def fitness(keys):
        placement = decode_keys(keys, switches, n_colors, params.replicas_per_color, mode)
        objective, _ = _placement_objective(g, placement, pairs, demands, n_colors)
        return objective

    scores = np.array([fitness(ind) for ind in pop])
    for _ in range(params.generations):
        order = np.argsort(scores, kind="stable")
        pop = pop[order]
        scores = scores[order]
        elites = pop[:n_elite]
        mutants = rng.random((n_mutant, chrom_len))
        children = np.empty((n_cross, chrom_len))
        for i in range(n_cross):
            elite = elites[rng.integers(n_elite)]
            other = pop[n_elite + rng.integers(params.population - n_elite)]
            take_elite = rng.random(chrom_len) < params.inherit_prob_rho
            children[i] = np.where(take_elite, elite, other)
        new_tail = np.vstack([children, mutants])
        tail_scores = np.array([fitness(ind) for ind in new_tail])
        pop = np.vstack([elites, new_tail])
        scores = np.concatenate([scores[:n_elite], tail_scores])
    best_keys = pop[int(np.argmin(scores))]
    placement = decode_keys(best_keys, switches, n_colors, params.replicas_per_color, mode)
    return _make_plan(g, placement, commodities, n_colors)


def plan_from_placement(g: NetworkGraph, placement: Placement, commodities, n_colors: int) -> DeploymentPlan:
    return _make_plan(g, placement, commodities, n_colors)


# --- file formats ----------------------------------------------------------

def load_topology(path) -> NetworkGraph:
    with open(path) as fh:
        doc = json.load(fh)
    return NetworkGraph(
        switches=tuple(sorted(doc["switches"])),
        host_attach={h["id"]: h["attach"] for h in doc["hosts"]},
        links=tuple((l["a"], l["b"], float(l["cost"])) for l in doc["links"]),
    )


def save_topology(g: NetworkGraph, path):
    doc = {
        "switches": list(g.switches),
        "hosts": [{"id": h, "attach": s} for h, s in sorted(g.host_attach.items())],
        "links": [{"a": a, "b": b, "cost": c} for a, b, c in g.links],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_commodities(path):
    with open(path) as fh:
        doc = json.load(fh)
    return [Commodity(c["src"], c["dst"], float(c.get("demand", 1.0))) for c in doc]


def save_plan(plan: DeploymentPlan, path):
    doc = {
        "mode": plan.placement.mode,
        "color_map": {s: sorted(cs) for s, cs in sorted(plan.placement.color_map.items())},
        "paths": [
            {
                "src": r.commodity.src_host,
                "dst": r.commodity.dst_host,
                "demand": r.commodity.demand,
                "walk": r.walk,
                "cost": r.cost if r.feasible else None,
                "shortest_cost": r.shortest_cost,
                "feasible": r.feasible,
            }
            for r in plan.routes
        ],
        "objective": plan.objective,
        "coverage": plan.coverage,
        "stretch_pct": plan.stretch_pct,
        "feasible": plan.feasible,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_plan(path):
    with open(path) as fh:
        doc = json.load(fh)
    placement = Placement(
        color_map={s: frozenset(cs) for s, cs in doc["color_map"].items()},
        mode=doc["mode"],
    )
    routes = [
        CommodityRoute(
            commodity=Commodity(p["src"], p["dst"], p.get("demand", 1.0)),
            walk=p["walk"],
            cost=p["cost"] if p["cost"] is not None else INFEASIBLE,
            shortest_cost=p["shortest_cost"],
            feasible=p["feasible"],
        )
        for p in doc["paths"]
    ]
    return DeploymentPlan(
        placement=placement,
        routes=routes,
        objective=doc["objective"],
        coverage=doc["coverage"],
        stretch_pct=doc["stretch_pct"],
        feasible=doc["feasible"],
    )
