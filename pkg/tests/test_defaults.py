"""Shipped reference topology and the pinned deployment plans."""

from inips import defaults
from inips.deploy import shortest_path


class TestTopology:
    def test_shape(self, graph):
        assert graph.switches == tuple(f"S{i}" for i in range(10))
        assert len(defaults.HOST_ATTACH) == 11
        assert set(defaults.HOST_ATTACH.values()) <= set(graph.switches)

    def test_pinned_routes(self, graph):
        # equal-cost ties resolve deterministically, so these are stable
        assert shortest_path(graph, "S8", "S0")[0] == ["S8", "S3", "S1", "S0"]
        assert shortest_path(graph, "S9", "S6")[0] == ["S9", "S3", "S1", "S0", "S6"]
        assert shortest_path(graph, "S7", "S2")[0] == ["S7", "S6", "S2"]


class TestPinnedPlans:
    def test_wl_plan_covers_everything_at_zero_stretch(self, wl_plan):
        assert wl_plan.coverage == 1.0
        assert wl_plan.stretch_pct == 0.0
        placed = wl_plan.placement.placed_colors()
        assert placed == {0, 1, 2}
        # three replicas of each color
        for color in placed:
            hosts = [s for s, cs in wl_plan.placement.color_map.items() if color in cs]
            assert len(hosts) == 3

    def test_sl_plan_funnels_through_one_switch(self, sl_plan):
        assert sl_plan.coverage == 1.0
        assert sl_plan.stretch_pct == 0.0
        assert set(sl_plan.placement.color_map) == {"S6"}
        for route in sl_plan.routes:
            assert "S6" in route.walk

    def test_plans_route_the_same_commodities(self, wl_plan, sl_plan):
        pairs = [(r.commodity.src_host, r.commodity.dst_host) for r in wl_plan.routes]
        assert pairs == [(r.commodity.src_host, r.commodity.dst_host) for r in sl_plan.routes]
        assert pairs == list(defaults.BENIGN_PAIRS + defaults.MALICIOUS_PAIRS)
