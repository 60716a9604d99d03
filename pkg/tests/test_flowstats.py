"""Flow tracking and prefix-window feature extraction."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from inips.flowstats import (
    DEFAULT_REGISTRY,
    FeatureRegistry,
    FlowState,
    FlowTable,
    PacketRecord,
    extract_features,
    extract_features_arrays,
    flow_key_of,
    project_features,
    read_trace,
    write_trace,
)


def mk_packet(ts, size, src="10.0.0.1", sport=1000):
    return PacketRecord(ts=ts, src_ip=src, dst_ip="10.0.0.2",
                        src_port=sport, dst_port=80, protocol=6, size=size)


SMALL = FeatureRegistry(prefix_windows=(2, 3))


class TestRegistry:
    def test_default_layout(self):
        assert DEFAULT_REGISTRY.prefix_windows == (10, 20, 40, 60, 80, 100)
        assert DEFAULT_REGISTRY.feature_count == 72
        assert DEFAULT_REGISTRY.trigger_count == 100
        names = DEFAULT_REGISTRY.feature_names()
        assert names[0] == "w10_packet_count"
        assert names[12] == "w20_packet_count"
        assert names[-1] == "w100_small_pkt_fraction"

    def test_rejects_bad_windows(self):
        for windows in ((10, 10), (20, 10), (0, 5)):
            with pytest.raises(ValueError):
                FeatureRegistry(prefix_windows=windows)


class TestExtraction:
    def test_hand_computed_vector(self):
        pkts = [mk_packet(0.0, 100), mk_packet(1.0, 200), mk_packet(3.0, 600)]
        vec = extract_features(pkts, SMALL)
        w2 = [2.0, 300.0, 150.0, 50.0, 100.0, 200.0,  # count/sum/mean/std/min/max
              1.0, 1.0, 0.0,                          # duration, iat mean/std
              2.0, 300.0, 0.5]                        # pps, bps, small fraction
        w3 = [3.0, 900.0, 300.0, math.sqrt(140000.0 / 3.0), 100.0, 600.0,
              3.0, 1.5, 0.5,
              1.0, 300.0, 1.0 / 3.0]
        assert vec == pytest.approx(w2 + w3)

    def test_single_packet_window(self):
        reg = FeatureRegistry(prefix_windows=(1,))
        vec = extract_features_arrays([5.0], [200], reg)
        # duration and rates over a zero-length window are defined as 0
        assert vec == [1.0, 200.0, 200.0, 0.0, 200.0, 200.0,
                       0.0, 0.0, 0.0, 0.0, 0.0, 0.0]

    def test_arrays_and_packets_agree(self):
        pkts = [mk_packet(0.1 * i, 68 + 10 * i) for i in range(3)]
        assert extract_features(pkts, SMALL) == extract_features_arrays(
            [p.ts for p in pkts], [p.size for p in pkts], SMALL)

    def test_requires_trigger_count(self):
        with pytest.raises(ValueError):
            extract_features([mk_packet(0.0, 100)], SMALL)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 10), st.integers(68, 15000)),
                    min_size=3, max_size=20))
    def test_values_are_finite(self, raw):
        times = sorted(t for t, _ in raw)
        sizes = [s for _, s in raw]
        vec = extract_features_arrays(times, sizes, SMALL)
        assert len(vec) == SMALL.feature_count
        assert all(math.isfinite(v) for v in vec)

    def test_project(self):
        assert project_features([10.0, 11.0, 12.0], (2, 0)) == [12.0, 10.0]
        with pytest.raises(IndexError):
            project_features([1.0], (3,))


class TestFlowTracking:
    def test_directional_keys(self):
        fwd = mk_packet(0.0, 100)
        rev = PacketRecord(ts=0.0, src_ip="10.0.0.2", dst_ip="10.0.0.1",
                           src_port=80, dst_port=1000, protocol=6, size=100)
        assert flow_key_of(fwd) != flow_key_of(rev)

    def test_min_size_enforced(self):
        with pytest.raises(ValueError):
            mk_packet(0.0, 67)

    def test_trigger_fires_once(self):
        state = FlowState(key=flow_key_of(mk_packet(0.0, 100)), registry=SMALL)
        assert state.observe_packet(mk_packet(0.0, 100)) is None
        assert state.observe_packet(mk_packet(1.0, 200)) is None
        vec = state.observe_packet(mk_packet(3.0, 600))
        assert vec is not None and state.verdict == "pending"
        assert state.observe_packet(mk_packet(4.0, 100)) is None
        assert len(state.packets) == SMALL.trigger_count

    def test_key_mismatch_rejected(self):
        state = FlowState(key=flow_key_of(mk_packet(0.0, 100)))
        with pytest.raises(ValueError):
            state.observe_packet(mk_packet(0.0, 100, src="10.9.9.9"))

    def test_table_tracks_flows_separately(self):
        table = FlowTable(registry=SMALL)
        table.observe(mk_packet(0.0, 100, sport=1))
        table.observe(mk_packet(0.0, 100, sport=2))
        assert len(table.flows) == 2

    def test_idle_eviction(self):
        table = FlowTable(registry=SMALL, idle_timeout=60.0)
        table.observe(mk_packet(0.0, 100, sport=1))
        table.observe(mk_packet(50.0, 100, sport=2))
        assert table.evict_idle(now=80.0) == 1
        assert len(table.flows) == 1
        assert table.evict_idle(now=80.0) == 0


class TestTraceFiles:
    def test_roundtrip_is_exact(self, tmp_path):
        pkts = [mk_packet(0.1 * i + 1e-7, 68 + i, sport=i + 1) for i in range(5)]
        path = tmp_path / "trace.csv"
        write_trace(path, pkts)
        assert read_trace(path) == pkts

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_trace(path)
