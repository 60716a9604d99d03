"""Per-flow packet tracking, the 100-packet detection trigger, and feature
extraction over prefix windows of the buffered packets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

MIN_PACKET_SIZE = 68  # minimum MTU

BASE_STATS = (
    "packet_count",
    "byte_sum",
    "size_mean",
    "size_std",
    "size_min",
    "size_max",
    "duration",
    "iat_mean",
    "iat_std",
    "pkts_per_sec",
    "bytes_per_sec",
    "small_pkt_fraction",
)

SMALL_PACKET_BYTES = 128


@dataclass(frozen=True)
class PacketRecord:
    ts: float
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    protocol: int
    size: int
    label_hint: int = 0  # ground truth, simulation bookkeeping only

    def __post_init__(self):
        if self.size < MIN_PACKET_SIZE:
            raise ValueError(f"packet size {self.size} below minimum MTU {MIN_PACKET_SIZE}")
        if self.ts < 0:
            raise ValueError("negative timestamp")


FlowKey = tuple  # (src_ip, dst_ip, src_port, dst_port, protocol), directional


def flow_key_of(pkt: PacketRecord) -> FlowKey:
    return (pkt.src_ip, pkt.dst_ip, pkt.src_port, pkt.dst_port, pkt.protocol)


@dataclass(frozen=True)
class FeatureRegistry:
    """Prefix windows x base statistics = the flat feature vector layout."""

    prefix_windows: tuple = (10, 20, 40, 60, 80, 100)

    def __post_init__(self):
        w = self.prefix_windows
        if list(w) != sorted(set(w)) or any(x < 1 for x in w):
            raise ValueError("windows must be ascending positive integers")

    @property
    def trigger_count(self) -> int:
        return self.prefix_windows[-1]

    @property
    def feature_count(self) -> int:
        return len(self.prefix_windows) * len(BASE_STATS)

    def feature_names(self) -> list:
        return [f"w{w}_{s}" for w in self.prefix_windows for s in BASE_STATS]


DEFAULT_REGISTRY = FeatureRegistry()


def _window_stats(times, sizes) -> list:
    n = len(sizes)
    byte_sum = float(sum(sizes))
    mean = byte_sum / n
    var = sum((s - mean) ** 2 for s in sizes) / n
    duration = times[-1] - times[0]
    if n > 1:
        iats = [times[i + 1] - times[i] for i in range(n - 1)]
        iat_mean = sum(iats) / len(iats)
        iat_var = sum((x - iat_mean) ** 2 for x in iats) / len(iats)
    else:
        iat_mean = 0.0
        iat_var = 0.0
    # Rates over a zero-length window are defined as 0 to keep values finite;
    # the same guard covers degenerate durations whose reciprocal overflows.
    pps = n / duration if duration > 0 else 0.0
    bps = byte_sum / duration if duration > 0 else 0.0
    if not (math.isfinite(pps) and math.isfinite(bps)):
        pps = bps = 0.0
    small = sum(1 for s in sizes if s < SMALL_PACKET_BYTES) / n
    return [
        float(n), byte_sum, mean, var ** 0.5, float(min(sizes)), float(max(sizes)),
        duration, iat_mean, iat_var ** 0.5, pps, bps, small,
    ]


def extract_features(packets, registry: FeatureRegistry = DEFAULT_REGISTRY) -> list:
    """72-dim vector by default: one stat block per prefix window."""
    if len(packets) < registry.trigger_count:
        raise ValueError(
            f"need {registry.trigger_count} packets, got {len(packets)}"
        )
    times = [p.ts for p in packets]
    sizes = [p.size for p in packets]
    out = []
    for w in registry.prefix_windows:
        out.extend(_window_stats(times[:w], sizes[:w]))
    return out


def extract_features_arrays(times, sizes, registry: FeatureRegistry = DEFAULT_REGISTRY) -> list:
    """Same as extract_features but on parallel (ts, size) sequences."""
    if len(times) < registry.trigger_count:
        raise ValueError(f"need {registry.trigger_count} packets, got {len(times)}")
    out = []
    for w in registry.prefix_windows:
        out.extend(_window_stats(times[:w], sizes[:w]))
    return out


def project_features(vec, subset) -> list:
    for i in subset:
        if i >= len(vec):
            raise IndexError(f"subset index {i} out of range for vector of length {len(vec)}")
    return [vec[i] for i in subset]


NOT_YET = None  # observe_packet returns the feature vector once triggered


@dataclass
class FlowState:
    key: FlowKey
    registry: FeatureRegistry = DEFAULT_REGISTRY
    packets: list = field(default_factory=list)
    triggered: bool = False
    verdict: str = "none"  # none | pending | benign | malicious
    last_seen: float = 0.0

    def observe_packet(self, pkt: PacketRecord):
        """Returns None before the trigger, the feature vector at it.

        Packets after the trigger are forwarded without re-buffering.
        """
        if flow_key_of(pkt) != self.key:
            raise ValueError(f"packet key {flow_key_of(pkt)} does not match flow {self.key}")
        self.last_seen = pkt.ts
        if self.triggered:
            return NOT_YET
        self.packets.append(pkt)
        if len(self.packets) == self.registry.trigger_count:
            self.triggered = True
            self.verdict = "pending"
            return extract_features(self.packets, self.registry)
        return NOT_YET


@dataclass
class FlowTable:
    """Flow states keyed by 5-tuple, with idle-timeout eviction."""

    registry: FeatureRegistry = DEFAULT_REGISTRY
    idle_timeout: float = 60.0
    flows: dict = field(default_factory=dict)

    def observe(self, pkt: PacketRecord):
        key = flow_key_of(pkt)
        state = self.flows.get(key)
        if state is None:
            state = FlowState(key=key, registry=self.registry)
            self.flows[key] = state
        return state, state.observe_packet(pkt)

    def evict_idle(self, now: float) -> int:
        stale = [k for k, s in self.flows.items() if now - s.last_seen > self.idle_timeout]
        for k in stale:
            del self.flows[k]
        return len(stale)


# --- flow-trace files ------------------------------------------------------

TRACE_HEADER = ["ts", "src_ip", "dst_ip", "src_port", "dst_port", "proto", "size", "label"]


def write_trace(path, packets):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for p in packets:
            w.writerow([repr(p.ts), p.src_ip, p.dst_ip, p.src_port,
                        p.dst_port, p.protocol, p.size, p.label_hint])


def read_trace(path):
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise ValueError(f"bad trace header: {header}")
        for row in reader:
            out.append(PacketRecord(
                ts=float(row[0]), src_ip=row[1], dst_ip=row[2],
                src_port=int(row[3]), dst_port=int(row[4]),
                protocol=int(row[5]), size=int(row[6]), label_hint=int(row[7]),
            ))
    return out
