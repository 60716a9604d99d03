"""Seeded discrete-event simulation of the AI-enhanced data plane.

Packets follow their commodity's planned walk.  Every switch is a single
server with two work classes: inference work (per-packet feature updates,
trigger and finalize jobs) is served ahead of forwarding work, which is what
lets heavy classification starve forwarding under attack load.  Verdict
votes travel in-band: a switch's finished votes are merged into packets as
they pass, and the flow is finalized at the hosting switch where a packet
first carries a complete set.

The clock is integer microseconds; identical inputs and seed give
bit-identical metrics.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .deploy import SL_MODE, WL_MODE
from .ensemble import majority_verdict, predict_tree
from .flowstats import DEFAULT_REGISTRY, extract_features_arrays, project_features

US = 1_000_000


class SimError(ValueError):
    pass


@dataclass(frozen=True)
class CostModel:
    """Abstract cycle costs standing in for VM-level CPU measurement.

    Calibrated so that a plain switch forwarding 1000 pkt/s sits near 30%
    utilization, and a strong-learner host saturates on its inference work
    alone once the aggregate attack feed approaches ~2000 pkt/s.
    """

    capacity: int = 10_000_000  # cycles per second per switch
    c_fwd: int = 3000  # cycles per forwarded packet
    c_feat: int = 80  # cycles per (feature x buffered packet)
    c_node: int = 50  # cycles per tree-node visit
    c_hdr: int = 100  # cycles per header append/finalize
    hop_latency_us: int = 1000
    queue_bound_s: float = 1.0  # pending work beyond this many seconds drops

    def cycles_to_us(self, cycles: int) -> int:
        return (cycles * US + self.capacity - 1) // self.capacity

    @property
    def queue_bound_cycles(self) -> int:
        return int(self.queue_bound_s * self.capacity)


def load_cost_model(path) -> CostModel:
    with open(path) as fh:
        return CostModel(**json.load(fh))


def save_cost_model(cm: CostModel, path):
    doc = {
        "capacity": cm.capacity, "c_fwd": cm.c_fwd, "c_feat": cm.c_feat,
        "c_node": cm.c_node, "c_hdr": cm.c_hdr,
        "hop_latency_us": cm.hop_latency_us, "queue_bound_s": cm.queue_bound_s,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


@dataclass(frozen=True)
class FlowSpec:
    src_host: str
    dst_host: str
    rate_pps: float
    label: int  # 0 benign, 1 malicious
    size_range: tuple  # inclusive byte bounds
    duration_s: float = 300.0
    packets_per_flow: int = 0  # 0 = one long flow; >0 = back-to-back sub-flows


@dataclass(frozen=True)
class TrafficSpec:
    flows: tuple  # of FlowSpec
    seed: int = 0
    duration_s: float = 300.0

    @classmethod
    def reference_mix(cls, benign_pairs, malicious_pairs, benign_rate=100.0,
                    attack_rate=100.0, seed=0, duration_s=300.0,
                    attack_flow_packets=120):
        """Benign long flows plus HULK-style attack flow churn."""
        flows = [
            FlowSpec(src, dst, benign_rate, 0, (68, 1500), duration_s, 0)
            for src, dst in benign_pairs
        ] + [
            FlowSpec(src, dst, attack_rate, 1, (68, 15000), duration_s,
                     attack_flow_packets)
            for src, dst in malicious_pairs
        ]
        return cls(flows=tuple(flows), seed=seed, duration_s=duration_s)


@dataclass
class SimFlow:
    """One concrete 5-tuple flow instance inside a run."""

    flow_id: int
    spec: FlowSpec
    src_port: int
    times_us: np.ndarray
    sizes: np.ndarray
    walk: tuple = ()  # switch indices, filled during scenario setup


def generate_traffic(spec: TrafficSpec):
    """Expand flow specs into concrete flows with exponential arrivals."""
    root = np.random.SeedSequence(spec.seed)
    flows = []
    fid = 0
    for fspec, child in zip(spec.flows, root.spawn(len(spec.flows))):
        rng = np.random.default_rng(child)
        horizon = int(fspec.duration_s * US)
        lo, hi = fspec.size_range
        port = 40000
        t = 0.0
        if fspec.packets_per_flow <= 0:
            gaps = rng.exponential(US / fspec.rate_pps, size=int(fspec.rate_pps * fspec.duration_s * 1.25) + 16)
            times = np.cumsum(gaps)
            times = times[times < horizon].astype(np.int64)
            sizes = rng.integers(lo, hi + 1, size=times.shape[0])
            flows.append(SimFlow(fid, fspec, port, times, sizes))
            fid += 1
        else:
            k = fspec.packets_per_flow
            while t < horizon:
                gaps = rng.exponential(US / fspec.rate_pps, size=k)
                times = (t + np.cumsum(gaps)).astype(np.int64)
                times = times[times < horizon]
                if times.shape[0] == 0:
                    break
                sizes = rng.integers(lo, hi + 1, size=times.shape[0])
                flows.append(SimFlow(fid, fspec, port, times, sizes))
                fid += 1
                port += 1
                t = float(times[-1])
    return flows


@dataclass
class MetricsReport:
    mode: str
    sim_duration_s: float
    injected: int
    delivered: int
    dropped: int
    suppressed: int
    delivered_bytes: int
    delivered_benign_bytes: int
    throughput_bps: float  # benign goodput
    utilization: dict  # switch id -> busy fraction
    hosting_mean_util: float
    peak_util: float
    tti_samples_us: list
    tti_mean_ms: float
    tti_max_ms: float
    tp: int
    tn: int
    fp: int
    fn: int
    blocked_flows: int
    unscored_flows: int
    stretch_pct: float

    @property
    def fpr(self) -> float:
        return self.fp / (self.fp + self.tn) if (self.fp + self.tn) else 0.0

    @property
    def fnr(self) -> float:
        return self.fn / (self.fn + self.tp) if (self.fn + self.tp) else 0.0


# event kinds
_ARRIVE, _DONE, _BLOCK = 0, 1, 2
# job kinds
_J_EXTRACT, _J_FWD, _J_TRIGGER, _J_FINALIZE = 0, 1, 2, 3


def run_scenario(graph, plan, bundle, traffic: TrafficSpec, cost_model: CostModel = CostModel(),
                 seed=None, registry=DEFAULT_REGISTRY, event_log=None) -> MetricsReport:
    """Deterministic event-driven execution of one deployment scenario."""
    if seed is not None:
        traffic = TrafficSpec(flows=traffic.flows, seed=seed, duration_s=traffic.duration_s)
    mode = plan.placement.mode
    switch_ids = list(graph.switches)
    sw_index = {s: i for i, s in enumerate(switch_ids)}
    n_sw = len(switch_ids)

    route_by_pair = {}
    for r in plan.routes:
        if r.feasible:
            route_by_pair[(r.commodity.src_host, r.commodity.dst_host)] = tuple(
                sw_index[s] for s in r.walk
            )
    for fspec in traffic.flows:
        if (fspec.src_host, fspec.dst_host) not in route_by_pair:
            raise SimError(f"plan has no feasible route for {fspec.src_host}->{fspec.dst_host}")

    n_learners = bundle.n
    full_mask = (1 << n_learners) - 1
    trigger_count = registry.trigger_count

    # hosted weak learners per switch index
    hosted = [[] for _ in range(n_sw)]
    if mode == WL_MODE:
        for s, colors in plan.placement.color_map.items():
            hosted[sw_index[s]] = sorted(c for c in colors if c < n_learners)
        sl_hosts = set()
    else:
        sl_hosts = {sw_index[s] for s in plan.placement.color_map}

    def is_hosting(sw):
        return bool(hosted[sw]) or sw in sl_hosts

    feat_cycles = [0] * n_sw  # extraction cycles per buffered packet
    for sw in range(n_sw):
        if sw in sl_hosts:
            feat_cycles[sw] = registry.feature_count * cost_model.c_feat
        elif hosted[sw]:
            feat_cycles[sw] = sum(len(bundle.learners[c].feature_subset) for c in hosted[sw]) * cost_model.c_feat

    flows = generate_traffic(traffic)
    for f in flows:
        f.walk = route_by_pair[(f.spec.src_host, f.spec.dst_host)]
    # plain-int copies keep the hot loop off numpy scalar conversions
    flow_times = [[int(v) for v in f.times_us] for f in flows]
    flow_sizes = [[int(v) for v in f.sizes] for f in flows]
    # first position of each switch in the walk that hosts inference;
    # buffering happens only there (walks may revisit switches)
    host_pos = []
    first_host_pos = []
    for f in flows:
        seen = set()
        positions = set()
        first = -1
        for pos, sw in enumerate(f.walk):
            if sw in seen:
                continue
            seen.add(sw)
            if is_hosting(sw):
                positions.add(pos)
                if first < 0:
                    first = pos
        host_pos.append(positions)
        first_host_pos.append(first)

    n_flows = len(flows)
    verdicts = [None] * n_flows  # None | 0 | 1
    finalizing = [False] * n_flows
    appended_mask = [0] * n_flows  # which learner slots have a vote somewhere
    trig_t0 = [None] * n_flows
    buffers = {}  # (sw, flow) -> [times, sizes] while filling
    buf_count = {}
    ready_mask = {}  # (sw, flow) -> votes finished at that switch
    ready_votes = {}

    hi = [deque() for _ in range(n_sw)]
    lo = [deque() for _ in range(n_sw)]
    busy = [False] * n_sw
    pending = [0] * n_sw
    busy_cycles = [0] * n_sw
    fwd_served = [0] * n_sw
    infer_cycles = [0] * n_sw
    blocktab = [set() for _ in range(n_sw)]

    injected = delivered = dropped = suppressed = 0
    delivered_bytes = 0
    delivered_benign_bytes = 0
    blocked_flows = set()
    tti_samples = []

    heap = []
    seq = 0
    heappush = heapq.heappush
    heappop = heapq.heappop

    def push(t, kind, payload):
        nonlocal seq
        heappush(heap, (t, seq, kind, payload))
        seq += 1

    capacity = cost_model.capacity
    bound = cost_model.queue_bound_cycles
    c_fwd = cost_model.c_fwd
    c_node = cost_model.c_node
    c_hdr = cost_model.c_hdr
    hop = cost_model.hop_latency_us

    log = event_log if event_log is not None else None

    def start_service(sw, now):
        nonlocal seq
        if busy[sw]:
            return
        q = hi[sw]
        if q:
            if q[0][1] == _J_EXTRACT:
                cycles = 0
                while q and q[0][1] == _J_EXTRACT:
                    cycles += q.popleft()[0]
                job = (cycles, _J_EXTRACT, None)
            else:
                job = q.popleft()
        elif lo[sw]:
            job = lo[sw].popleft()
        else:
            return
        busy[sw] = True
        heappush(
            heap,
            (now + (job[0] * US + capacity - 1) // capacity, seq, _DONE, (sw, job)),
        )
        seq += 1

    def compute_votes(sw, flow_id):
        """Run hosted learners on the switch's buffered view of the flow."""
        times, sizes = buffers.pop((sw, flow_id))
        vec = extract_features_arrays([t / US for t in times], sizes, registry)
        if sw in sl_hosts:
            votes = [predict_tree(wl.tree, project_features(vec, wl.feature_subset))
                     for wl in bundle.learners]
            cycles = sum(
                wl.tree.path_length(project_features(vec, wl.feature_subset)) * c_node
                for wl in bundle.learners
            ) + c_hdr
            return votes, None, cycles
        votes = {}
        cycles = 0
        for c in hosted[sw]:
            wl = bundle.learners[c]
            local = project_features(vec, wl.feature_subset)
            votes[c] = predict_tree(wl.tree, local)
            cycles += wl.tree.path_length(local) * c_node + c_hdr
        return None, votes, cycles

    def apply_blocking(flow_id, pos, now):
        blocked_flows.add(flow_id)
        walk = flows[flow_id].walk
        blocktab[walk[pos]].add(flow_id)
        for k in range(pos - 1, -1, -1):
            push(now + (pos - k) * hop, _BLOCK, (walk[k], flow_id))

    def settle_verdict(flow_id, verdict, pos, now):
        verdicts[flow_id] = verdict
        if trig_t0[flow_id] is not None:
            tti_samples.append(now - trig_t0[flow_id])
        if verdict == 1:
            apply_blocking(flow_id, pos, now)
        if log is not None:
            log.append((now, "verdict", switch_ids[flows[flow_id].walk[pos]], flow_id, verdict))

    # prime the heap with each flow's first packet
    for f in flows:
        if flow_times[f.flow_id]:
            push(flow_times[f.flow_id][0], _ARRIVE, (f.flow_id, 0, 0, 0, 0))

    while heap:
        t, _, kind, payload = heappop(heap)

        if kind == _ARRIVE:
            flow_id, pkt, pos, hmask, hvotes = payload
            f = flows[flow_id]
            if pos == 0:
                injected += 1
                nxt = pkt + 1
                times = flow_times[flow_id]
                if nxt < len(times):
                    heappush(heap, (times[nxt], seq, _ARRIVE, (flow_id, nxt, 0, 0, 0)))
                    seq += 1
            sw = f.walk[pos]
            if flow_id in blocktab[sw]:
                suppressed += 1
                continue
            # merge votes that finished at this switch into the in-band header
            if appended_mask[flow_id]:
                rm = ready_mask.get((sw, flow_id))
                if rm:
                    hvotes |= ready_votes[(sw, flow_id)] & ~hmask
                    hmask |= rm
            if pos in host_pos[flow_id] and verdicts[flow_id] is None:
                key = (sw, flow_id)
                if mode == WL_MODE and hmask == full_mask and not finalizing[flow_id]:
                    finalizing[flow_id] = True
                    job = (c_hdr, _J_FINALIZE, (flow_id, pos, hvotes))
                    hi[sw].append(job)
                    pending[sw] += c_hdr
                cnt = buf_count.get(key, 0)
                if cnt < trigger_count:
                    if cnt == 0:
                        buffers[key] = ([], [])
                    bt, bs = buffers[key]
                    # origin timestamps: flow statistics describe the flow
                    # itself, not queueing distortion along the path
                    bt.append(flow_times[flow_id][pkt])
                    bs.append(flow_sizes[flow_id][pkt])
                    cnt += 1
                    buf_count[key] = cnt
                    extract = feat_cycles[sw]
                    hi[sw].append((extract, _J_EXTRACT, None))
                    pending[sw] += extract
                    if cnt == trigger_count:
                        if pos == first_host_pos[flow_id] and trig_t0[flow_id] is None:
                            trig_t0[flow_id] = t
                        sl_votes, wl_votes, cycles = compute_votes(sw, flow_id)
                        job = (cycles, _J_TRIGGER, (flow_id, pos, sl_votes, wl_votes))
                        hi[sw].append(job)
                        pending[sw] += cycles
            # the inspection pipeline sees every packet; only the forwarding
            # queue is bounded, so a saturated switch drops rather than relays
            if pending[sw] > bound:
                dropped += 1
            else:
                fwd_job = (c_fwd, _J_FWD, (flow_id, pkt, pos, hmask, hvotes))
                lo[sw].append(fwd_job)
                pending[sw] += c_fwd
            if not busy[sw]:
                start_service(sw, t)

        elif kind == _DONE:
            sw, job = payload
            cycles, jkind, jp = job
            busy[sw] = False
            pending[sw] -= cycles
            busy_cycles[sw] += cycles
            if jkind == _J_FWD:
                flow_id, pkt, pos, hmask, hvotes = jp
                fwd_served[sw] += 1
                f = flows[flow_id]
                if pos + 1 >= len(f.walk):
                    delivered += 1
                    size = flow_sizes[flow_id][pkt]
                    delivered_bytes += size
                    if f.spec.label == 0:
                        delivered_benign_bytes += size
                else:
                    heappush(
                        heap, (t + hop, seq, _ARRIVE, (flow_id, pkt, pos + 1, hmask, hvotes))
                    )
                    seq += 1
            elif jkind == _J_EXTRACT:
                infer_cycles[sw] += cycles
            elif jkind == _J_TRIGGER:
                infer_cycles[sw] += cycles
                flow_id, pos, sl_votes, wl_votes = jp
                if verdicts[flow_id] is None:
                    if sl_votes is not None:
                        settle_verdict(flow_id, majority_verdict(sl_votes), pos, t)
                    else:
                        key = (sw, flow_id)
                        for c, v in wl_votes.items():
                            bit = 1 << c
                            if not appended_mask[flow_id] & bit:
                                appended_mask[flow_id] |= bit
                                ready_mask[key] = ready_mask.get(key, 0) | bit
                                if v:
                                    ready_votes[key] = ready_votes.get(key, 0) | bit
                                else:
                                    ready_votes.setdefault(key, 0)
            else:  # finalize
                infer_cycles[sw] += cycles
                flow_id, pos, hvotes = jp
                if verdicts[flow_id] is None:
                    votes = [(hvotes >> i) & 1 for i in range(n_learners)]
                    settle_verdict(flow_id, majority_verdict(votes), pos, t)
            start_service(sw, t)

        else:  # _BLOCK
            sw, flow_id = payload
            blocktab[sw].add(flow_id)

    duration = traffic.duration_s
    cap_total = cost_model.capacity * duration
    # backlog drained after the traffic window still counts as busy time, so
    # an overloaded switch is reported as exactly saturated rather than >100%
    util = {switch_ids[i]: min(1.0, busy_cycles[i] / cap_total) for i in range(n_sw)}
    hosting = [i for i in range(n_sw) if is_hosting(i)]
    hosting_mean = sum(util[switch_ids[i]] for i in hosting) / len(hosting) if hosting else 0.0

    tp = tn = fp = fn = 0
    unscored = 0
    for f in flows:
        v = verdicts[f.flow_id]
        if v is None:
            unscored += 1
        elif v == 1 and f.spec.label == 1:
            tp += 1
        elif v == 0 and f.spec.label == 0:
            tn += 1
        elif v == 1:
            fp += 1
        else:
            fn += 1

    # exact conservation is part of the report contract
    if injected != delivered + dropped + suppressed:
        raise SimError(
            f"packet conservation violated: {injected} != "
            f"{delivered}+{dropped}+{suppressed}"
        )
    for i in range(n_sw):
        if busy_cycles[i] != fwd_served[i] * c_fwd + infer_cycles[i]:
            raise SimError(f"work accounting mismatch at switch {switch_ids[i]}")

    return MetricsReport(
        mode=mode,
        sim_duration_s=duration,
        injected=injected,
        delivered=delivered,
        dropped=dropped,
        suppressed=suppressed,
        delivered_bytes=delivered_bytes,
        delivered_benign_bytes=delivered_benign_bytes,
        throughput_bps=delivered_benign_bytes * 8 / duration,
        utilization=util,
        hosting_mean_util=hosting_mean,
        peak_util=max(util.values()) if util else 0.0,
        tti_samples_us=tti_samples,
        tti_mean_ms=(sum(tti_samples) / len(tti_samples) / 1000.0) if tti_samples else 0.0,
        tti_max_ms=(max(tti_samples) / 1000.0) if tti_samples else 0.0,
        tp=tp, tn=tn, fp=fp, fn=fn,
        blocked_flows=len(blocked_flows),
        unscored_flows=unscored,
        stretch_pct=plan.stretch_pct,
    )


SWEEP_COLUMNS = [
    "attack_rate_pps", "mode", "throughput_bps", "hosting_mean_util", "peak_util",
    "tti_mean_ms", "tti_max_ms", "fpr", "fnr", "injected", "delivered",
    "dropped", "suppressed", "blocked_flows", "unscored_flows", "stretch_pct",
]


def report_row(rate, rep: MetricsReport) -> list:
    return [
        rate, rep.mode, f"{rep.throughput_bps:.3f}",
        f"{rep.hosting_mean_util:.6f}", f"{rep.peak_util:.6f}",
        f"{rep.tti_mean_ms:.3f}", f"{rep.tti_max_ms:.3f}",
        f"{rep.fpr:.6f}", f"{rep.fnr:.6f}",
        rep.injected, rep.delivered, rep.dropped, rep.suppressed,
        rep.blocked_flows, rep.unscored_flows, f"{rep.stretch_pct:.3f}",
    ]


def compare_deployments(graph, wl_plan, sl_plan, bundle, attack_rates, benign_pairs,
                        malicious_pairs, benign_rate=100.0, seed=0, duration_s=300.0,
                        cost_model: CostModel = CostModel(), progress=None):
    """Run both deployment modes at each attack rate with identical seeds."""
    rows = []
    for rate in attack_rates:
        traffic = TrafficSpec.reference_mix(
            benign_pairs, malicious_pairs, benign_rate=benign_rate,
            attack_rate=rate, seed=seed, duration_s=duration_s,
        )
        for label, plan in ((WL_MODE, wl_plan), (SL_MODE, sl_plan)):
            rep = run_scenario(graph, plan, bundle, traffic, cost_model)
            rows.append(report_row(rate, rep))
            if progress is not None:
                progress(rate, label, rep)
    return rows
