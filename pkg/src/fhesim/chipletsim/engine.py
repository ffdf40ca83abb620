"""Deterministic event engine for micro-op DAGs on a multi-chiplet package.

Micro-ops occupy one resource each: a compute unit (one NTT/INTT pipeline,
a pair of MAS units, a pair of AUT units per chiplet) or a link (one C2C
egress per chiplet in a unidirectional ring, one HBM port per chiplet, one
host link).  Transform durations are N1 cycles plus a configurable
pipeline-fill constant; transfers are quantized by the link's bytes per
cycle, or to N/N2 beats in exactness mode.

Two transfer semantics exist because the dataflows differ:
  * registered sends (the ModUp ring) start only after their data dep
    finishes: the algorithm holds a received limb in a register for one
    full pass before relaying it;
  * streamed sends (feed-forward broadcasts) may start with the producing
    op and chain hop to hop, but can never finish before their upstream
    stream finishes.

Determinism contract: identical config and op list give identical reports;
ties are broken by each op's priority tuple then uid.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

COMPUTE_KINDS = ("NTT", "INTT", "MAS", "AUT")
LINK_KINDS = ("SEND", "HBM_RD", "HBM_WR", "HOST_RD")


class DeadlockDetected(Exception):
    """The op graph contains a dependency cycle (internal bug guard)."""


class ConfigError(Exception):
    pass


@dataclass
class ChipletConfig:
    n1: int = 1024
    n2: int = 64
    f_ghz: float = 1.5
    r: int = 4
    hbm_gbps: float = 1200.0      # per chiplet, aggregate over its stacks
    c2c_gbps: float = 630.0       # per ring link
    ingress_gbps: float = 128.0   # host link, initial loads only
    word_bits: int = 54
    fill_cycles: int = 0          # extra pipeline-fill per transform
    exact: bool = False           # zero fill, matched-beat transfers
    charge_2x_comm: bool = False  # strawman rule: comm = 2x linear-op time

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    @property
    def poly_bytes(self) -> int:
        return -(-self.n * self.word_bits // 8)

    def _bytes_per_cycle(self, gbps: float) -> float:
        return gbps * 1e9 / (self.f_ghz * 1e9)

    def transform_cycles(self) -> int:
        return self.n1 + (0 if self.exact else self.fill_cycles)

    def _beat_cycles(self) -> int:
        # matched on-chip throughput: N2 coefficients of w bits per cycle
        return -(-self.n // self.n2)

    def c2c_cycles(self) -> int:
        if self.exact:
            return self._beat_cycles()
        if self.charge_2x_comm:
            return 2 * self._beat_cycles()
        return math.ceil(self.poly_bytes / self._bytes_per_cycle(self.c2c_gbps))

    def hbm_cycles(self) -> int:
        if self.exact:
            return 0
        return math.ceil(self.poly_bytes / self._bytes_per_cycle(self.hbm_gbps))

    def bound_warnings(self, levels: int) -> List[str]:
        k = self.hbm_gbps / self.c2c_gbps
        bound = (levels + 2) / (4 * k)
        if self.r > bound:
            return [f"r={self.r} exceeds the chiplet bound (L+2)/(4k)={bound:.2f}"]
        return []

    def to_json_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "n1", "n2", "f_ghz", "r", "hbm_gbps", "c2c_gbps", "ingress_gbps",
            "word_bits", "fill_cycles", "exact", "charge_2x_comm")}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ChipletConfig":
        return cls(**{k: doc[k] for k in doc if k in cls.__dataclass_fields__})


@dataclass
class MicroOp:
    uid: int
    kind: str
    resource: str
    duration: int
    deps: List[int] = field(default_factory=list)
    stream_deps: List[int] = field(default_factory=list)
    priority: Tuple = ()
    chiplet: Optional[int] = None
    phase: str = ""
    limb: Optional[int] = None
    digit: Optional[int] = None
    nbytes: int = 0
    counted: bool = True          # False for closing ring hops (no consumer)


class ScheduleBuilder:
    """Accumulates micro-ops; resources are named strings.

    Resource names: "ntt:<i>", "mas:<i>", "aut:<i>", "c2c:<i>" (egress of
    chiplet i), "hbm:<i>", "host".
    """

    def __init__(self, cfg: ChipletConfig):
        self.cfg = cfg
        self.ops: List[MicroOp] = []
        self.steps: List[dict] = []   # per-macro metadata for workload runs
        self._prev_ntt: Dict[str, int] = {}

    def add(self, kind: str, resource: str, duration: int, deps: Sequence[int] = (),
            stream_deps: Sequence[int] = (), priority: Tuple = (), chiplet: int | None = None,
            phase: str = "", limb: int | None = None, digit: int | None = None,
            nbytes: int = 0, counted: bool = True) -> int:
        uid = len(self.ops)
        deps = list(deps)
        if resource.startswith("ntt:"):
            # the NTT/INTT pipeline executes its static microcode in order
            prev = self._prev_ntt.get(resource)
            if prev is not None and prev not in deps:
                deps.append(prev)
            self._prev_ntt[resource] = uid
        self.ops.append(MicroOp(
            uid=uid, kind=kind, resource=resource, duration=duration,
            deps=deps, stream_deps=list(stream_deps),
            priority=tuple(priority) + (uid,), chiplet=chiplet, phase=phase,
            limb=limb, digit=digit, nbytes=nbytes, counted=counted))
        return uid

    def last_ntt(self, chiplet: int) -> Optional[int]:
        return self._prev_ntt.get(f"ntt:{chiplet}")

    def transform(self, kind: str, chiplet: int, deps: Sequence[int] = (),
                  priority: Tuple = (), phase: str = "", limb: int | None = None,
                  digit: int | None = None) -> int:
        return self.add(kind, f"ntt:{chiplet}", self.cfg.transform_cycles(), deps=deps,
                        priority=priority, chiplet=chiplet, phase=phase, limb=limb,
                        digit=digit)

    def shadow_mas(self, chiplet: int, deps: Sequence[int] = (), priority: Tuple = (),
                   phase: str = "", count: int = 1, limb: int | None = None,
                   digit: int | None = None) -> List[int]:
        return [self.add("MAS", f"mas:{chiplet}", 0, deps=deps, priority=priority,
                         chiplet=chiplet, phase=phase, limb=limb, digit=digit)
                for _ in range(count)]

    def send(self, src: int, duration: int | None = None, deps: Sequence[int] = (),
             stream_deps: Sequence[int] = (), priority: Tuple = (), phase: str = "",
             limb: int | None = None, digit: int | None = None,
             counted: bool = True) -> int:
        return self.add("SEND", f"c2c:{src}", duration if duration is not None
                        else self.cfg.c2c_cycles(), deps=deps, stream_deps=stream_deps,
                        priority=priority, chiplet=src, phase=phase, limb=limb,
                        digit=digit, nbytes=self.cfg.poly_bytes, counted=counted)

    def hbm_read(self, chiplet: int, deps: Sequence[int] = (), priority: Tuple = (),
                 phase: str = "") -> int | None:
        if self.cfg.exact:
            return None
        return self.add("HBM_RD", f"hbm:{chiplet}", self.cfg.hbm_cycles(), deps=deps,
                        priority=priority, chiplet=chiplet, phase=phase,
                        nbytes=self.cfg.poly_bytes)


@dataclass
class CycleReport:
    total_cycles: int
    wall_time_ms: float
    per_chiplet: List[Dict[str, int]]
    stall_by_phase: Dict[str, int]
    links: Dict[str, Dict[str, int]]
    polynomials_transferred: int
    ntt_utilization: float
    op_counts: Dict[str, int]
    phase_cycles: Dict[str, int]
    meta: dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    timeline: Optional[List[dict]] = None

    def to_json_dict(self) -> dict:
        doc = {
            "schema": 1,
            "total_cycles": self.total_cycles,
            "wall_time_ms": self.wall_time_ms,
            "per_chiplet": self.per_chiplet,
            "stall_by_phase": self.stall_by_phase,
            "links": self.links,
            "polynomials_transferred": self.polynomials_transferred,
            "ntt_utilization": self.ntt_utilization,
            "op_counts": self.op_counts,
            "phase_cycles": self.phase_cycles,
            "meta": self.meta,
            "warnings": self.warnings,
        }
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, default=str)

    def timeline_csv(self) -> str:
        rows = ["op,chiplet,resource,kind,phase,limb,digit,start,end"]
        for t in self.timeline or []:
            rows.append("{uid},{chiplet},{resource},{kind},{phase},{limb},{digit},"
                        "{start},{end}".format(**t))
        return "\n".join(rows) + "\n"


_CAPACITY = {"ntt": 1, "mas": 2, "aut": 2, "c2c": 1, "hbm": 1, "host": 1, "barrier": 1 << 30}


class Engine:
    def __init__(self, cfg: ChipletConfig):
        self.cfg = cfg

    def run(self, ops: List[MicroOp], meta: dict | None = None,
            with_timeline: bool = False, steps: List[dict] | None = None) -> CycleReport:
        n_ops = len(ops)
        start = [-1] * n_ops
        finish = [-1] * n_ops
        waiting_deps = [len(op.deps) + len(op.stream_deps) for op in ops]
        dependents: Dict[int, List[Tuple[int, bool]]] = {}
        for op in ops:
            for d in op.deps:
                dependents.setdefault(d, []).append((op.uid, False))
            for d in op.stream_deps:
                dependents.setdefault(d, []).append((op.uid, True))

        free: Dict[str, int] = {}
        queues: Dict[str, list] = {}

        def capacity(res: str) -> int:
            return _CAPACITY[res.split(":")[0]]

        ready_at: Dict[int, int] = {}
        events: list = []   # (time, seq, "finish"|..., uid)
        seq = 0

        def enqueue(uid: int, now: int) -> None:
            res = ops[uid].resource
            free.setdefault(res, capacity(res))
            heapq.heappush(queues.setdefault(res, []), (ops[uid].priority, uid))
            if uid not in ready_at:
                ready_at[uid] = now

        started_notify: List[int] = []

        def start_op(uid: int, now: int) -> None:
            nonlocal seq
            op = ops[uid]
            start[uid] = now
            end = now + op.duration
            for sd in op.stream_deps:
                end = max(end, finish[sd])
            finish[uid] = end
            seq += 1
            heapq.heappush(events, (end, seq, uid))
            started_notify.append(uid)

        def release_start(uid: int, now: int) -> None:
            # notify stream dependents that this op has started
            for child, is_stream in dependents.get(uid, ()):
                if is_stream:
                    waiting_deps[child] -= 1
                    if waiting_deps[child] == 0:
                        enqueue(child, now)

        for op in ops:
            if waiting_deps[op.uid] == 0:
                enqueue(op.uid, 0)

        done = 0
        now = 0
        while True:
            # start everything startable at the current time
            progress = True
            while progress:
                progress = False
                for res in list(queues):
                    q = queues[res]
                    while q and free[res] > 0:
                        _, uid = heapq.heappop(q)
                        free[res] -= 1
                        start_op(uid, now)
                        progress = True
                while started_notify:
                    release_start(started_notify.pop(), now)
                    progress = True
            if done == n_ops:
                break
            if not events:
                raise DeadlockDetected(
                    f"{n_ops - done} ops unscheduled with no pending events")
            now = events[0][0]
            while events and events[0][0] == now:
                _, _, uid = heapq.heappop(events)
                done += 1
                free[ops[uid].resource] += 1
                for child, is_stream in dependents.get(uid, ()):
                    if not is_stream:
                        waiting_deps[child] -= 1
                        if waiting_deps[child] == 0:
                            enqueue(child, now)

        return self._report(ops, start, finish, ready_at, meta or {}, with_timeline,
                            steps)

    # ------------------------------------------------------------------

    def _report(self, ops, start, finish, ready_at, meta, with_timeline,
                steps) -> CycleReport:
        cfg = self.cfg
        compute_ops = [op for op in ops if op.kind in COMPUTE_KINDS]
        consumed = set()
        for op in ops:
            consumed.update(op.deps)
            consumed.update(op.stream_deps)
        # wall time ends when the last op someone consumes (or any compute
        # op) retires; closing ring hops may drain the links afterwards.
        timed = [op.uid for op in ops if op.kind in COMPUTE_KINDS or op.uid in consumed]
        makespan = max((finish[u] for u in timed), default=0)

        per_chiplet = []
        stall_by_phase: Dict[str, int] = {}
        total_busy_ntt = 0

        def blocking_link_dep(uid: int, gap_start: int) -> bool:
            # A gap is a link stall only if some link dep finished inside it
            # while having been ready to transfer before the unit went idle;
            # waits for data that did not yet exist are latency, not stalls.
            for d in ops[uid].deps + ops[uid].stream_deps:
                if ops[d].kind in LINK_KINDS and finish[d] > gap_start \
                        and ready_at.get(d, 1 << 62) <= gap_start:
                    return True
            return False

        for ci in range(cfg.r):
            unit_ops = sorted((op.uid for op in ops
                               if op.resource == f"ntt:{ci}"), key=lambda u: start[u])
            busy = sum(finish[u] - start[u] for u in unit_ops)
            stall = 0
            prev_end = 0
            for u in unit_ops:
                gap = start[u] - prev_end
                if gap > 0 and blocking_link_dep(u, prev_end):
                    stall += gap
                    ph = ops[u].phase or "other"
                    stall_by_phase[ph] = stall_by_phase.get(ph, 0) + gap
                prev_end = max(prev_end, finish[u])
            idle = makespan - busy - stall
            per_chiplet.append({"busy": busy, "stall": stall, "idle": idle})
            total_busy_ntt += busy

        links: Dict[str, Dict[str, int]] = {}
        polys = 0
        for op in ops:
            if op.kind in LINK_KINDS:
                entry = links.setdefault(op.resource, {"bytes": 0, "busy_cycles": 0,
                                                       "sends": 0})
                entry["bytes"] += op.nbytes
                entry["busy_cycles"] += finish[op.uid] - start[op.uid]
                entry["sends"] += 1
                if op.kind == "SEND":
                    polys += 1

        op_counts: Dict[str, int] = {}
        for op in compute_ops:
            op_counts[op.kind] = op_counts.get(op.kind, 0) + 1

        phase_cycles: Dict[str, int] = {}
        for ph in {op.phase for op in compute_ops if op.phase}:
            uids = [op.uid for op in compute_ops if op.phase == ph]
            phase_cycles[ph] = max(finish[u] for u in uids) - min(start[u] for u in uids)

        util = total_busy_ntt / (cfg.r * makespan) if makespan else 0.0
        timeline = None
        if with_timeline:
            timeline = [{
                "uid": op.uid, "chiplet": op.chiplet if op.chiplet is not None else "",
                "resource": op.resource, "kind": op.kind, "phase": op.phase,
                "limb": op.limb if op.limb is not None else "",
                "digit": op.digit if op.digit is not None else "",
                "start": start[op.uid], "end": finish[op.uid],
            } for op in sorted(ops, key=lambda o: (start[o.uid], o.uid))]

        return CycleReport(
            total_cycles=makespan,
            wall_time_ms=makespan / (cfg.f_ghz * 1e9) * 1e3,
            per_chiplet=per_chiplet,
            stall_by_phase=stall_by_phase,
            links=links,
            polynomials_transferred=polys,
            ntt_utilization=util,
            op_counts=op_counts,
            phase_cycles=phase_cycles,
            meta=meta,
            warnings=list(meta.get("warnings", ())),
            timeline=timeline,
        )
