"""Macro-routine expansions into micro-op DAGs.

Limb distribution is interleaved by default: limb (or live base) t lives
on chiplet t mod r, so depth loss idles chiplets uniformly.  The ModUp
ring follows the non-blocking schedule: each chiplet transforms its own
limb, relays one limb per pass to its ring predecessor, and overlaps the
(l+2)/r key-multiplication transforms of the current pass with the next
receive.  ModDown and the digit (dnum < L+1) flow broadcast INTT results
feed-forward with streamed relays.

The NTT/INTT unit of each chiplet executes its ops strictly in issue
order (static microcode), which the builder enforces by chaining; MAS and
AUT pairs and the links are free-running resources.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .engine import ChipletConfig, CycleReport, Engine, ScheduleBuilder

Assignment = str  # INTERLEAVED | SEQUENTIAL | DIGITWISE


def limb_owner(assignment: Assignment, t: int, r: int, levels: int, k: int = 1) -> int:
    if assignment == "INTERLEAVED":
        return t % r
    if assignment == "SEQUENTIAL":
        chunk = -(-(levels + 1) // r)
        return min(t // chunk, r - 1)
    if assignment == "DIGITWISE":
        return (t // k) % r
    raise ValueError(f"unknown assignment {assignment!r}")


_DRAIN = 1 << 18   # priority class for closing hops: transferred, never waited on


def _ring_broadcast(sb: ScheduleBuilder, producer: int, owner: int, pri: Tuple,
                    phase: str, limb: int | None = None) -> Dict[int, int]:
    """Streamed feed-forward broadcast of one polynomial around the ring.

    Returns the arrival op per chiplet (the producer itself for the owner).
    The final hop that closes the circle is emitted for transfer accounting
    but deprioritized so it only drains an otherwise idle link.
    """
    r = sb.cfg.r
    arrival: Dict[int, int] = {owner: producer}
    if r == 1:
        return arrival
    prev = producer
    for h in range(1, r + 1):
        closing = h == r
        src = (owner - h + 1) % r
        hop = sb.send(src, stream_deps=[prev],
                      priority=((_DRAIN,) + pri + (h,)) if closing else pri + (h,),
                      phase=phase, limb=limb, counted=not closing)
        if not closing:
            arrival[(owner - h) % r] = hop
        prev = hop
    return arrival


# ---------------------------------------------------------------------------
# dnum = L+1 KeySwitch on the non-blocking ring


def build_keyswitch_ring(sb: ScheduleBuilder, l: int, shadowed: bool = True,
                         include_moddown: bool = True, barrier: Optional[int] = None,
                         pri0: int = 0) -> None:
    cfg = sb.cfg
    r = cfg.r
    n_targets = l + 2                       # q_0..q_l plus the special base
    own_targets = {i: [t for t in range(n_targets) if t % r == i] for i in range(r)}
    rounds = -(-(l + 1) // r)
    base_deps = [barrier] if barrier is not None else []

    buf_ops: Dict[int, List[int]] = {t: [] for t in range(n_targets)}
    mac_ntts: Dict[int, List[int]] = {i: [] for i in range(r)}

    for j in range(rounds):
        intt_of: Dict[int, int] = {}
        for i in range(r):
            x = j * r + i
            if x <= l:
                intt_of[x] = sb.transform(
                    "INTT", i, deps=base_deps, priority=(pri0, j, 0), phase="modup",
                    limb=x)
        hop_of: Dict[Tuple[int, int], int] = {}
        for m in range(r):
            for i in range(r):
                x = j * r + (i + m) % r
                if x > l:
                    continue
                data = intt_of[x] if m == 0 else hop_of[(x, m)]
                gate = [data] + ([sb.last_ntt(i)] if sb.last_ntt(i) is not None
                                 else base_deps)
                # relay the limb to the ring predecessor while processing it
                if r > 1:
                    closing = m + 1 == r
                    hop_of[(x, m + 1)] = sb.send(
                        i, deps=gate,
                        priority=(_DRAIN, j, m) if closing else (pri0, j, m, 0),
                        phase="modup", limb=x, counted=not closing)
                for t in own_targets[i]:
                    read = sb.hbm_read(i, deps=(
                        [mac_ntts[i][-2]] if len(mac_ntts[i]) >= 2 else base_deps),
                        priority=(pri0, j, m, 1, t), phase="modup")
                    deps = [data] + ([read] if read is not None else [])
                    ntt = sb.transform("NTT", i, deps=deps,
                                       priority=(pri0, j, m, 2, t), phase="modup",
                                       limb=x, digit=t)
                    mac_ntts[i].append(ntt)
                    if shadowed:
                        macs = sb.shadow_mas(i, deps=[ntt],
                                             priority=(pri0, j, m, 2, t, 1),
                                             phase="modup", count=2, limb=x, digit=t)
                        buf_ops[t].append(macs[-1])
                    else:
                        for w in range(2):
                            mop = sb.add("MAS", f"ntt:{i}", cfg.transform_cycles(),
                                         deps=[ntt], priority=(pri0, j, m, 2, t, 1 + w),
                                         chiplet=i, phase="modup", limb=x, digit=t)
                            buf_ops[t].append(mop)

    if include_moddown:
        build_moddown_flow(sb, l, buf_deps=buf_ops, pri0=pri0 + 1, barrier=barrier)


def build_moddown_flow(sb: ScheduleBuilder, l: int, buf_deps: Optional[Dict[int, List[int]]],
                       pri0: int, barrier: Optional[int] = None,
                       components: int = 2, phase: str = "moddown") -> None:
    """Feed-forward ModDown of `components` over one special base (K = 1).

    One INTT on the owner of the dropped base, a streamed ring broadcast,
    then per-chiplet NTTs with the subtract-and-scale fused in.  The
    second component's broadcast rides behind the first, hiding its
    latency under the first component's compute.
    """
    cfg = sb.cfg
    r = cfg.r
    owner = (l + 1) % r
    base_deps = [barrier] if barrier is not None else []
    for comp in range(components):
        deps = (buf_deps[l + 1] if buf_deps else base_deps) or base_deps
        intt = sb.transform("INTT", owner, deps=deps, priority=(pri0, comp, 0),
                            phase=phase, limb=l + 1)
        sb.shadow_mas(owner, deps=[intt], priority=(pri0, comp, 0, 1), phase=phase)
        arrival = _ring_broadcast(sb, intt, owner, (pri0, comp, 1), phase, limb=l + 1)
        for t in range(l + 1):
            i = t % r
            deps = [arrival[i]] + (buf_deps[t][-1:] if buf_deps else base_deps)
            ntt = sb.transform("NTT", i, deps=deps, priority=(pri0, comp, 2, t),
                               phase=phase, limb=t)
            sb.shadow_mas(i, deps=[ntt], priority=(pri0, comp, 2, t, 1), phase=phase,
                          count=3 if buf_deps else 2)


def schedule_keyswitch_ring(cfg: ChipletConfig, l: int, shadowed: bool = True,
                            include_moddown: bool = True,
                            with_timeline: bool = False) -> CycleReport:
    sb = ScheduleBuilder(cfg)
    build_keyswitch_ring(sb, l, shadowed=shadowed, include_moddown=include_moddown)
    meta = {"routine": "keyswitch_ring", "l": l, "shadowed": shadowed,
            "warnings": cfg.bound_warnings(l)}
    return Engine(cfg).run(sb.ops, meta=meta, with_timeline=with_timeline)


def schedule_moddown_ring(cfg: ChipletConfig, l: int, components: int = 2,
                          fused_rescale: bool = False,
                          with_timeline: bool = False) -> CycleReport:
    sb = ScheduleBuilder(cfg)
    build_moddown_flow(sb, l, buf_deps=None, pri0=0, components=components,
                       phase="moddown")
    if fused_rescale:
        # rescale shares the wait: its INTT broadcast rides during the
        # ModDown NTT phase, dropping one base further down
        build_moddown_flow(sb, l - 1, buf_deps=None, pri0=1, components=components,
                           phase="rescale")
    meta = {"routine": "moddown_ring", "l": l, "components": components,
            "warnings": cfg.bound_warnings(l)}
    return Engine(cfg).run(sb.ops, meta=meta, with_timeline=with_timeline)


# ---------------------------------------------------------------------------
# dnum < L+1 KeySwitch (digit pipeline with base conversion)


def build_keyswitch_digits(sb: ScheduleBuilder, l: int, dnum: int, k: int,
                           strategy: str = "ALTERNATE",
                           barrier: Optional[int] = None, pri0: int = 0) -> None:
    if strategy == "DIGITWISE":
        build_keyswitch_digitwise(sb, l, dnum, k, barrier=barrier, pri0=pri0)
        return
    cfg = sb.cfg
    r = cfg.r
    nb = l + 1 + k                       # live bases of PQ_l
    base_deps = [barrier] if barrier is not None else []
    digits = [list(range(i, min(i + k, l + 1))) for i in range(0, l + 1, k)]

    # ModUp: all INTTs up front, hat-premultiplied, streamed ring broadcast
    arrival: Dict[Tuple[int, int], int] = {}
    for x in range(l + 1):
        owner = x % r
        intt = sb.transform("INTT", owner, deps=base_deps, priority=(pri0, 0, x),
                            phase="modup", limb=x)
        sb.shadow_mas(owner, deps=[intt], priority=(pri0, 0, x, 1), phase="modup",
                      limb=x)
        for i, hop in _ring_broadcast(sb, intt, owner, (pri0, 0, x, 2), "modup",
                                      limb=x).items():
            arrival[(x, i)] = hop

    mac_gate: Dict[int, List[int]] = {t: [] for t in range(nb)}
    mac_ntts: Dict[int, List[int]] = {i: [] for i in range(r)}
    for j, digit in enumerate(digits):
        own = set(digit)
        for t in range(nb):
            i = t % r
            if t in own:
                # key mult on the resident NTT-domain limbs, in the INTT shadow
                km = sb.shadow_mas(i, deps=base_deps, priority=(pri0, 1, j, t, 2),
                                   phase="modup", count=2, digit=j)
                mac_gate[t].extend(km)
                continue
            deps = [arrival[(x, i)] for x in digit]
            sb.shadow_mas(i, deps=deps, priority=(pri0, 1, j, t, 0), phase="modup",
                          count=len(digit), digit=j)      # base-conversion MACs
            read = sb.hbm_read(i, deps=(
                [mac_ntts[i][-2]] if len(mac_ntts[i]) >= 2 else base_deps),
                priority=(pri0, 1, j, t, 1), phase="modup")
            ntt = sb.transform("NTT", i, deps=deps + ([read] if read is not None else []),
                               priority=(pri0, 1, j, t, 2), phase="modup", digit=j,
                               limb=t)
            mac_ntts[i].append(ntt)
            km = sb.shadow_mas(i, deps=[ntt], priority=(pri0, 1, j, t, 3),
                               phase="modup", count=2, digit=j)
            mac_gate[t].extend(km)
        if j > 0:
            for t in range(nb):
                acc = sb.shadow_mas(t % r, deps=list(mac_gate[t][-2:]),
                                    priority=(pri0, 1, j, t, 4), phase="modup",
                                    count=2, digit=j)
                mac_gate[t].extend(acc)

    # ModDown: all 2K INTTs first, streamed broadcasts, then per-component NTTs
    md_arrival: Dict[Tuple[int, int, int], int] = {}
    for comp in range(2):
        for h in range(k):
            t = l + 1 + h
            owner = t % r
            intt = sb.transform("INTT", owner, deps=list(mac_gate[t][-2:]),
                                priority=(pri0, 2, comp, h), phase="moddown", limb=t)
            sb.shadow_mas(owner, deps=[intt], priority=(pri0, 2, comp, h, 1),
                          phase="moddown")
            for i, hop in _ring_broadcast(sb, intt, owner, (pri0, 2, comp, h, 2),
                                          "moddown", limb=t).items():
                md_arrival[(comp, h, i)] = hop
    for comp in range(2):
        for t in range(l + 1):
            i = t % r
            deps = [md_arrival[(comp, h, i)] for h in range(k)]
            ntt = sb.transform("NTT", i, deps=deps, priority=(pri0, 3, comp, t),
                               phase="moddown", limb=t)
            sb.shadow_mas(i, deps=[ntt], priority=(pri0, 3, comp, t, 1),
                          phase="moddown", count=k + 2)


def build_keyswitch_digitwise(sb: ScheduleBuilder, l: int, dnum: int, k: int,
                              barrier: Optional[int] = None, pri0: int = 0) -> None:
    """Digit-per-chiplet distribution (comparison flow).

    Each chiplet runs one digit's ModUp locally; key-mult results are
    duplicated so ModDown stays chiplet-local, at a one-time exchange of
    2(dnum-1)(l+1)/dnum plus 2K polynomials per chiplet.
    """
    cfg = sb.cfg
    r = cfg.r
    nb = l + 1 + k
    base_deps = [barrier] if barrier is not None else []
    digits = [list(range(i, min(i + k, l + 1))) for i in range(0, l + 1, k)]
    for j, digit in enumerate(digits):
        c = j % r
        last = None
        for x in digit:
            last = sb.transform("INTT", c, deps=base_deps, priority=(pri0, 0, j, x),
                                phase="modup", limb=x, digit=j)
        for t in range(nb - len(digit)):
            ntt = sb.transform("NTT", c, deps=[last] if last else base_deps,
                               priority=(pri0, 1, j, t), phase="modup", digit=j)
            sb.shadow_mas(c, deps=[ntt], priority=(pri0, 1, j, t, 1), phase="modup",
                          count=2 + len(digit), digit=j)
        # one-time exchange: 2(dnum-1)(l+1)/dnum polynomials per chiplet
        for s in range(math.ceil(2 * (dnum - 1) * (l + 1) / dnum)):
            sb.send(c, deps=[last] if last else base_deps, priority=(pri0, 2, j, s),
                    phase="modup", digit=j)
    # ModDown: duplicated K INTTs and base conversion, 2K polys exchanged
    for j in range(min(len(digits), r)):
        c = j % r
        last = None
        for h in range(k):
            last = sb.transform("INTT", c, deps=base_deps, priority=(pri0, 3, j, h),
                                phase="moddown")
        for s in range(2 * k):
            sb.send(c, deps=[last] if last else base_deps, priority=(pri0, 4, j, s),
                    phase="moddown")
        for t in range(math.ceil((l + 1) / max(len(digits), 1))):
            ntt = sb.transform("NTT", c, deps=[last] if last else base_deps,
                               priority=(pri0, 5, j, t), phase="moddown")
            sb.shadow_mas(c, deps=[ntt], priority=(pri0, 5, j, t, 1),
                          phase="moddown", count=k + 2)


def schedule_keyswitch_digits(cfg: ChipletConfig, l: int, dnum: int, k: int,
                              strategy: str = "ALTERNATE",
                              with_timeline: bool = False) -> CycleReport:
    sb = ScheduleBuilder(cfg)
    build_keyswitch_digits(sb, l, dnum, k, strategy=strategy)
    meta = {"routine": "keyswitch_digits", "l": l, "dnum": dnum, "k": k,
            "strategy": strategy, "warnings": cfg.bound_warnings(l)}
    report = Engine(cfg).run(sb.ops, meta=meta, with_timeline=with_timeline)
    transforms = report.op_counts.get("INTT", 0) + report.op_counts.get("NTT", 0)
    stall = sum(c["stall"] for c in report.per_chiplet)
    report.meta["ntt_equiv_avg"] = Fraction(transforms, cfg.r) + Fraction(
        stall, cfg.r * cfg.n1)
    report.meta["comm_overhead"] = stall / (cfg.r * report.total_cycles)
    return report


# ---------------------------------------------------------------------------
# Strawman techniques (function-split and one-chiplet-per-limb baselines)


def build_strawman(sb: ScheduleBuilder, l: int, technique: str) -> None:
    """Closed-form replays of the baseline distributions.

    Per-chiplet op and transfer counts follow the comparison table;
    communication is charged at twice the linear-op beat via the config's
    charge_2x_comm flag.
    """
    cfg = sb.cfg
    if technique == "A":
        # four function-partitioned chiplets; chiplet 0 owns NTT/INTT,
        # chiplet 1 the MAS units
        for w in range(l + 3):
            sb.transform("INTT", 0, priority=(0, w), phase="modup")
        for w in range((l + 1) * (l + 4)):
            ntt = sb.transform("NTT", 0, priority=(1, w), phase="modup")
            if w < (l + 1) * (l + 2):
                snd = sb.send(0, deps=[ntt], priority=(1, w, 1), phase="modup")
                sb.shadow_mas(1, deps=[snd], priority=(1, w, 2), phase="modup",
                              count=2)
        for w in range(2 * (l + 2)):   # ModDown component moves
            sb.send(1, priority=(2, w), phase="moddown")
    elif technique in ("B", "C"):
        intt_per = 2 if technique == "B" else l + 3
        for i in range(cfg.r):
            for w in range(intt_per):
                sb.transform("INTT", i, priority=(0, i, w), phase="modup")
            for w in range(l + 4):
                ntt = sb.transform("NTT", i, priority=(1, i, w), phase="modup")
                sb.shadow_mas(i, deps=[ntt], priority=(1, i, w, 1), phase="modup")
        # broadcasts: l+1 limbs to l+2 chiplets, plus 2(l+1) for ModDown
        for x in range(l + 1):
            for c in range(l + 2):
                sb.send(x % cfg.r, priority=(2, x, c), phase="modup", limb=x)
        for c in range(2 * (l + 1)):
            sb.send(c % cfg.r, priority=(3, c), phase="moddown")
    else:
        raise ValueError(f"unknown strawman technique {technique!r}")


def schedule_strawman(cfg: ChipletConfig, l: int, technique: str,
                      with_timeline: bool = False) -> CycleReport:
    technique = technique.upper()
    if technique == "OURS":
        return schedule_keyswitch_ring(cfg, l)
    run_cfg = replace(cfg, charge_2x_comm=True)
    if technique in ("B", "C"):
        run_cfg = replace(run_cfg, r=l + 2)
    sb = ScheduleBuilder(run_cfg)
    build_strawman(sb, l, technique)
    meta = {"routine": f"strawman_{technique}", "l": l}
    return Engine(run_cfg).run(sb.ops, meta=meta, with_timeline=with_timeline)


# ---------------------------------------------------------------------------
# Workload programs (macro-op lists)


def _macro_pointwise(sb: ScheduleBuilder, l: int, per_limb: int,
                     owner: Callable[[int], int], barrier: Optional[int],
                     pri0: int, phase: str) -> None:
    for t in range(l + 1):
        for w in range(per_limb):
            sb.add("MAS", f"mas:{owner(t)}", sb.cfg.transform_cycles(),
                   deps=[barrier] if barrier is not None else [],
                   priority=(pri0, t, w), chiplet=owner(t), phase=phase, limb=t)


def _macro_rescale(sb: ScheduleBuilder, l: int, owner: Callable[[int], int],
                   barrier: Optional[int], pri0: int) -> None:
    cfg = sb.cfg
    r = cfg.r
    src = owner(l)
    base = [barrier] if barrier is not None else []
    for comp in range(2):
        intt = sb.transform("INTT", src, deps=base, priority=(pri0, comp, 0),
                            phase="rescale", limb=l)
        arrival = _ring_broadcast(sb, intt, src, (pri0, comp, 1), "rescale", limb=l)
        for t in range(l):
            i = owner(t)
            ntt = sb.transform("NTT", i, deps=[arrival.get(i, intt)],
                               priority=(pri0, comp, 2, t), phase="rescale", limb=t)
            sb.shadow_mas(i, deps=[ntt], priority=(pri0, comp, 2, t, 1),
                          phase="rescale")


def _macro_rotate(sb: ScheduleBuilder, l: int, owner: Callable[[int], int],
                  barrier: Optional[int], pri0: int) -> None:
    base = [barrier] if barrier is not None else []
    for comp in range(2):
        for t in range(l + 1):
            sb.add("AUT", f"aut:{owner(t)}", sb.cfg.transform_cycles(), deps=base,
                   priority=(pri0, comp, t), chiplet=owner(t), phase="rotate", limb=t)
    build_keyswitch_ring(sb, l, barrier=barrier, pri0=pri0 + 1)


def run_workload(cfg: ChipletConfig, program: Sequence[dict],
                 assignment: Assignment = "INTERLEAVED", levels: int | None = None,
                 with_timeline: bool = False) -> CycleReport:
    """Execute a macro-op list; each macro starts after the previous one.

    Program entries: {"op": HADD|HMULT|KEYSWITCH|ROTATE|RESCALE|MODDOWN,
    "l": level, maybe "dnum"/"k"}.  BOOTSTRAP_SCHED entries carry a nested
    "schedule" list of the same shape.
    """
    flat = list(_flatten(program))
    if levels is None:
        levels = max(int(step.get("l", 0)) for step in flat)
    sb = ScheduleBuilder(cfg)
    barrier: Optional[int] = None
    pri = 0
    steps_meta = []
    for step in flat:
        op = step["op"].upper()
        l = int(step.get("l", levels))
        k = int(step.get("k", 1))
        owner = (lambda t, _k=k: limb_owner(assignment, t, cfg.r, levels, k=_k))
        first_op = len(sb.ops)
        if op == "HADD":
            _macro_pointwise(sb, l, 2, owner, barrier, pri, "hadd")
        elif op == "HMULT":
            _macro_pointwise(sb, l, 4, owner, barrier, pri, "hmult")
        elif op == "KEYSWITCH":
            if "dnum" in step and int(step["dnum"]) < l + 1:
                build_keyswitch_digits(sb, l, int(step["dnum"]), k, barrier=barrier,
                                       pri0=pri)
            else:
                build_keyswitch_ring(sb, l, barrier=barrier, pri0=pri)
        elif op == "ROTATE":
            _macro_rotate(sb, l, owner, barrier, pri)
        elif op == "RESCALE":
            _macro_rescale(sb, l, owner, barrier, pri)
        elif op == "MODDOWN":
            build_moddown_flow(sb, l, buf_deps=None, pri0=pri, barrier=barrier)
        elif op == "HOST_LOAD":
            # initial data load over the host link; steady-state routines
            # assume operands already resident in HBM
            nbytes = int(step.get("bytes", cfg.poly_bytes * (l + 1) * 2))
            cycles = math.ceil(nbytes / (cfg.ingress_gbps * 1e9 / (cfg.f_ghz * 1e9)))
            sb.add("HOST_RD", "host", cycles,
                   deps=[barrier] if barrier is not None else [],
                   priority=(pri,), phase="load", nbytes=nbytes)
        else:
            raise ValueError(f"unknown macro op {op!r}")
        new_ops = sb.ops[first_op:]
        active: Dict[int, set] = {}
        for mo in new_ops:
            if mo.chiplet is not None and mo.kind in ("NTT", "INTT", "MAS", "AUT") \
                    and mo.limb is not None:
                active.setdefault(mo.chiplet, set()).add(mo.limb)
        steps_meta.append({"op": op, "l": l,
                           "active_limbs": {c: len(s) for c, s in active.items()}})
        barrier = sb.add("BARRIER", "barrier", 0, deps=[o.uid for o in new_ops],
                         priority=(pri, 1 << 20))
        pri += 4
    meta = {"routine": "workload", "assignment": assignment, "steps": steps_meta,
            "warnings": cfg.bound_warnings(levels)}
    return Engine(cfg).run(sb.ops, meta=meta, with_timeline=with_timeline)


def _flatten(program: Sequence[dict]):
    for step in program:
        if step["op"].upper() == "BOOTSTRAP_SCHED":
            yield from _flatten(step["schedule"])
        else:
            yield step


# ---------------------------------------------------------------------------
# Chiplet sweep


def sweep_chiplets(cfg: ChipletConfig, r_list: Sequence[int], l: int = 30,
                   max_workers: int | None = None) -> List[dict]:
    """Amortized per-limb KeySwitch time versus chiplet count.

    Runs the full-depth switch for each r and amortizes over the limbs
    switched: time scales close to 1/r while
    l+1 >= r and degrades once chiplets outnumber live limbs.  Runs are
    independent and fan out across worker threads.
    """
    def one(r: int) -> dict:
        rep = schedule_keyswitch_ring(replace(cfg, r=r), l)
        wall_ns = rep.total_cycles / (cfg.f_ghz * 1e9) * 1e9
        return {
            "r": r,
            "total_cycles": rep.total_cycles,
            "amortized_ns_per_limb": wall_ns / (l + 1),
            "ntt_utilization": rep.ntt_utilization,
        }

    with ThreadPoolExecutor(max_workers=max_workers or len(r_list)) as pool:
        rows = list(pool.map(one, r_list))
    base = rows[0]["amortized_ns_per_limb"]
    for row in rows:
        row["ratio_to_first"] = row["amortized_ns_per_limb"] / base
    return rows
