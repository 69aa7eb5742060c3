# protocol.py
#
# Compiles (M, N) protocol parameters into the concrete switched network:
# an outer chain of M couplers (theta = pi/2M) on paths P1/P2, and between
# consecutive outer couplers one transmission arm of 2N inner couplers
# (theta = pi/2N) on paths P2/P3, each followed by phase-compensation slots
# and a Bob-controlled switch on paths P3/P4.  The two-sided mirror that
# folds the physical chip joins inner couplers N and N+1 of an arm; in the
# unfolded mode picture it is a lossless relabeling, so it contributes no
# element.  A channel monitor detector taps P3 at the end of every arm.

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .engine import (
    BLOCK,
    PASS,
    Coupler,
    DetectionReport,
    DetectorTap,
    NetworkSpec,
    PhaseShift,
    PureState,
    Switch,
    propagate,
)

MAX_PARAM = 64  # keeps sweeps and element counts tractable

MODE_LABELS = ("P1", "P2", "P3", "P4")
SOURCE_MODE = "P1"
D0 = "D0"
D1 = "D1"


class ParamsOutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolParams:
    outer_m: int
    inner_n: int

    def __post_init__(self):
        if not (2 <= self.outer_m <= MAX_PARAM):
            raise ParamsOutOfRangeError(f"outer M must be in [2, {MAX_PARAM}]")
        if not (2 <= self.inner_n <= MAX_PARAM):
            raise ParamsOutOfRangeError(f"inner N must be in [2, {MAX_PARAM}]")

    @property
    def theta_outer(self) -> float:
        return math.pi / (2 * self.outer_m)

    @property
    def theta_inner(self) -> float:
        return math.pi / (2 * self.inner_n)


@dataclass(frozen=True)
class PortMap:
    d0: str
    d1: str
    df: Tuple[str, ...]          # channel monitors, one per arm
    bob_sinks: Tuple[str, ...]   # ledger keys used when switches BLOCK


@dataclass
class SwitchPattern:
    bit: int
    states: Dict[str, str]


@dataclass
class BuiltProtocol:
    net: NetworkSpec
    ports: PortMap
    params: ProtocolParams
    element_count: Dict[str, int]
    # (boundary, mode label) pairs that make up the transmission channel:
    # P3 right after each switch, plus P4 (Bob's side) checked everywhere.
    channel_boundaries: List[Tuple[int, str]] = field(default_factory=list)
    phase_slots: List[int] = field(default_factory=list)      # element indices
    inner_coupler_slots: List[int] = field(default_factory=list)
    invert_bits: bool = False
    _cache: Dict = field(default_factory=dict, repr=False, compare=False)

    def expected_detector(self, bit: int) -> str:
        # which Alice detector should click for a given sent bit
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        want_d0 = (bit == 0) if not self.invert_bits else (bit == 1)
        return self.ports.d0 if want_d0 else self.ports.d1


def build_protocol(m: int, n: int, invert_bits: bool = False) -> BuiltProtocol:
    """Compile protocol parameters into a propagation-ready network.

    Layout per arm k (k = 1..M-1), between outer couplers k and k+1:
    2N repetitions of [inner coupler, PS1 on P3, PS2 on P2, switch], then a
    monitor tap Df<k> on P3.  Outer couplers act on (P1, P2); D0 and D1 tap
    P1 and P2 after the last outer coupler.
    """
    params = ProtocolParams(m, n)
    elements: List = []
    phase_slots: List[int] = []
    inner_slots: List[int] = []
    channel: List[Tuple[int, str]] = []
    bob_sinks: List[str] = []
    df_ids: List[str] = []

    def add(el) -> int:
        elements.append(el)
        return len(elements) - 1

    for k in range(1, m + 1):
        add(Coupler("P1", "P2", params.theta_outer))
        if k == m:
            break
        for j in range(1, 2 * n + 1):
            inner_slots.append(add(Coupler("P2", "P3", params.theta_inner)))
            phase_slots.append(add(PhaseShift("P3", 0.0)))   # PS1 slot
            phase_slots.append(add(PhaseShift("P2", 0.0)))   # PS2 slot
            sid = f"sw{k}.{j}"
            idx = add(Switch("P3", "P4", sid))
            bob_sinks.append("bob:" + sid)
            # boundary idx+1 is the state right after this switch
            channel.append((idx + 1, "P3"))
        df_ids.append(f"Df{k}")
        add(DetectorTap("P3", df_ids[-1]))
    add(DetectorTap("P1", D0))
    add(DetectorTap("P2", D1))

    net = NetworkSpec(MODE_LABELS, elements)
    arms = m - 1
    count = {
        "outer_couplers": m,
        "inner_couplers_per_arm": 2 * n,     # "2N beam splitters per arm"
        "inner_couplers_total": arms * 2 * n,
        "inner_cycles_per_arm": n - 1,       # loops between consecutive couplers
        "inner_mzi_accounting": arms * (n - 1),
        "switches": arms * 2 * n,
        "phase_shifts": arms * 4 * n,
        "monitor_detectors": arms,
        "elements": len(elements),
    }
    ports = PortMap(d0=D0, d1=D1, df=tuple(df_ids), bob_sinks=tuple(bob_sinks))
    return BuiltProtocol(
        net=net,
        ports=ports,
        params=params,
        element_count=count,
        channel_boundaries=channel,
        phase_slots=phase_slots,
        inner_coupler_slots=inner_slots,
        invert_bits=invert_bits,
    )


def resolve_bit(bit: int, built: BuiltProtocol) -> SwitchPattern:
    """Bob's switch setting for one bit: every switch gets the same state.

    Default mapping: bit 0 -> PASS (photon ends at D0), bit 1 -> BLOCK
    (photon ends at D1).  built.invert_bits flips the mapping.
    """
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    blocked = (bit == 1) if not built.invert_bits else (bit == 0)
    state = BLOCK if blocked else PASS
    return SwitchPattern(bit=bit, states={sid: state for sid in built.net.switch_ids})


def input_state(built: BuiltProtocol) -> PureState:
    return PureState(amplitudes={SOURCE_MODE: 1 + 0j})


def ideal_detection_probs(built: BuiltProtocol, bit: int) -> DetectionReport:
    """Single photon in P1, ideal phases, switches set for the given bit."""
    key = ("ideal", bit)
    hit = built._cache.get(key)
    if hit is not None:
        return hit
    pattern = resolve_bit(bit, built)
    _, report = propagate(built.net, input_state(built), pattern)
    built._cache[key] = report
    return report


def detune_tweaks(built: BuiltProtocol, delta: float, inner_index: int = 0) -> Dict[int, float]:
    """Additive angle error on one inner coupler, for perturbation studies."""
    slots = built.inner_coupler_slots
    if not slots:
        raise ValueError("protocol has no inner couplers")
    if not (0 <= inner_index < len(slots)):
        raise ValueError(f"inner_index must be in [0, {len(slots)})")
    return {slots[inner_index]: delta}
