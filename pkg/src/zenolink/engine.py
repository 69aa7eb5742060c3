# engine.py
#
# Exact single-photon amplitude propagation through a small linear-optical
# network: 2-mode couplers, phase shifters, Bob-controlled switches, sinks
# and terminal detector taps, with explicit probability bookkeeping.
#
# States are complex amplitude vectors over named path modes.  Absorption
# (sinks, blocked switches, detector taps) is modeled as amplitude zeroing
# with a ledger credit, never renormalization, so the total-probability
# invariant stays checkable after every element.

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

CONSERVATION_TOL = 1e-12

BLOCK = "BLOCK"
PASS = "PASS"


class EngineError(Exception):
    pass


class ModeMismatchError(EngineError):
    """An element references a mode that is not part of the network."""


class UnresolvedSwitchError(EngineError):
    """Propagation hit a switch whose BLOCK/PASS state was not supplied."""


class UnknownDetectorError(EngineError):
    """Backward propagation was asked to postselect on a missing detector."""


class NetworkFormatError(EngineError):
    """Serialized network text did not parse."""


@dataclass(frozen=True)
class ModeId:
    index: int
    label: str


# ---------------------------------------------------------------------------
# Elements.  Mode references are by label; NetworkSpec resolves them to
# indices once, at construction.

@dataclass(frozen=True)
class Coupler:
    a: str
    b: str
    theta: float


@dataclass(frozen=True)
class PhaseShift:
    m: str
    phi: float


@dataclass(frozen=True)
class Switch:
    # State is resolved at propagation time: BLOCK absorbs mode a into the
    # sink "bob:<id>", PASS is the identity.
    a: str
    b: str
    id: str


@dataclass(frozen=True)
class Sink:
    m: str
    id: str


@dataclass(frozen=True)
class DetectorTap:
    m: str
    id: str


Element = Union[Coupler, PhaseShift, Switch, Sink, DetectorTap]


@dataclass
class PureState:
    """Amplitudes keyed by mode label plus a ledger of absorbed probability.

    Invariant: sum(|amp|^2) + sum(ledger) equals the input norm to 1e-12
    when produced by propagate().
    """
    amplitudes: Dict[str, complex]
    loss_ledger: Dict[str, float] = field(default_factory=dict)

    def norm(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values()) + sum(
            self.loss_ledger.values()
        )


@dataclass
class DetectionReport:
    prob_by_detector: Dict[str, float]
    prob_by_sink: Dict[str, float]
    surviving_norm: float

    def total(self) -> float:
        return (
            sum(self.prob_by_detector.values())
            + sum(self.prob_by_sink.values())
            + self.surviving_norm
        )


def coupler_matrix(theta: float) -> List[List[complex]]:
    """2x2 symmetric beam-splitter unitary with reflection coefficient cos(theta).

    [[cos t, i sin t], [i sin t, cos t]]; |M00|^2 is the reflectivity.
    n applications on the same mode pair compose to one coupler of angle n*t.
    """
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    c = math.cos(theta)
    s = math.sin(theta)
    return [[complex(c, 0.0), complex(0.0, s)], [complex(0.0, s), complex(c, 0.0)]]


class NetworkSpec:
    """Immutable ordered element list over named modes.

    Element order is the physical left-to-right traversal order.  The
    constructor validates mode references and compiles the element list to
    index-based op tuples so repeated propagation stays cheap.
    """

    def __init__(
        self,
        modes: Sequence[str],
        elements: Sequence[Element],
        detectors: Optional[Sequence[str]] = None,
    ):
        labels = list(modes)
        if len(set(labels)) != len(labels):
            raise ValueError("mode labels must be unique")
        self.modes: Tuple[ModeId, ...] = tuple(
            ModeId(i, lab) for i, lab in enumerate(labels)
        )
        self._index: Dict[str, int] = {lab: i for i, lab in enumerate(labels)}
        self.elements: Tuple[Element, ...] = tuple(elements)

        ops = []
        dets: List[str] = []
        switch_ids: List[str] = []
        for el in self.elements:
            if isinstance(el, Coupler):
                if el.a == el.b:
                    raise ValueError("coupler endpoints must differ")
                if not (0.0 <= el.theta <= math.pi / 2):
                    raise ValueError("coupler theta outside [0, pi/2]")
                ops.append(("C", self._mode(el.a), self._mode(el.b), el.theta))
            elif isinstance(el, PhaseShift):
                ops.append(("P", self._mode(el.m), el.phi))
            elif isinstance(el, Switch):
                if el.a == el.b:
                    raise ValueError("switch endpoints must differ")
                ops.append(("S", self._mode(el.a), self._mode(el.b), el.id))
                switch_ids.append(el.id)
            elif isinstance(el, Sink):
                ops.append(("K", self._mode(el.m), el.id))
            elif isinstance(el, DetectorTap):
                ops.append(("D", self._mode(el.m), el.id))
                dets.append(el.id)
            else:
                raise TypeError(f"unknown element {el!r}")
        self._ops: Tuple[tuple, ...] = tuple(ops)
        self.switch_ids: Tuple[str, ...] = tuple(switch_ids)
        if detectors is None:
            self.detectors: Tuple[str, ...] = tuple(dets)
        else:
            missing = set(detectors) - set(dets)
            if missing:
                raise ValueError(f"declared detectors without taps: {sorted(missing)}")
            self.detectors = tuple(detectors)

    def _mode(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ModeMismatchError(f"element references unknown mode {label!r}") from None

    @property
    def mode_labels(self) -> Tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    def mode_index(self, label: str) -> int:
        return self._mode(label)

    # -- text form ----------------------------------------------------------

    def serialize(self) -> str:
        """One element per line; see parse_network for the grammar."""
        lines = ["# modes: " + " ".join(self.mode_labels)]
        for el in self.elements:
            if isinstance(el, Coupler):
                lines.append(f"COUPLER {el.a} {el.b} {el.theta!r}")
            elif isinstance(el, PhaseShift):
                lines.append(f"PHASE {el.m} {el.phi!r}")
            elif isinstance(el, Switch):
                lines.append(f"SWITCH {el.a} {el.b} {el.id}")
            elif isinstance(el, Sink):
                lines.append(f"SINK {el.m} {el.id}")
            elif isinstance(el, DetectorTap):
                lines.append(f"DETECT {el.m} {el.id}")
        return "\n".join(lines) + "\n"


def parse_network(text: str) -> NetworkSpec:
    """Parse the line-oriented network format.

    Grammar, one element per line, '#' starts a comment:
        COUPLER a b theta
        PHASE m phi
        SWITCH a b id
        SINK m id
        DETECT m id
    Angles are radians as decimal literals.  Modes are declared implicitly
    by first use, indexed in order of appearance.
    """
    elements: List[Element] = []
    modes: List[str] = []
    seen = set()

    def touch(label: str):
        if label not in seen:
            seen.add(label)
            modes.append(label)

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0].upper()
        try:
            if kw == "COUPLER":
                a, b, theta = parts[1], parts[2], float(parts[3])
                touch(a), touch(b)
                elements.append(Coupler(a, b, theta))
            elif kw == "PHASE":
                m, phi = parts[1], float(parts[2])
                touch(m)
                elements.append(PhaseShift(m, phi))
            elif kw == "SWITCH":
                a, b, sid = parts[1], parts[2], parts[3]
                touch(a), touch(b)
                elements.append(Switch(a, b, sid))
            elif kw == "SINK":
                m, sid = parts[1], parts[2]
                touch(m)
                elements.append(Sink(m, sid))
            elif kw == "DETECT":
                m, did = parts[1], parts[2]
                touch(m)
                elements.append(DetectorTap(m, did))
            else:
                raise NetworkFormatError(f"line {ln}: unknown element {kw!r}")
        except (IndexError, ValueError) as exc:
            raise NetworkFormatError(f"line {ln}: {exc}") from exc
    return NetworkSpec(modes, elements)


def _resolve_states(net: NetworkSpec, switches) -> Dict[str, str]:
    if switches is None:
        states: Dict[str, str] = {}
    elif isinstance(switches, Mapping):
        states = dict(switches)
    else:
        states = dict(switches.states)  # SwitchPattern-like
    for sid in net.switch_ids:
        st = states.get(sid)
        if st is None:
            raise UnresolvedSwitchError(f"switch {sid!r} has no BLOCK/PASS state")
        if st not in (BLOCK, PASS):
            raise ValueError(f"switch {sid!r} state must be BLOCK or PASS, got {st!r}")
    return states


def _input_vector(net: NetworkSpec, state: PureState) -> List[complex]:
    vec = [0j] * len(net.modes)
    for label, amp in state.amplitudes.items():
        vec[net.mode_index(label)] = complex(amp)
    return vec


def _apply(op, vec, ledger, dets, states, tweaks, idx):
    kind = op[0]
    if kind == "C":
        _, i, j, theta = op
        if tweaks is not None and idx in tweaks:
            theta = theta + tweaks[idx]
        c = math.cos(theta)
        s = math.sin(theta)
        ai, aj = vec[i], vec[j]
        vec[i] = c * ai + 1j * s * aj
        vec[j] = 1j * s * ai + c * aj
    elif kind == "P":
        _, i, phi = op
        if tweaks is not None and idx in tweaks:
            phi = phi + tweaks[idx]
        if phi != 0.0:
            vec[i] *= cmath.exp(1j * phi)
    elif kind == "S":
        _, i, j, sid = op
        if states[sid] == BLOCK:
            p = abs(vec[i]) ** 2
            if p:
                key = "bob:" + sid
                ledger[key] = ledger.get(key, 0.0) + p
            vec[i] = 0j
        # PASS: identity
    elif kind == "K":
        _, i, sid = op
        p = abs(vec[i]) ** 2
        if p:
            ledger[sid] = ledger.get(sid, 0.0) + p
        vec[i] = 0j
    else:  # "D"
        _, i, did = op
        dets[did] = dets.get(did, 0.0) + abs(vec[i]) ** 2
        vec[i] = 0j


def propagate(
    net: NetworkSpec,
    state: PureState,
    switches=None,
    tweaks: Optional[Mapping[int, float]] = None,
) -> Tuple[PureState, DetectionReport]:
    """Apply the elements in order; return the final state and a report.

    switches resolves every Switch id to BLOCK or PASS (a mapping or an
    object with a .states mapping).  tweaks maps element index -> additive
    radians applied to that Coupler's theta or PhaseShift's phi; used for
    detuning and phase-jitter studies.  Deterministic: identical inputs give
    bit-identical outputs.
    """
    states = _resolve_states(net, switches)
    vec = _input_vector(net, state)
    ledger: Dict[str, float] = dict(state.loss_ledger)
    dets: Dict[str, float] = {d: 0.0 for d in net.detectors}
    for idx, op in enumerate(net._ops):
        _apply(op, vec, ledger, dets, states, tweaks, idx)
    out = PureState(
        amplitudes={m.label: vec[m.index] for m in net.modes},
        loss_ledger=dict(ledger),
    )
    # detections also count as removed probability for the state invariant
    for did, p in dets.items():
        out.loss_ledger[did] = out.loss_ledger.get(did, 0.0) + p
    surviving = sum(abs(a) ** 2 for a in vec)
    report = DetectionReport(
        prob_by_detector=dets, prob_by_sink=ledger, surviving_norm=surviving
    )
    return out, report


def forward_states(
    net: NetworkSpec,
    state: PureState,
    switches=None,
    tweaks: Optional[Mapping[int, float]] = None,
) -> List[List[complex]]:
    """Amplitude vector at every element boundary.

    Boundary b holds the state after the first b elements, so the result has
    len(elements)+1 entries; entry 0 is the input.
    """
    states = _resolve_states(net, switches)
    vec = _input_vector(net, state)
    ledger: Dict[str, float] = {}
    dets: Dict[str, float] = {}
    out = [list(vec)]
    for idx, op in enumerate(net._ops):
        _apply(op, vec, ledger, dets, states, tweaks, idx)
        out.append(list(vec))
    return out


def backward_propagate(
    net: NetworkSpec,
    postselected_detector: str,
    switches=None,
    tweaks: Optional[Mapping[int, float]] = None,
) -> List[List[complex]]:
    """Backward (postselected) amplitude vector at every element boundary.

    Starts from the named detector's tap and walks the element list in
    reverse applying each element's adjoint.  Absorbing elements (sinks,
    blocked switches, other detector taps) zero their mode: no backward
    amplitude can emerge from a mode whose forward amplitude was removed.
    Boundary indexing matches forward_states.
    """
    if postselected_detector not in net.detectors:
        raise UnknownDetectorError(f"no detector {postselected_detector!r} in network")
    states = _resolve_states(net, switches)
    n = len(net.modes)
    vec = [0j] * n
    out = [list(vec)]
    for idx in range(len(net._ops) - 1, -1, -1):
        op = net._ops[idx]
        kind = op[0]
        if kind == "C":
            _, i, j, theta = op
            if tweaks is not None and idx in tweaks:
                theta = theta + tweaks[idx]
            # adjoint of the symmetric coupler: theta -> -theta
            c = math.cos(theta)
            s = math.sin(theta)
            ai, aj = vec[i], vec[j]
            vec[i] = c * ai - 1j * s * aj
            vec[j] = -1j * s * ai + c * aj
        elif kind == "P":
            _, i, phi = op
            if tweaks is not None and idx in tweaks:
                phi = phi + tweaks[idx]
            if phi != 0.0:
                vec[i] *= cmath.exp(-1j * phi)
        elif kind == "S":
            _, i, j, sid = op
            if states[sid] == BLOCK:
                vec[i] = 0j
        elif kind == "K":
            _, i, sid = op
            vec[i] = 0j
        else:  # "D"
            _, i, did = op
            if did == postselected_detector:
                vec = [0j] * n
                vec[i] = 1 + 0j
            else:
                vec[i] = 0j
        out.append(list(vec))
    out.reverse()
    return out
