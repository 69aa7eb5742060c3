# trace.py
#
# Two-state-vector weak-trace audit.  A photon postselected on one of
# Alice's detectors leaves a weak trace on a channel segment only where the
# forward and backward amplitudes are both nonzero; the audit reports
# |forward * backward| on every channel-side segment.  Channel segments are
# path P3 immediately after each switch plus path P4 (Bob's side) at every
# element boundary.

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

from .engine import backward_propagate, forward_states
from .protocol import BuiltProtocol, input_state, resolve_bit


@dataclass(frozen=True)
class TraceRow:
    boundary: int
    mode: str
    forward_mag: float
    backward_mag: float
    trace: float


@dataclass
class TraceReport:
    bit: int
    postselect: str
    rows: List[TraceRow]
    max_trace: float
    max_forward_channel: float   # largest |forward| over channel segments
    duality_drift: float         # max |<bwd|fwd> - const| across boundaries

    def nonzero_rows(self, tol: float = 1e-12) -> List[TraceRow]:
        return [r for r in self.rows if r.trace > tol]


def trace_audit(
    built: BuiltProtocol,
    bit: int,
    postselect: Optional[str] = None,
    tweaks: Optional[Mapping[int, float]] = None,
) -> TraceReport:
    """Forward/backward overlap on every channel segment for one bit.

    postselect defaults to the detector the bit is supposed to fire.  The
    duality check: <backward(k)|forward(k)> must be boundary-independent for
    a fixed postselection; its drift is reported as a self-test of the
    adjoint propagation.
    """
    if postselect is None:
        postselect = built.expected_detector(bit)
    pattern = resolve_bit(bit, built)
    fwd = forward_states(built.net, input_state(built), pattern, tweaks=tweaks)
    bwd = backward_propagate(built.net, postselect, pattern, tweaks=tweaks)

    idx = {lab: i for i, lab in enumerate(built.net.mode_labels)}
    p3, p4 = idx["P3"], idx["P4"]

    rows: List[TraceRow] = []
    for b, mode in built.channel_boundaries:
        f = abs(fwd[b][p3])
        g = abs(bwd[b][p3])
        rows.append(TraceRow(b, mode, f, g, f * g))
    for b in range(len(fwd)):
        f = abs(fwd[b][p4])
        g = abs(bwd[b][p4])
        rows.append(TraceRow(b, "P4", f, g, f * g))

    max_trace = max((r.trace for r in rows), default=0.0)
    max_fwd = max((r.forward_mag for r in rows), default=0.0)

    # Overlap constancy holds up to the postselected tap; past it the
    # backward state is empty by construction, so stop the check there.
    tap = next(
        i
        for i, el in enumerate(built.net.elements)
        if getattr(el, "id", None) == postselect
    )
    overlaps = [
        sum(bv.conjugate() * fv for fv, bv in zip(fwd[b], bwd[b]))
        for b in range(tap + 1)
    ]
    ref = overlaps[0]
    drift = max(abs(o - ref) for o in overlaps)

    return TraceReport(
        bit=bit,
        postselect=postselect,
        rows=rows,
        max_trace=max_trace,
        max_forward_channel=max_fwd,
        duality_drift=drift,
    )


def audit_summary(report: TraceReport, tol: float = 1e-12) -> Dict:
    """JSON-friendly digest of a trace audit."""
    return {
        "bit": report.bit,
        "postselect": report.postselect,
        "segments": len(report.rows),
        "max_trace": report.max_trace,
        "max_forward_channel": report.max_forward_channel,
        "duality_drift": report.duality_drift,
        "nonzero_segments": [
            {
                "boundary": r.boundary,
                "mode": r.mode,
                "forward": r.forward_mag,
                "backward": r.backward_mag,
                "trace": r.trace,
            }
            for r in report.nonzero_rows(tol)
        ],
    }
