# zeno.py
#
# Closed-form Zeno-suppression formulas and the (M, N) success-probability
# sweep.  The closed forms cover the blocked inner chain only; S0/S1 for the
# full protocol have no closed form and are defined operationally by network
# propagation, conditioned on the photon reaching either of Alice's
# detectors.

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

from .protocol import build_protocol, ideal_detection_probs


def ground_prob_single(n: int) -> float:
    """Survival probability of one weak step out of n: cos^2(pi/2n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.cos(math.pi / (2 * n)) ** 2


def zeno_survival(n: int) -> float:
    """Survival after n repeated weak steps: cos^(2n)(pi/2n) -> 1 as n grows."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.cos(math.pi / (2 * n)) ** (2 * n)


def zeno_survival_bound(n: int) -> float:
    # loose lower bound 1 - pi^2/(4n), useful as a sanity floor for n >= 2
    return 1.0 - math.pi**2 / (4 * n)


def bit0_error_bound(m: int) -> float:
    """Probability the photon leaves the bit-0 port per outer pass: sin^2(pi/2m)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    return 1.0 - math.cos(math.pi / (2 * m)) ** 2


@dataclass(frozen=True)
class SuccessPoint:
    m: int
    n: int
    s0: float
    s1: float


def theoretical_success(m: int, n: int) -> SuccessPoint:
    """S0 and S1 for the (m, n) protocol by exact network propagation.

    Success is conditioned on detection at D0 or D1: the blocked
    configuration loses a large fraction of photons to Bob's side, and the
    protocol's figure of merit is the probability that a detected photon
    lands on the correct detector.
    """
    built = build_protocol(m, n)
    s = []
    for bit in (0, 1):
        rep = ideal_detection_probs(built, bit)
        p0 = rep.prob_by_detector[built.ports.d0]
        p1 = rep.prob_by_detector[built.ports.d1]
        want = p0 if bit == 0 else p1
        s.append(want / (p0 + p1))
    return SuccessPoint(m=m, n=n, s0=s[0], s1=s[1])


def sweep(m_values: Iterable[int], n_values: Iterable[int]) -> List[SuccessPoint]:
    """Cartesian (m, n) evaluation, ordered by (m, n)."""
    ms = sorted(set(int(m) for m in m_values))
    ns = sorted(set(int(n) for n in n_values))
    if not ms or not ns:
        raise ValueError("sweep ranges must be nonempty")
    return [theoretical_success(m, n) for m in ms for n in ns]


def sweep_csv(points: Sequence[SuccessPoint]) -> str:
    """CSV with header m,n,s0,s1 and 6 fractional digits."""
    buf = io.StringIO()
    buf.write("m,n,s0,s1\n")
    for p in points:
        buf.write(f"{p.m},{p.n},{p.s0:.6f},{p.s1:.6f}\n")
    return buf.getvalue()


DEFAULT_M_RANGE = range(2, 9)    # sweep defaults mirror the useful corner
DEFAULT_N_RANGE = range(2, 25)   # of the parameter plane
