import numpy as np
import pytest

from zenolink.engine import (
    Coupler,
    DetectorTap,
    NetworkSpec,
    PhaseShift,
    PureState,
    Sink,
    Switch,
)


def random_network(rs: np.random.Generator, absorbers: bool = True):
    """A small random network plus a normalized random input state.

    Returns (net, state, switch_states).  With absorbers=False the element
    list contains only unitary elements (couplers, phases).
    """
    n_modes = int(rs.integers(2, 6))
    labels = [f"m{i}" for i in range(n_modes)]
    kinds = ["C", "C", "P"] + (["S", "K", "D"] if absorbers else [])
    elements = []
    for _ in range(int(rs.integers(1, 14))):
        kind = kinds[int(rs.integers(len(kinds)))]
        if kind == "C":
            i, j = rs.choice(n_modes, size=2, replace=False)
            elements.append(
                Coupler(labels[i], labels[j], float(rs.uniform(0, np.pi / 2)))
            )
        elif kind == "P":
            elements.append(
                PhaseShift(labels[int(rs.integers(n_modes))], float(rs.uniform(-np.pi, np.pi)))
            )
        elif kind == "S":
            i, j = rs.choice(n_modes, size=2, replace=False)
            elements.append(Switch(labels[i], labels[j], f"s{len(elements)}"))
        elif kind == "K":
            elements.append(Sink(labels[int(rs.integers(n_modes))], f"k{len(elements)}"))
        else:
            elements.append(DetectorTap(labels[int(rs.integers(n_modes))], f"d{len(elements)}"))
    net = NetworkSpec(labels, elements)
    switches = {
        sid: ("BLOCK" if rs.random() < 0.5 else "PASS") for sid in net.switch_ids
    }
    amps = rs.normal(size=n_modes) + 1j * rs.normal(size=n_modes)
    amps = amps / np.linalg.norm(amps)
    state = PureState({lab: complex(a) for lab, a in zip(labels, amps)})
    return net, state, switches


@pytest.fixture
def rs():
    return np.random.default_rng(20260816)
