"""zenolink: chained quantum Zeno interferometer simulator.

Builds nested switched interferometer networks, propagates single-photon
amplitudes exactly, audits counterfactuality by forward/backward overlap,
models channel imperfections stochastically, and transmits images bit by
bit over the simulated link.
"""

__version__ = "0.1.0"

from .engine import (
    BLOCK,
    PASS,
    Coupler,
    DetectionReport,
    DetectorTap,
    ModeId,
    ModeMismatchError,
    NetworkFormatError,
    NetworkSpec,
    PhaseShift,
    PureState,
    Sink,
    Switch,
    UnknownDetectorError,
    UnresolvedSwitchError,
    backward_propagate,
    coupler_matrix,
    forward_states,
    parse_network,
    propagate,
)
from .zeno import (
    SuccessPoint,
    bit0_error_bound,
    ground_prob_single,
    sweep,
    sweep_csv,
    theoretical_success,
    zeno_survival,
    zeno_survival_bound,
)
from .protocol import (
    BuiltProtocol,
    ParamsOutOfRangeError,
    PortMap,
    ProtocolParams,
    SwitchPattern,
    build_protocol,
    detune_tweaks,
    ideal_detection_probs,
    input_state,
    resolve_bit,
)
from .trace import TraceReport, TraceRow, audit_summary, trace_audit
from .montecarlo import (
    BitTrialResult,
    BitsPerDetection,
    EmptyInputError,
    ImperfectionModel,
    RngStream,
    VisibilityEstimate,
    bits_per_detection,
    db_to_transmittance,
    estimate_visibility,
    jitter_sigma,
    mean_df_conditional_rate,
    perturbed_probs,
    transmit_bit,
)
from .image import (
    BitPlane,
    DimensionMismatchError,
    GrayImage,
    TransmissionJob,
    binarize,
    demo_logo,
    error_report,
    gray_level,
    transmit_image,
)
from .pgm import PgmFormatError, read_pgm, write_pgm
from .config import ConfigError, RunConfig, build_run_config, load_config
