"""Exact state-vector simulation of entanglement teleportation through GHZ-class and cat-like channels."""

from .errors import (
    AddressingError,
    BasisError,
    CatportError,
    CompositionError,
    ConfigurationError,
    DegenerateChannelError,
    DomainError,
    LocalityError,
    ProtocolFailure,
)
from .locc import Branch, Script, Transcript, order_permutation_check, run_protocol, validate_locality
from .protocol_math import (
    CorrectionAction,
    OverlapFrame,
    SchmidtFrame,
    bell_basis,
    cat_correction,
    filter_measurement,
    gauge_unitaries,
    ghz_basis,
    ghz_class_correction,
    ghz_correction,
    overlap_frame,
    restore_unitaries,
    swap_unitary,
)
from .protocols import (
    ChannelSpec,
    TeleportInput,
    build_initial_state,
    build_script,
    cat_protocol,
    ghz_class_protocol,
    ghz_protocol,
    probabilistic_protocol,
)
from .qstate import (
    DensityMatrix,
    MeasurementBasis,
    StateVector,
    apply_gate,
    entanglement_entropy,
    fidelity,
    measure,
    negativity,
    partial_trace,
    schmidt,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "AddressingError",
    "BasisError",
    "Branch",
    "CatportError",
    "ChannelSpec",
    "CompositionError",
    "ConfigurationError",
    "CorrectionAction",
    "DegenerateChannelError",
    "DensityMatrix",
    "DomainError",
    "LocalityError",
    "MeasurementBasis",
    "OverlapFrame",
    "ProtocolFailure",
    "SchmidtFrame",
    "Script",
    "StateVector",
    "TeleportInput",
    "Transcript",
    "apply_gate",
    "bell_basis",
    "build_initial_state",
    "build_script",
    "cat_correction",
    "cat_protocol",
    "entanglement_entropy",
    "fidelity",
    "filter_measurement",
    "gauge_unitaries",
    "ghz_basis",
    "ghz_class_correction",
    "ghz_class_protocol",
    "ghz_correction",
    "ghz_protocol",
    "measure",
    "negativity",
    "order_permutation_check",
    "overlap_frame",
    "partial_trace",
    "probabilistic_protocol",
    "restore_unitaries",
    "run_protocol",
    "schmidt",
    "swap_unitary",
    "tensor",
    "validate_locality",
]
