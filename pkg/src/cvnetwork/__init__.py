"""Continuous-variable multipartite entanglement and teleportation networks."""

from .gaussian import (
    GaussianState,
    SymplecticMap,
    beamsplitter,
    coherent,
    coherent_fidelity,
    displace,
    measure_homodyne,
    squeeze,
    vacuum,
)
from .network import NetworkConfig, build_ghz_state, distill_pair, duan_value, nsplitter_map, tritter_map
from .teleport import (
    GainSchedule,
    TeleportOutcome,
    closed_form_fidelity,
    fidelity_curve,
    optimal_gain,
    optimize_gains_numeric,
    run_protocol,
    threshold_scan,
)

__version__ = "0.1.0"

__all__ = [
    "GainSchedule",
    "GaussianState",
    "NetworkConfig",
    "SymplecticMap",
    "TeleportOutcome",
    "beamsplitter",
    "build_ghz_state",
    "closed_form_fidelity",
    "coherent",
    "coherent_fidelity",
    "displace",
    "distill_pair",
    "duan_value",
    "fidelity_curve",
    "measure_homodyne",
    "nsplitter_map",
    "optimal_gain",
    "optimize_gains_numeric",
    "run_protocol",
    "squeeze",
    "threshold_scan",
    "tritter_map",
    "vacuum",
]
