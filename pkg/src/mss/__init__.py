"""Magic secret sharing toolkit.

Simulates the GHZ-based protocol that distributes non-stabilizer
("magic") resource states with an (n-1, n) threshold, computes the
Wigner-distance magic monotone by linear programming, certifies delivery
through steering correlations, and reproduces the shot-sampled tomography
analysis pipeline at desk scale.
"""

from .magic import MagicResult, c_closed_form, octahedron_distance, optimal_mixture, wigner_distance
from .protocol import (
    GateAdmissibility,
    ProtocolTranscript,
    check_gate_admissibility,
    magic_scan,
    run_all_branches,
    run_exact,
    security_report,
)
from .qcore import DensityMatrix, PureState, ghz, phase_gate, phase_plus
from .stabilizer import enumerate_stabilizer_states, is_stabilizer
from .steering import (
    Assemblage,
    CertificationRecord,
    build_assemblage,
    certify_exact,
    evaluate_functional,
    sampled_certification,
)
from .tomo import NoiseModel, experiment_table, reconstruct, sample_run
from .wigner import WignerVector, phase_point_operator, state_from_wigner, wigner_of

__version__ = "0.1.0"

__all__ = [
    "Assemblage",
    "CertificationRecord",
    "DensityMatrix",
    "GateAdmissibility",
    "MagicResult",
    "NoiseModel",
    "ProtocolTranscript",
    "PureState",
    "WignerVector",
    "build_assemblage",
    "c_closed_form",
    "certify_exact",
    "check_gate_admissibility",
    "enumerate_stabilizer_states",
    "evaluate_functional",
    "experiment_table",
    "ghz",
    "is_stabilizer",
    "magic_scan",
    "octahedron_distance",
    "optimal_mixture",
    "phase_gate",
    "phase_plus",
    "phase_point_operator",
    "reconstruct",
    "run_all_branches",
    "run_exact",
    "sample_run",
    "sampled_certification",
    "security_report",
    "state_from_wigner",
    "wigner_distance",
    "wigner_of",
]
