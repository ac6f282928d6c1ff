"""Optimal superbroadcasting of mixed qubit states.

Closed-form scaling factors for the optimal universal and phase-covariant
N -> M broadcasters, their superbroadcasting thresholds, a dense simulation
of the measure-and-clone realization, and two-site entanglement analysis.
"""

__version__ = "0.1.0"

from .errors import CapacityError, ContractError, DomainError
from .scaling import (
    Covariance,
    ScalingResult,
    scaling_factor,
    scaling_phase,
    scaling_universal,
    single_site_bloch,
)
from .spinrep import HalfInteger, multiplicity, schur_basis, tensor_power_blocks
from .thresholds import asymptotic_fit, critical_purity, max_output_copies

__all__ = [
    "CapacityError", "ContractError", "DomainError", "Covariance", "ScalingResult",
    "scaling_factor", "scaling_phase", "scaling_universal", "single_site_bloch",
    "HalfInteger", "multiplicity", "schur_basis", "tensor_power_blocks",
    "asymptotic_fit", "critical_purity", "max_output_copies",
]
