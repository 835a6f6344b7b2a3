"""核心模块"""
from src.core.czd import CZDecomposition, bmo_norm, cz_decompose, verify_cz
from src.core.errors import (
    BesselRieszError,
    ConvergenceError,
    DomainError,
    MissingDecayError,
    ProfileTooLongError,
    ProvenanceError,
    RegimeError,
    SingularityError,
)
from src.core.functions import TestFunction, function_from_id
from src.core.kernel import riesz_kernel, riesz_kernel_many
from src.core.measure import BesselParameter, EpsilonLadder, HalfLineInterval, RadialGrid
from src.core.operators import TruncationProfile, truncated_riesz, truncation_profile
from src.core.oscillation import count_jumps, count_upcrossings, oscillation, rho_variation

__all__ = [
    'BesselParameter', 'BesselRieszError', 'CZDecomposition', 'ConvergenceError', 'DomainError',
    'EpsilonLadder', 'HalfLineInterval', 'MissingDecayError', 'ProfileTooLongError', 'ProvenanceError',
    'RadialGrid', 'RegimeError', 'SingularityError', 'TestFunction', 'TruncationProfile',
    'bmo_norm', 'count_jumps', 'count_upcrossings', 'cz_decompose', 'function_from_id', 'oscillation',
    'rho_variation', 'riesz_kernel', 'riesz_kernel_many', 'truncated_riesz', 'truncation_profile', 'verify_cz',
]
