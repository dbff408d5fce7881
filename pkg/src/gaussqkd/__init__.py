"""Gaussian covariance-matrix toolkit for two-way continuous-variable QKD.

Builds the entanglement-based states of the two-way, one-way and floodlight
protocols, computes asymptotic key rates with reverse reconciliation,
checks U(n) covariance numerically and simulates heterodyne parameter
estimation.
"""

from .channels import IDENTITY_CHANNEL, ChannelParams, apply_channel
from .exceptions import GaussQKDError, ParameterError, UnphysicalStateError
from .keyrate import (
    Bounds,
    KeyRateReport,
    OptimizationResult,
    ThresholdResult,
    g_entropy,
    holevo_information,
    holevo_x2_E,
    key_rate,
    mutual_information,
    noise_threshold,
    optimize_rate,
)
from .protocols import (
    FloodlightParams,
    ProtocolState,
    TwoWayParams,
    build_floodlight,
    build_one_way,
    build_two_way,
)
from .simulator import (
    RunRecord,
    TestRegion,
    calibrated_radius,
    empirical_covariance,
    empirical_mutual_information,
    run_test,
    sample_outcomes,
)
from .states import (
    CovarianceMatrix,
    LambdaMatrix,
    apply,
    direct_sum,
    heterodyne_condition,
    outcome_covariance,
    su_mm_coherent_state,
    thermal,
    tmss,
    vacuum,
)
from .symmetry import (
    SymmetryReport,
    check_multicopy_invariance,
    check_phase_invariance,
    check_primitive_commutation,
)
from .symplectic import (
    ModeTag,
    SymplecticTransform,
    beamsplitter,
    phase_rotation,
    realify_unitary,
    symplectic_eigenvalues,
    symplectic_form,
    two_mode_squeezer,
)

__version__ = "0.1.0"
