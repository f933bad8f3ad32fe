"""Ideal few-photon simulation of a linear-optics QND measurement of polarization."""

from .circuit import (
    D_PRIME,
    EQUAL_SUPERPOSITION,
    STRONG,
    WEAK,
    Analyzer,
    CircuitConfig,
    PolarizationQubit,
    RunOutcome,
    ZeroSuccessError,
    chained_measurement,
    characterize,
    joint_distribution,
    prepare_meter,
    run,
    signal_output_density_matrix,
    standard_inputs,
    weak_sweep,
)
from .fock import PureState, QubitDensityMatrix, apply_linear_optics, project_pattern, purity, reduce_to_qubit, tensor
from .metrics import (
    BinaryDistribution,
    JointDistribution,
    classical_fidelity,
    complementarity_check,
    knowledge,
    measurement_fidelity,
    qnd_fidelity,
    qsp_fidelity,
)

__version__ = "0.1.0"
