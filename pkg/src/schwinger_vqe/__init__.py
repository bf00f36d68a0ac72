"""Ground-state toolkit for the multi-flavor lattice Schwinger model.

Builds the gauge-eliminated spin Hamiltonian at finite chemical potential,
simulates a number-conserving layered variational circuit exactly, solves
charge sectors by exact diagonalization, and sweeps chemical potentials to
map first-order phase transitions.
"""

from .model import (
    ModelParams,
    build_hamiltonian,
    charge_operator,
    delta_n_operator,
    is_symmetric_point,
    symmetry_operator,
    total_charge_operator,
    SymmetryOp,
)
from .pauli import PauliSum, PauliTerm
from .simulator import (
    LayerAngles,
    NonHermitianError,
    apply_ansatz,
    apply_rz,
    apply_xxyy,
    compile_operator,
    dump_statevector,
    expectation,
    neel_state,
    overlap,
)
from .eigensolver import (
    ConvergenceError,
    SectorBasis,
    SectorLeakageError,
    SpectrumResult,
    ground_space_overlap,
    ground_state,
    oracle_hamiltonian,
    sector_basis,
    sector_matrix,
    zero_charge_basis,
)
from .vqe import (
    AnsatzConfig,
    OptimizerSettings,
    VqeRunRecord,
    ansatz_state,
    best_record,
    classify_outliers,
    cost,
    cost_and_gradient,
    expand_params,
    gradient,
    multi_start,
    optimize,
    random_initial_params,
)

__version__ = "0.1.0"
