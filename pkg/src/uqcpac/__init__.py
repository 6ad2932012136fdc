"""Universal variational ansatz compiler and PAC-learning testbench."""
from .ansatz import AnsatzShape, build_ansatz, expand_layer, expand_level1, param_index
from .compiler import (
    CompiledAnsatz,
    EulerZX,
    compile_to_ansatz,
    euler_zx,
    layers_for_gate,
    normalize_circuit,
    verify_compilation,
)
from .errors import CapacityError, DomainError, ParseError, ResourceError, UqcpacError
from .learning import (
    ConceptClassParams,
    Dataset,
    ERMConfig,
    empirical_risk,
    erm_gap_check,
    estimate_risk,
    generate_dataset,
    grid_spacing,
    round_to_grid,
    sample_complexity,
    train_erm,
)
from .metrics import equal_up_to_phase, fidelity, loss, op_norm_distance, trace_distance_oracle
from .statevector import (
    CNOT,
    RX,
    RY,
    RZ,
    U1,
    Circuit,
    Gate,
    H,
    StateVector,
    apply_circuit,
    apply_gate,
    basis_state,
    circuit_unitary,
    sample_haar_state,
)

__version__ = "0.1.0"
