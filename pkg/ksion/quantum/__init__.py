from ksion.quantum.core import (
    IONS,
    ObservableSpec,
    QuantumState,
    apply_depolarizing,
    bell_state,
    correlation_tensor,
    embed,
    expectation,
    fig5_specs,
    is_hermitian,
    is_unitary,
    observable_from_phase,
    partial_trace,
    rotation,
    tensor,
)
