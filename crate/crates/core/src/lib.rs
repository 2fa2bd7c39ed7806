//! Quantum circuit simulation on 2-D qubit lattices with projected
//! entangled-pair states.
//!
//! Circuits are evolved exactly (bond extents grow, nothing is truncated),
//! amplitudes are obtained by contracting the projected network with one of
//! three strategies, and a closed-form cost model decides which strategy fits
//! a memory budget. A state-vector simulator and Porter-Thomas statistics are
//! included for verification.

pub mod bitstring;
pub mod circuit;
pub mod contraction;
pub mod error;
pub mod gates;
pub mod oracle;
pub mod peps;
pub mod stats;
pub mod tensor;

pub use bitstring::Bitstring;
pub use circuit::{generate_rqc, parse_circuit, serialize_circuit, Circuit, Gate, GateKind, Layer};
pub use contraction::{
    amplitude, estimate_cost, plan_contraction, AmplitudeRecord, ContractionPlan, CostReport,
    MemoryBudget, ProjectedNetwork, Strategy,
};
pub use error::{Error, Result};
pub use oracle::{simulate_statevector, StateVector};
pub use peps::{PepsState, Site};
pub use stats::{porter_thomas_report, DistributionReport};
pub use tensor::{DenseTensor, C64};

/// Evolves `|0..0>` through `circuit`.
pub fn evolve(circuit: &Circuit) -> Result<PepsState> {
    let mut state = PepsState::product(circuit.rows(), circuit.cols(), None)?;
    for op in circuit.ops() {
        state.apply(&op?)?;
    }
    Ok(state)
}
