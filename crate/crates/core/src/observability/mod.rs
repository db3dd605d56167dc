//! The `N_k` observability chain, sufficient conditions C1/C2 and the
//! rotation/projector counterexample.

mod chain;
mod conditions;
mod counterexample;

pub use chain::{build_chain, ChainRow, NkChain};
pub use conditions::{
    check_c1, check_c2, output_energy, ConditionDiagnostics, ConditionId, ConditionReport,
    CONSTANCY_SAMPLES, CONSTANCY_TOL, REAL_SPECTRUM_TOL,
};
pub use counterexample::{
    analytic_m_integral_min_eig, build_counterexample, counterexample_report, nodes_for_window,
    null_direction, projector, rotation_matrix, witness, CounterexampleEntry,
};
