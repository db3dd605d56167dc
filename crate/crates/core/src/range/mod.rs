//! Range-only position and velocity-bias estimation as an LTV observability
//! problem: beacon algebra, scenarios, the lifted system, its closed-form
//! transition matrix and `M(t)`, and the persistent-excitation check.

mod beacons;
mod lifted;
mod pe;
mod scenario;
mod trajectory;
mod verdict;

pub use beacons::{BeaconConfig, ALPHA_SUM_TOL};
pub use lifted::{
    build_lifted_system, build_m, closed_form_phi, input_vector, m_phi_expansion, measure,
    measure_from_ranges, output_matrix, velocity_primitive,
};
pub use pe::{acceleration_gram, default_grid, pe_check, PeReport, PeWindow};
pub use scenario::{y0_of, LiftedLayout, LiftedState, Scenario, ScenarioFile};
pub use trajectory::Trajectory;
pub use verdict::{uo_verdict, UoVerdict, UoWindow, UO_FLOOR};
