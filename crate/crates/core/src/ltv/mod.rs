//! Linear time-varying systems: matrix-valued functions of time, transition
//! matrices and windowed observability Gramians.

mod gramian;
mod matrix_fn;
mod system;

pub use gramian::{
    extended_gramian, gramian, observable_on_grid, output_gramian, scan_with,
    weakest_direction_scan, GramianReport, ScanPoint, DEFAULT_NODES, MU_TOL, PSD_CLAMP,
};
pub use matrix_fn::{DerivativeSource, Evaluator, MatrixFn, FD_STEP};
pub use system::{
    transition_at_offsets, transition_matrix, LtvSystem, TransitionMatrix, DEFAULT_DT,
};

pub(crate) use system::ser_matrix;
