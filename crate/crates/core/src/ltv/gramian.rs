use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::system::{ser_matrix, transition_at_offsets, DEFAULT_DT};
use super::{LtvSystem, MatrixFn};
use crate::error::{Error, Result};
use crate::linalg::{check_simpson_nodes, simpson_weight, symmetrize, SymmetricSpectrum};

/// Numerical observability floor shared across the toolkit.
pub const MU_TOL: f64 = 1e-6;

/// Default Simpson node count per window.
pub const DEFAULT_NODES: usize = 201;

/// Eigenvalues in `[-PSD_CLAMP, 0)` are reported as zero.
pub const PSD_CLAMP: f64 = 1e-8;

/// A windowed (extended) observability Gramian and its spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct GramianReport {
    pub t: f64,
    pub delta: f64,
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: DMatrix<f64>,
    /// Ascending, with quadrature noise in `[-1e-8, 0)` clamped to zero.
    pub eigenvalues: Vec<f64>,
    pub raw_eigenvalues: Vec<f64>,
    #[serde(serialize_with = "ser_vector")]
    pub weakest_direction: DVector<f64>,
    pub nodes: usize,
}

pub(crate) fn ser_vector<S: serde::Serializer>(
    v: &DVector<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(v.as_slice(), s)
}

impl GramianReport {
    /// Symmetrize `matrix` and attach its spectrum.
    pub fn from_matrix(t: f64, delta: f64, matrix: DMatrix<f64>, nodes: usize) -> Result<Self> {
        let matrix = symmetrize(&matrix);
        let spectrum = SymmetricSpectrum::new(&matrix)?;
        let raw_eigenvalues = spectrum.values.clone();
        let eigenvalues = raw_eigenvalues
            .iter()
            .map(|&v| if (-PSD_CLAMP..0.0).contains(&v) { 0.0 } else { v })
            .collect();
        Ok(Self {
            t,
            delta,
            matrix,
            eigenvalues,
            raw_eigenvalues,
            weakest_direction: spectrum.weakest_direction(),
            nodes,
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }
}

fn check_window(delta: f64, nodes: usize) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "window length must be > 0, got {delta}"
        )));
    }
    check_simpson_nodes(nodes)
}

/// `(1/δ)∫_t^{t+δ} Φᵀ(s,t) Oᵀ(s) O(s) Φ(s,t) ds` for an arbitrary output map
/// `O` with `n` columns, by composite Simpson over `nodes` points. `Φ` is
/// propagated once across the window with RK4 sub-steps no longer than `dt`.
pub fn output_gramian(
    sys: &LtvSystem,
    output: &MatrixFn,
    t: f64,
    delta: f64,
    nodes: usize,
    dt: f64,
) -> Result<GramianReport> {
    check_window(delta, nodes)?;
    let n = sys.state_dim();
    if output.cols() != n {
        return Err(Error::Dimension {
            context: "output map of the Gramian integrand".into(),
            expected: (output.rows(), n),
            found: output.dims(),
        });
    }
    let h = delta / (nodes - 1) as f64;
    let offsets: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();
    let phis = transition_at_offsets(sys, t, &offsets, dt)?;
    let mut acc = DMatrix::zeros(n, n);
    for (i, (off, phi)) in offsets.iter().zip(&phis).enumerate() {
        let op = output.eval(t + off)? * phi;
        acc += op.transpose() * &op * simpson_weight(i, nodes, h);
    }
    GramianReport::from_matrix(t, delta, acc / delta, nodes)
}

/// Observability Gramian `W(t, t+δ)`.
pub fn gramian(sys: &LtvSystem, t: f64, delta: f64, nodes: usize) -> Result<GramianReport> {
    output_gramian(sys, sys.c(), t, delta, nodes, DEFAULT_DT)
}

/// Extended Gramian `W̄(t, t+δ)` with `C` replaced by `M`.
pub fn extended_gramian(
    sys: &LtvSystem,
    m: &MatrixFn,
    t: f64,
    delta: f64,
    nodes: usize,
) -> Result<GramianReport> {
    output_gramian(sys, m, t, delta, nodes, DEFAULT_DT)
}

/// One entry of a weakest-direction scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub t: f64,
    pub min_eigenvalue: f64,
    #[serde(serialize_with = "ser_vector")]
    pub direction: DVector<f64>,
}

impl From<&GramianReport> for ScanPoint {
    fn from(r: &GramianReport) -> Self {
        Self {
            t: r.t,
            min_eigenvalue: r.min_eigenvalue(),
            direction: r.weakest_direction.clone(),
        }
    }
}

/// Smallest Gramian eigenvalue and its eigenvector at each window start,
/// in grid order.
pub fn weakest_direction_scan(
    sys: &LtvSystem,
    t_grid: &[f64],
    delta: f64,
    nodes: usize,
) -> Result<Vec<ScanPoint>> {
    scan_with(sys, sys.c(), t_grid, delta, nodes, 1)
}

/// Same as [`weakest_direction_scan`] for an arbitrary output map, with the
/// windows spread over `jobs` worker threads when `jobs > 1`.
pub fn scan_with(
    sys: &LtvSystem,
    output: &MatrixFn,
    t_grid: &[f64],
    delta: f64,
    nodes: usize,
    jobs: usize,
) -> Result<Vec<ScanPoint>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty window grid".into()));
    }
    check_window(delta, nodes)?;
    let one = |&t: &f64| {
        output_gramian(sys, output, t, delta, nodes, DEFAULT_DT).map(|r| ScanPoint::from(&r))
    };
    if jobs <= 1 {
        return t_grid.iter().map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    pool.install(|| t_grid.par_iter().map(one).collect())
}

/// `true` iff every scanned window has smallest eigenvalue `>= MU_TOL`.
pub fn observable_on_grid(points: &[ScanPoint]) -> bool {
    !points.is_empty() && points.iter().all(|p| p.min_eigenvalue >= MU_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn identity_output_on_zero_dynamics() {
        let sys = LtvSystem::unforced(MatrixFn::zeros(2, 2), MatrixFn::identity(2)).unwrap();
        let r = gramian(&sys, 0.0, 1.0, DEFAULT_NODES).unwrap();
        assert!((&r.matrix - DMatrix::identity(2, 2)).amax() < 1e-12);
        assert!((r.min_eigenvalue() - 1.0).abs() < 1e-12);
        assert!((r.weakest_direction.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_period_cosine_sine_row() {
        // ∫cos² = ∫sin² = π and ∫cos·sin = 0 over one period.
        let c = MatrixFn::new(1, 2, |t| DMatrix::from_row_slice(1, 2, &[t.cos(), t.sin()]));
        let sys = LtvSystem::unforced(MatrixFn::zeros(2, 2), c).unwrap();
        let r = gramian(&sys, 0.0, TAU, DEFAULT_NODES).unwrap();
        assert!((&r.matrix - DMatrix::identity(2, 2) * 0.5).amax() < 1e-10);
    }

    #[test]
    fn rejects_bad_windows() {
        let sys = LtvSystem::unforced(MatrixFn::zeros(2, 2), MatrixFn::identity(2)).unwrap();
        assert!(gramian(&sys, 0.0, 0.0, 11).is_err());
        assert!(gramian(&sys, 0.0, 1.0, 10).is_err());
        assert!(matches!(
            extended_gramian(&sys, &MatrixFn::identity(3), 0.0, 1.0, 11),
            Err(Error::Dimension { .. })
        ));
        assert!(weakest_direction_scan(&sys, &[], 1.0, 11).is_err());
    }

    #[test]
    fn parallel_scan_matches_sequential() {
        let c = MatrixFn::new(1, 2, |t| DMatrix::from_row_slice(1, 2, &[t.cos(), 1.0]));
        let a = MatrixFn::constant(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        let sys = LtvSystem::unforced(a, c).unwrap();
        let grid = [0.0, 0.5, 1.0, 1.5];
        let seq = scan_with(&sys, sys.c(), &grid, 1.0, 41, 1).unwrap();
        let par = scan_with(&sys, sys.c(), &grid, 1.0, 41, 3).unwrap();
        for (a, b) in seq.iter().zip(&par) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.min_eigenvalue, b.min_eigenvalue);
        }
    }

    #[test]
    fn clamps_tiny_negative_eigenvalues() {
        let m = DMatrix::from_row_slice(2, 2, &[-1e-10, 0.0, 0.0, 1.0]);
        let r = GramianReport::from_matrix(0.0, 1.0, m, 3).unwrap();
        assert_eq!(r.eigenvalues[0], 0.0);
        assert_eq!(r.raw_eigenvalues[0], -1e-10);
    }
}
