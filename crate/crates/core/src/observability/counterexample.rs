//! A rotation `A` paired with a time-varying rank-one projector `C(t)`: the
//! averaged `CᵀC` is positive definite on every window of length `δ >= π`,
//! yet the state `(1, 0)` at `t = 0` produces an identically zero output.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::conditions::output_energy;
use crate::error::{Error, Result};
use crate::linalg::simpson_nodes_for;
use crate::ltv::{gramian, LtvSystem, MatrixFn, DEFAULT_NODES};

/// `A = [[0, 1], [-1, 0]]`.
pub fn rotation_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// `C(t) = I - y(t)y(t)ᵀ` with `y(t) = (cos t, -sin t)`.
pub fn projector(t: f64) -> DMatrix<f64> {
    let (s, c) = t.sin_cos();
    let s2 = (2.0 * t).sin();
    DMatrix::from_row_slice(2, 2, &[s * s, 0.5 * s2, 0.5 * s2, c * c])
}

/// The direction annihilated by `C(t)`.
pub fn null_direction(t: f64) -> DVector<f64> {
    DVector::from_row_slice(&[t.cos(), -t.sin()])
}

/// The initial state whose output vanishes identically.
pub fn witness() -> DVector<f64> {
    DVector::from_row_slice(&[1.0, 0.0])
}

/// Counterexample system with analytic first and second derivatives of `C`.
pub fn build_counterexample() -> LtvSystem {
    let c = MatrixFn::new(2, 2, projector)
        .with_derivative(|t| {
            let (s2, c2) = (2.0 * t).sin_cos();
            DMatrix::from_row_slice(2, 2, &[s2, c2, c2, -s2])
        })
        .with_derivative(|t| {
            let (s2, c2) = (2.0 * t).sin_cos();
            DMatrix::from_row_slice(2, 2, &[2.0 * c2, -2.0 * s2, -2.0 * s2, -2.0 * c2])
        });
    LtvSystem::unforced(MatrixFn::constant(rotation_matrix()), c)
        .expect("counterexample dimensions are consistent")
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleEntry {
    pub delta: f64,
    pub gramian_min_eig: f64,
    pub m_integral_min_eig: f64,
    pub witness: [f64; 2],
}

/// Simpson nodes used per window: at least the default and no coarser than 0.01 s.
pub fn nodes_for_window(delta: f64) -> usize {
    DEFAULT_NODES.max(simpson_nodes_for(delta, 0.01))
}

/// For each `δ`: smallest eigenvalue of `W(0, δ)`, smallest eigenvalue of
/// `(1/δ)∫_0^δ CᵀC ds`, and the Gramian's weakest direction.
pub fn counterexample_report(deltas: &[f64]) -> Result<Vec<CounterexampleEntry>> {
    if let Some(bad) = deltas.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
        return Err(Error::InvalidArgument(format!("window length must be > 0, got {bad}")));
    }
    let sys = build_counterexample();
    deltas
        .iter()
        .map(|&delta| {
            let nodes = nodes_for_window(delta);
            let w = gramian(&sys, 0.0, delta, nodes)?;
            let energy = output_energy(sys.c(), 0.0, delta, nodes)?;
            Ok(CounterexampleEntry {
                delta,
                gramian_min_eig: w.min_eigenvalue(),
                m_integral_min_eig: energy.min_eigenvalue(),
                witness: [w.weakest_direction[0], w.weakest_direction[1]],
            })
        })
        .collect()
}

/// Closed form of the smallest eigenvalue of `(1/δ)∫_0^δ C ds`:
/// `1/2 - |sin δ| / (2δ)`.
pub fn analytic_m_integral_min_eig(delta: f64) -> f64 {
    0.5 - delta.sin().abs() / (2.0 * delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltv::transition_matrix;

    #[test]
    fn projector_at_zero() {
        assert_eq!(projector(0.0), DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn projector_annihilates_null_direction() {
        for i in 0..50 {
            let t = -7.0 + 0.291 * i as f64;
            let v = projector(t) * null_direction(t);
            assert!(v.amax() < 1e-12);
        }
    }

    #[test]
    fn witness_follows_null_direction() {
        let sys = build_counterexample();
        for i in 0..50 {
            let s = 0.2 * i as f64;
            let phi = transition_matrix(&sys, 0.0, s, 1e-3).unwrap().phi;
            assert!((phi * witness() - null_direction(s)).amax() < 1e-6);
        }
    }

    #[test]
    fn analytic_energy_values() {
        assert!((analytic_m_integral_min_eig(std::f64::consts::TAU) - 0.5).abs() < 1e-15);
        assert!(analytic_m_integral_min_eig(1.0) < 0.1);
    }

    #[test]
    fn rejects_non_positive_delta() {
        assert!(counterexample_report(&[1.0, -1.0]).is_err());
    }
}
