use nalgebra::DMatrix;
use serde::Serialize;

use super::Scenario;
use crate::error::{Error, Result};
use crate::linalg::{simpson_weight, symmetrize, SymmetricSpectrum};
use crate::ltv::{ser_matrix, MU_TOL};
use crate::observability::nodes_for_window;

#[derive(Debug, Clone, Serialize)]
pub struct PeWindow {
    pub t: f64,
    /// `Z Dᵀ D Zᵀ + (1/δ)∫_t^{t+δ} u̇ u̇ᵀ ds`.
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: DMatrix<f64>,
    pub min_eig: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeReport {
    pub delta: f64,
    pub windows: Vec<PeWindow>,
    /// Smallest per-window eigenvalue.
    pub mu: f64,
    pub pass: bool,
}

/// `(1/δ)∫_t^{t+δ} u̇(s) u̇ᵀ(s) ds`.
pub fn acceleration_gram(sc: &Scenario, t: f64, delta: f64, nodes: usize) -> DMatrix<f64> {
    let n = sc.dim();
    let h = delta / (nodes - 1) as f64;
    let mut acc = DMatrix::zeros(n, n);
    for i in 0..nodes {
        let du = sc.acceleration(t + i as f64 * h);
        acc += &du * du.transpose() * simpson_weight(i, nodes, h);
    }
    acc / delta
}

/// Persistent-excitation check over window starts `t_grid` with the
/// scenario's window length.
pub fn pe_check(sc: &Scenario, t_grid: &[f64]) -> Result<PeReport> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty window grid".into()));
    }
    let delta = sc.delta;
    let nodes = nodes_for_window(delta);
    let geometry = sc.beacons.geometry_gram();
    let windows = t_grid
        .iter()
        .map(|&t| {
            let matrix = symmetrize(&(&geometry + acceleration_gram(sc, t, delta, nodes)));
            let min_eig = SymmetricSpectrum::new(&matrix)?.min();
            Ok(PeWindow { t, matrix, min_eig })
        })
        .collect::<Result<Vec<_>>>()?;
    let mu = windows.iter().map(|w| w.min_eig).fold(f64::INFINITY, f64::min);
    Ok(PeReport {
        delta,
        windows,
        mu,
        pass: mu >= MU_TOL,
    })
}

/// `count` window starts evenly spread over `[0, horizon)`.
pub fn default_grid(sc: &Scenario, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| sc.horizon * k as f64 / count as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::range::{ScenarioFile, Trajectory};
    use std::f64::consts::TAU;

    fn scenario(beacons: Vec<Vec<f64>>, traj: Trajectory, delta: f64) -> Scenario {
        Scenario::try_from(ScenarioFile {
            dim: 2,
            beacons,
            alpha: None,
            trajectory: traj,
            bias: Some(vec![0.0, 0.0]),
            x0: vec![0.0, 0.0],
            horizon: 20.0,
            dt: 0.01,
            delta,
        })
        .unwrap()
    }

    #[test]
    fn single_beacon_circular() {
        let sc = scenario(vec![vec![2.0, 1.0]], Trajectory::circular_unit(), TAU);
        let r = pe_check(&sc, &[0.0, 1.0, 2.5]).unwrap();
        for w in &r.windows {
            assert!((&w.matrix - DMatrix::identity(2, 2) * 0.5).amax() < 1e-9);
        }
        assert!((r.mu - 0.5).abs() < 1e-9);
        assert!(r.pass);
    }

    #[test]
    fn three_still_beacons() {
        let sc = scenario(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            Trajectory::Constant { velocity: vec![0.0, 0.0] },
            1.0,
        );
        let r = pe_check(&sc, &[0.0]).unwrap();
        // Z Dᵀ D Zᵀ = [[2/3, -1/3], [-1/3, 2/3]] for these beacons and uniform weights.
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]) / 3.0;
        assert!((&r.windows[0].matrix - expected).amax() < 1e-12);
        assert!((r.mu - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_pair_fails() {
        let sc = scenario(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            Trajectory::Constant { velocity: vec![0.5, 0.0] },
            1.0,
        );
        let r = pe_check(&sc, &[0.0, 5.0]).unwrap();
        assert!(r.mu <= 1e-10);
        assert!(!r.pass);
    }

    #[test]
    fn empty_grid() {
        let sc = scenario(vec![vec![0.0, 0.0]], Trajectory::circular_unit(), 1.0);
        assert!(pe_check(&sc, &[]).is_err());
    }
}
