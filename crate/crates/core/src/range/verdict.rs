use serde::Serialize;

use super::{build_lifted_system, build_m, pe_check, PeReport, Scenario};
use crate::error::Result;
use crate::ltv::{scan_with, MU_TOL};
use crate::observability::nodes_for_window;

/// Gramian floor expected on windows where excitation holds.
pub const UO_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct UoWindow {
    pub t: f64,
    pub pe_min_eig: f64,
    pub gramian_min_eig: f64,
    pub extended_min_eig: f64,
    /// Excitation fails on this window, or the Gramian clears `UO_FLOOR`.
    pub implication_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UoVerdict {
    pub pe: PeReport,
    pub windows: Vec<UoWindow>,
    pub gramian_min: f64,
    pub extended_min: f64,
    /// Every window's Gramian clears `MU_TOL`.
    pub observable_on_grid: bool,
    pub implication_holds: bool,
}

/// Excitation check alongside Gramian and extended-Gramian scans on the same
/// windows of length `δ`.
pub fn uo_verdict(sc: &Scenario, t_grid: &[f64], jobs: usize) -> Result<UoVerdict> {
    let pe = pe_check(sc, t_grid)?;
    let sys = build_lifted_system(sc);
    let m = build_m(sc);
    let nodes = nodes_for_window(sc.delta);
    let w = scan_with(&sys, sys.c(), t_grid, sc.delta, nodes, jobs)?;
    let wbar = scan_with(&sys, &m, t_grid, sc.delta, nodes, jobs)?;
    let windows: Vec<UoWindow> = pe
        .windows
        .iter()
        .zip(w.iter().zip(&wbar))
        .map(|(p, (g, e))| UoWindow {
            t: p.t,
            pe_min_eig: p.min_eig,
            gramian_min_eig: g.min_eigenvalue,
            extended_min_eig: e.min_eigenvalue,
            implication_holds: p.min_eig < MU_TOL || g.min_eigenvalue >= UO_FLOOR,
        })
        .collect();
    let gramian_min = windows.iter().map(|w| w.gramian_min_eig).fold(f64::INFINITY, f64::min);
    let extended_min = windows.iter().map(|w| w.extended_min_eig).fold(f64::INFINITY, f64::min);
    Ok(UoVerdict {
        observable_on_grid: gramian_min >= MU_TOL,
        implication_holds: windows.iter().all(|w| w.implication_holds),
        pe,
        windows,
        gramian_min,
        extended_min,
    })
}
