//! Sufficient conditions C1 (determinant energy) and C2 (constant real-spectrum
//! `A` plus a positive output-energy integral) for uniform observability.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{check_simpson_nodes, general_eigenvalues, max_abs, simpson_weight};
use crate::ltv::{GramianReport, LtvSystem, MatrixFn, MU_TOL};

/// Samples used to decide whether `A` is constant.
pub const CONSTANCY_SAMPLES: usize = 32;
pub const CONSTANCY_TOL: f64 = 1e-10;
/// Largest `|Im λ|` still treated as a real eigenvalue.
pub const REAL_SPECTRUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionId {
    C1,
    C2,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConditionDiagnostics {
    /// Eigenvalues of `A(t)` as `[re, im]` pairs (C2 only).
    pub a_eigenvalues: Vec<[f64; 2]>,
    pub real_spectrum: Option<bool>,
    pub a_constant: Option<bool>,
    /// Whether the integral clause alone clears `MU_TOL`.
    pub integral_clause_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub t: f64,
    pub delta: f64,
    /// For C1 the averaged `|det(MᵀM)|`; for C2 the smallest eigenvalue of the
    /// averaged `MᵀM`.
    pub attained: f64,
    pub pass: bool,
    pub diagnostics: ConditionDiagnostics,
}

fn check_window(delta: f64, nodes: usize) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "window length must be > 0, got {delta}"
        )));
    }
    check_simpson_nodes(nodes)
}

/// `(1/δ)∫_t^{t+δ} Mᵀ(s)M(s) ds` (no dynamics) with its spectrum.
pub fn output_energy(m: &MatrixFn, t: f64, delta: f64, nodes: usize) -> Result<GramianReport> {
    check_window(delta, nodes)?;
    let n = m.cols();
    let h = delta / (nodes - 1) as f64;
    let mut acc = DMatrix::zeros(n, n);
    for i in 0..nodes {
        let mi = m.eval(t + i as f64 * h)?;
        acc += mi.transpose() * &mi * simpson_weight(i, nodes, h);
    }
    GramianReport::from_matrix(t, delta, acc / delta, nodes)
}

/// C1: `(1/δ)∫|det(MᵀM)| ds >= μ`.
pub fn check_c1(m: &MatrixFn, t: f64, delta: f64, nodes: usize) -> Result<ConditionReport> {
    check_window(delta, nodes)?;
    let h = delta / (nodes - 1) as f64;
    let mut acc = 0.0;
    for i in 0..nodes {
        let mi = m.eval(t + i as f64 * h)?;
        let gram = mi.transpose() * &mi;
        acc += gram.determinant().abs() * simpson_weight(i, nodes, h);
    }
    let attained = acc / delta;
    let pass = attained >= MU_TOL;
    Ok(ConditionReport {
        condition: ConditionId::C1,
        t,
        delta,
        attained,
        pass,
        diagnostics: ConditionDiagnostics {
            integral_clause_pass: pass,
            ..Default::default()
        },
    })
}

/// C2: `A` constant with real spectrum, and `(1/δ̄)∫MᵀM ds >= μ I`.
pub fn check_c2(
    sys: &LtvSystem,
    m: &MatrixFn,
    t: f64,
    delta_bar: f64,
    nodes: usize,
) -> Result<ConditionReport> {
    check_window(delta_bar, nodes)?;
    if m.cols() != sys.state_dim() {
        return Err(Error::Dimension {
            context: "C2 output map".into(),
            expected: (m.rows(), sys.state_dim()),
            found: m.dims(),
        });
    }
    let a0 = sys.a().eval(t)?;
    let mut drift = 0.0_f64;
    for k in 0..CONSTANCY_SAMPLES {
        let tau = t + delta_bar * k as f64 / (CONSTANCY_SAMPLES - 1) as f64;
        drift = drift.max(max_abs(&(sys.a().eval(tau)? - &a0)));
    }
    let a_constant = drift <= CONSTANCY_TOL;

    let eigs = general_eigenvalues(&a0)?;
    let real_spectrum = eigs.iter().all(|e| e.im.abs() <= REAL_SPECTRUM_TOL);

    let energy = output_energy(m, t, delta_bar, nodes)?;
    let attained = energy.min_eigenvalue();
    let integral_clause_pass = attained >= MU_TOL;

    Ok(ConditionReport {
        condition: ConditionId::C2,
        t,
        delta: delta_bar,
        attained,
        pass: a_constant && real_spectrum && integral_clause_pass,
        diagnostics: ConditionDiagnostics {
            a_eigenvalues: eigs.iter().map(|e| [e.re, e.im]).collect(),
            real_spectrum: Some(real_spectrum),
            a_constant: Some(a_constant),
            integral_clause_pass,
        },
    })
}
