use nalgebra::DMatrix;
use serde::Serialize;

use super::MatrixFn;
use crate::error::{Error, Result};
use crate::linalg::{is_finite, to_rows};

/// Default fixed integration step (seconds).
pub const DEFAULT_DT: f64 = 1e-3;

/// `Ẋ = A(t)X + B(t)U`, `Y = C(t)X`.
#[derive(Debug, Clone)]
pub struct LtvSystem {
    a: MatrixFn,
    b: MatrixFn,
    c: MatrixFn,
}

impl LtvSystem {
    pub fn new(a: MatrixFn, b: MatrixFn, c: MatrixFn) -> Result<Self> {
        let (ar, ac) = a.dims();
        if ar != ac {
            return Err(Error::Dimension {
                context: "state matrix A must be square".into(),
                expected: (ar, ar),
                found: (ar, ac),
            });
        }
        if b.rows() != ar {
            return Err(Error::Dimension {
                context: "input matrix B".into(),
                expected: (ar, b.cols()),
                found: b.dims(),
            });
        }
        if c.cols() != ar {
            return Err(Error::Dimension {
                context: "output matrix C".into(),
                expected: (c.rows(), ar),
                found: c.dims(),
            });
        }
        Ok(Self { a, b, c })
    }

    /// System without inputs (`B` is an `n×0` matrix).
    pub fn unforced(a: MatrixFn, c: MatrixFn) -> Result<Self> {
        let n = a.rows();
        Self::new(a, MatrixFn::zeros(n, 0), c)
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }

    pub fn a(&self) -> &MatrixFn {
        &self.a
    }

    pub fn b(&self) -> &MatrixFn {
        &self.b
    }

    pub fn c(&self) -> &MatrixFn {
        &self.c
    }

    /// Same dynamics, different output map.
    pub fn with_output(&self, c: MatrixFn) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), c)
    }
}

/// `Φ(t + s, t)` together with its anchor and offset.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionMatrix {
    pub t: f64,
    pub s: f64,
    #[serde(serialize_with = "ser_matrix")]
    pub phi: DMatrix<f64>,
}

pub(crate) fn ser_matrix<S: serde::Serializer>(
    m: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&to_rows(m), s)
}

fn rk4_phi_step(a: &MatrixFn, tau: f64, phi: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>> {
    let a0 = a.eval(tau)?;
    let am = a.eval(tau + 0.5 * h)?;
    let a1 = a.eval(tau + h)?;
    let k1 = &a0 * phi;
    let k2 = &am * (phi + &k1 * (0.5 * h));
    let k3 = &am * (phi + &k2 * (0.5 * h));
    let k4 = &a1 * (phi + &k3 * h);
    let next = phi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    if !is_finite(&next) {
        return Err(Error::IntegrationDiverged { time: tau + h });
    }
    Ok(next)
}

fn map_eval_err(e: Error) -> Error {
    match e {
        Error::Evaluation { time, .. } => Error::IntegrationDiverged { time },
        other => other,
    }
}

/// `Φ(t + s, t)` by classical RK4 with step `dt`; the final step is
/// shortened to land exactly on `t + s`.
pub fn transition_matrix(sys: &LtvSystem, t: f64, s: f64, dt: f64) -> Result<TransitionMatrix> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("offset s must be >= 0, got {s}")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step dt must be > 0, got {dt}")));
    }
    let n = sys.state_dim();
    let mut phi = DMatrix::identity(n, n);
    let full = (s / dt).floor() as usize;
    let mut tau = t;
    for k in 0..full {
        phi = rk4_phi_step(sys.a(), tau, &phi, dt).map_err(map_eval_err)?;
        tau = t + (k + 1) as f64 * dt;
    }
    let rest = t + s - tau;
    if rest > 1e-15 * s.max(1.0) {
        phi = rk4_phi_step(sys.a(), tau, &phi, rest).map_err(map_eval_err)?;
    }
    Ok(TransitionMatrix { t, s, phi })
}

/// `Φ(t + offset_i, t)` at sorted, non-negative offsets, from a single
/// forward pass. Each gap between consecutive offsets is split into equal
/// RK4 sub-steps no longer than `dt`.
pub fn transition_at_offsets(
    sys: &LtvSystem,
    t: f64,
    offsets: &[f64],
    dt: f64,
) -> Result<Vec<DMatrix<f64>>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step dt must be > 0, got {dt}")));
    }
    let n = sys.state_dim();
    let mut out = Vec::with_capacity(offsets.len());
    let mut phi = DMatrix::identity(n, n);
    let mut prev = 0.0;
    for &off in offsets {
        if !(off >= prev) {
            return Err(Error::InvalidArgument(
                "offsets must be sorted and non-negative".into(),
            ));
        }
        let gap = off - prev;
        if gap > 0.0 {
            let steps = (gap / dt).ceil().max(1.0) as usize;
            let h = gap / steps as f64;
            for k in 0..steps {
                let tau = t + prev + k as f64 * h;
                phi = rk4_phi_step(sys.a(), tau, &phi, h).map_err(map_eval_err)?;
            }
        }
        out.push(phi.clone());
        prev = off;
    }
    Ok(out)
}
