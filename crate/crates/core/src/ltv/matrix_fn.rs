use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{central_difference, is_finite};

/// Step of the finite-difference derivative fallback.
pub const FD_STEP: f64 = 1e-4;

pub type Evaluator = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Where a derivative value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

impl DerivativeSource {
    pub fn combine(self, other: Self) -> Self {
        match (self, other) {
            (Self::Analytic, Self::Analytic) => Self::Analytic,
            _ => Self::FiniteDifference,
        }
    }
}

/// A matrix-valued function of time with optional analytic derivatives.
///
/// `derivatives[k - 1]` evaluates the k-th time derivative. Constant
/// functions report a zero derivative of every order.
#[derive(Clone)]
pub struct MatrixFn {
    rows: usize,
    cols: usize,
    value: Evaluator,
    derivatives: Vec<Evaluator>,
    constant: bool,
}

impl fmt::Debug for MatrixFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixFn")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("derivatives", &self.derivatives.len())
            .field("constant", &self.constant)
            .finish()
    }
}

impl MatrixFn {
    pub fn new<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            rows,
            cols,
            value: Arc::new(f),
            derivatives: Vec::new(),
            constant: false,
        }
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        Self {
            rows,
            cols,
            value: Arc::new(move |_| m.clone()),
            derivatives: Vec::new(),
            constant: true,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(DMatrix::identity(n, n))
    }

    /// Append the next-order analytic derivative.
    pub fn with_derivative<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.derivatives.push(Arc::new(f));
        self
    }

    pub(crate) fn with_derivative_evaluators(mut self, ders: Vec<Evaluator>) -> Self {
        self.derivatives = ders;
        self
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// Highest derivative order available analytically (`usize::MAX` for constants).
    pub fn smoothness(&self) -> usize {
        if self.constant {
            usize::MAX
        } else {
            self.derivatives.len()
        }
    }

    /// Evaluate and check the declared shape and finiteness.
    pub fn eval(&self, t: f64) -> Result<DMatrix<f64>> {
        let m = (self.value)(t);
        self.check(m, t)
    }

    fn check(&self, m: DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
        if m.shape() != (self.rows, self.cols) {
            return Err(Error::Dimension {
                context: format!("matrix function evaluated at t = {t}"),
                expected: (self.rows, self.cols),
                found: m.shape(),
            });
        }
        if !is_finite(&m) {
            return Err(Error::Evaluation {
                time: t,
                reason: "non-finite matrix entry".into(),
            });
        }
        Ok(m)
    }

    /// Analytic derivative of order `k` if one is declared.
    pub fn analytic_derivative(&self, k: usize, t: f64) -> Option<Result<DMatrix<f64>>> {
        if k == 0 {
            return Some(self.eval(t));
        }
        if self.constant {
            return Some(Ok(DMatrix::zeros(self.rows, self.cols)));
        }
        self.derivatives
            .get(k - 1)
            .map(|f| self.check(f(t), t))
    }

    /// Derivative of order `k`, falling back to fourth-order central
    /// differences of the highest lower-order analytic derivative when
    /// `allow_fd` is set.
    pub fn derivative(
        &self,
        k: usize,
        t: f64,
        allow_fd: bool,
    ) -> Result<(DMatrix<f64>, DerivativeSource)> {
        if let Some(m) = self.analytic_derivative(k, t) {
            return Ok((m?, DerivativeSource::Analytic));
        }
        if !allow_fd {
            return Err(Error::Smoothness {
                what: format!("{}x{} matrix function", self.rows, self.cols),
                required: k,
                available: self.smoothness(),
            });
        }
        let base = self.smoothness().min(k - 1);
        let m = self.fd_derivative(base, k - base, t);
        Ok((self.check(m, t)?, DerivativeSource::FiniteDifference))
    }

    fn fd_derivative(&self, base: usize, extra: usize, t: f64) -> DMatrix<f64> {
        if extra == 0 {
            return match base {
                0 => (self.value)(t),
                k => (self.derivatives[k - 1])(t),
            };
        }
        central_difference(|tau| self.fd_derivative(base, extra - 1, tau), t, FD_STEP)
    }

    /// Vertically stack functions sharing a column count. Derivatives are
    /// kept up to the smallest order all parts provide.
    pub fn vstack(parts: &[MatrixFn]) -> Result<MatrixFn> {
        let cols = parts
            .first()
            .map(|p| p.cols)
            .ok_or_else(|| Error::InvalidArgument("vstack of zero matrix functions".into()))?;
        if let Some(bad) = parts.iter().find(|p| p.cols != cols) {
            return Err(Error::Dimension {
                context: "vertical stack".into(),
                expected: (bad.rows, cols),
                found: bad.dims(),
            });
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        let constant = parts.iter().all(|p| p.constant);
        let order = parts
            .iter()
            .filter(|p| !p.constant)
            .map(|p| p.derivatives.len())
            .min()
            .unwrap_or(0);

        let stack_at = |parts: Vec<MatrixFn>, k: usize| -> Evaluator {
            Arc::new(move |t| {
                let blocks: Vec<DMatrix<f64>> = parts
                    .iter()
                    .map(|p| match p.analytic_derivative(k, t) {
                        Some(Ok(m)) => m,
                        _ => DMatrix::from_element(p.rows, p.cols, f64::NAN),
                    })
                    .collect();
                stack_blocks(rows, cols, &blocks)
            })
        };

        let owned: Vec<MatrixFn> = parts.to_vec();
        let value = stack_at(owned.clone(), 0);
        let derivatives = (1..=order).map(|k| stack_at(owned.clone(), k)).collect();
        Ok(MatrixFn {
            rows,
            cols,
            value,
            derivatives,
            constant,
        })
    }

    /// Select a subset of rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Result<MatrixFn> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(Error::InvalidArgument(format!(
                "row {r} out of range for a {}-row matrix function",
                self.rows
            )));
        }
        let pick = |f: Evaluator, idx: Vec<usize>| -> Evaluator {
            Arc::new(move |t| f(t).select_rows(idx.iter()))
        };
        Ok(MatrixFn {
            rows: rows.len(),
            cols: self.cols,
            value: pick(self.value.clone(), rows.to_vec()),
            derivatives: self
                .derivatives
                .iter()
                .map(|d| pick(d.clone(), rows.to_vec()))
                .collect(),
            constant: self.constant,
        })
    }

    /// Pointwise scalar multiple.
    pub fn scaled(&self, c: f64) -> MatrixFn {
        let scale = |f: Evaluator| -> Evaluator { Arc::new(move |t| f(t) * c) };
        MatrixFn {
            rows: self.rows,
            cols: self.cols,
            value: scale(self.value.clone()),
            derivatives: self.derivatives.iter().cloned().map(scale).collect(),
            constant: self.constant,
        }
    }
}

fn stack_blocks(rows: usize, cols: usize, blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        out.view_mut((r0, 0), b.shape()).copy_from(b);
        r0 += b.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trig() -> MatrixFn {
        MatrixFn::new(1, 2, |t| DMatrix::from_row_slice(1, 2, &[t.sin(), t.cos()]))
            .with_derivative(|t| DMatrix::from_row_slice(1, 2, &[t.cos(), -t.sin()]))
    }

    #[test]
    fn dims_checked_on_eval() {
        let f = MatrixFn::new(2, 2, |_| DMatrix::zeros(3, 2));
        assert!(matches!(f.eval(0.0), Err(Error::Dimension { .. })));
    }

    #[test]
    fn non_finite_is_an_evaluation_error() {
        let f = MatrixFn::new(1, 1, |_| DMatrix::from_element(1, 1, f64::NAN));
        assert!(matches!(f.eval(0.5), Err(Error::Evaluation { .. })));
    }

    #[test]
    fn analytic_derivative_matches_central_difference() {
        let f = trig();
        for i in 0..20 {
            let t = -3.0 + 0.31 * i as f64;
            let (d, src) = f.derivative(1, t, false).unwrap();
            assert_eq!(src, DerivativeSource::Analytic);
            let fd = central_difference(|s| f.eval(s).unwrap(), t, FD_STEP);
            assert!((d - fd).amax() < 1e-5);
        }
    }

    #[test]
    fn fallback_is_flagged_and_accurate() {
        let f = trig();
        assert!(matches!(
            f.derivative(2, 0.3, false),
            Err(Error::Smoothness { required: 2, .. })
        ));
        let (d, src) = f.derivative(2, 0.3, true).unwrap();
        assert_eq!(src, DerivativeSource::FiniteDifference);
        assert!((d[(0, 0)] + 0.3_f64.sin()).abs() < 1e-8);
        assert!((d[(0, 1)] + 0.3_f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let f = MatrixFn::identity(2);
        let (d, src) = f.derivative(5, 1.0, false).unwrap();
        assert_eq!(src, DerivativeSource::Analytic);
        assert_eq!(d, DMatrix::zeros(2, 2));
    }

    #[test]
    fn stack_and_select() {
        let s = MatrixFn::vstack(&[trig(), MatrixFn::constant(DMatrix::from_row_slice(1, 2, &[1.0, 2.0]))])
            .unwrap();
        assert_eq!(s.dims(), (2, 2));
        let v = s.eval(0.0).unwrap();
        assert_eq!(v, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 2.0]));
        let d = s.analytic_derivative(1, 0.0).unwrap().unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let r = s.select_rows(&[1]).unwrap();
        assert_eq!(r.eval(3.0).unwrap(), DMatrix::from_row_slice(1, 2, &[1.0, 2.0]));
        assert!(s.select_rows(&[2]).is_err());
        assert!(MatrixFn::vstack(&[trig(), MatrixFn::identity(3)]).is_err());
    }
}
