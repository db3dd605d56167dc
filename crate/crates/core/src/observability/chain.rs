use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ltv::{DerivativeSource, Evaluator, LtvSystem, MatrixFn};

/// The chain `N_0 = C`, `N_{k+1} = N_k A + Ṅ_k` for `k = 0..K`.
#[derive(Debug, Clone)]
pub struct NkChain {
    order: usize,
    levels: Vec<MatrixFn>,
    provenance: Vec<DerivativeSource>,
}

/// A row of a chain level, addressed as `(level, row)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainRow {
    pub level: usize,
    pub row: usize,
}

impl ChainRow {
    pub fn new(level: usize, row: usize) -> Self {
        Self { level, row }
    }
}

#[derive(Clone)]
struct ChainSource {
    a: MatrixFn,
    c: MatrixFn,
    allow_fd: bool,
}

impl ChainSource {
    /// `[N_level, Ṅ_level, ..., N_level^{(order)}]` at `t`, built with the
    /// Leibniz rule `N_{k+1}^{(j)} = Σ_i binom(j,i) N_k^{(i)} A^{(j-i)} + N_k^{(j+1)}`.
    fn derivatives(&self, t: f64, level: usize, order: usize) -> Result<Vec<DMatrix<f64>>> {
        if level == 0 {
            return (0..=order)
                .map(|j| self.c.derivative(j, t, self.allow_fd).map(|(m, _)| m))
                .collect();
        }
        let prev = self.derivatives(t, level - 1, order + 1)?;
        let a: Vec<DMatrix<f64>> = (0..=order)
            .map(|j| self.a.derivative(j, t, self.allow_fd).map(|(m, _)| m))
            .collect::<Result<_>>()?;
        Ok((0..=order)
            .map(|j| {
                let mut acc = prev[j + 1].clone();
                for i in 0..=j {
                    acc += &prev[i] * &a[j - i] * binomial(j, i);
                }
                acc
            })
            .collect())
    }

    fn evaluator(&self, level: usize, derivative: usize) -> Evaluator {
        let src = self.clone();
        let (rows, cols) = src.c.dims();
        Arc::new(move |t| match src.derivatives(t, level, derivative) {
            Ok(mut v) => v.swap_remove(derivative),
            Err(_) => DMatrix::from_element(rows, cols, f64::NAN),
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Build `N_0..N_K` for `sys`.
///
/// Level `k` needs derivatives of `C` up to order `k` and of `A` up to
/// order `k - 1`. Missing analytic derivatives fall back to central
/// differences when `allow_fd` is set, and the level is flagged accordingly.
pub fn build_chain(sys: &LtvSystem, order: usize, allow_fd: bool) -> Result<NkChain> {
    let a = sys.a().clone();
    let c = sys.c().clone();
    if !allow_fd {
        if c.smoothness() < order {
            return Err(Error::Smoothness {
                what: "output matrix C".into(),
                required: order,
                available: c.smoothness(),
            });
        }
        if order > 0 && a.smoothness() < order - 1 {
            return Err(Error::Smoothness {
                what: "state matrix A".into(),
                required: order - 1,
                available: a.smoothness(),
            });
        }
    }
    let provenance = (0..=order)
        .map(|k| {
            let c_ok = c.smoothness() >= k;
            let a_ok = k == 0 || a.smoothness() >= k - 1;
            if c_ok && a_ok {
                DerivativeSource::Analytic
            } else {
                DerivativeSource::FiniteDifference
            }
        })
        .collect();

    let src = ChainSource { a, c, allow_fd };
    let (rows, cols) = src.c.dims();
    let levels = (0..=order)
        .map(|k| {
            let value = src.evaluator(k, 0);
            let ders = (1..=order - k).map(|d| src.evaluator(k, d)).collect();
            MatrixFn::new(rows, cols, move |t| value(t)).with_derivative_evaluators(ders)
        })
        .collect();
    Ok(NkChain {
        order,
        levels,
        provenance,
    })
}

impl NkChain {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn levels(&self) -> &[MatrixFn] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Option<&MatrixFn> {
        self.levels.get(k)
    }

    pub fn provenance(&self) -> &[DerivativeSource] {
        &self.provenance
    }

    /// Stack the selected rows into an `M` of 𝓜_K, in selection order.
    pub fn stack(&self, selection: &[ChainRow]) -> Result<MatrixFn> {
        let parts = selection
            .iter()
            .map(|r| {
                self.levels
                    .get(r.level)
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "chain level {} beyond order {}",
                            r.level, self.order
                        ))
                    })?
                    .select_rows(&[r.row])
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixFn::vstack(&parts)
    }

    /// Stack whole levels.
    pub fn stack_levels(&self, levels: &[usize]) -> Result<MatrixFn> {
        let rows = self.levels.first().map_or(0, MatrixFn::rows);
        let selection: Vec<ChainRow> = levels
            .iter()
            .flat_map(|&k| (0..rows).map(move |r| ChainRow::new(k, r)))
            .collect();
        self.stack(&selection)
    }

    /// Every row of every level.
    pub fn stack_all(&self) -> Result<MatrixFn> {
        self.stack_levels(&(0..=self.order).collect::<Vec<_>>())
    }
}
