use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on `Σ α_i = 1`.
pub const ALPHA_SUM_TOL: f64 = 1e-12;

/// Fixed source points `z_i` and weights `α` with the derived matrices
/// `Z = [z_1 … z_l]` and `D(α) = ξαᵀ - I`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeaconConfig {
    dim: usize,
    z: DMatrix<f64>,
    alpha: DVector<f64>,
    d: DMatrix<f64>,
}

impl BeaconConfig {
    /// `alpha = None` selects uniform weights `1/l`.
    pub fn new(dim: usize, beacons: &[Vec<f64>], alpha: Option<&[f64]>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Config(format!("spatial dimension must be 2 or 3, got {dim}")));
        }
        let l = beacons.len();
        if l == 0 {
            return Err(Error::Config("at least one beacon is required".into()));
        }
        if let Some((i, b)) = beacons.iter().enumerate().find(|(_, b)| b.len() != dim) {
            return Err(Error::Config(format!(
                "beacon {i} has {} coordinates, expected {dim}",
                b.len()
            )));
        }
        if beacons.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite beacon coordinate".into()));
        }
        let alpha = match alpha {
            Some(a) => {
                if a.len() != l {
                    return Err(Error::Config(format!(
                        "alpha has {} weights for {l} beacons",
                        a.len()
                    )));
                }
                DVector::from_column_slice(a)
            }
            None => DVector::from_element(l, 1.0 / l as f64),
        };
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(Error::Config(format!("alpha must sum to 1, sums to {sum}")));
        }
        let z = DMatrix::from_fn(dim, l, |i, j| beacons[j][i]);
        let xi = DVector::from_element(l, 1.0);
        let d = &xi * alpha.transpose() - DMatrix::identity(l, l);
        Ok(Self { dim, z, alpha, d })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.z.ncols()
    }

    /// `Z`, one beacon per column (`n×l`).
    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn beacon(&self, i: usize) -> DVector<f64> {
        self.z.column(i).into_owned()
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// `D(α) = ξαᵀ - I` (`l×l`).
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn xi(&self) -> DVector<f64> {
        DVector::from_element(self.count(), 1.0)
    }

    /// `Σ α_i z_i`.
    pub fn weighted_centroid(&self) -> DVector<f64> {
        &self.z * &self.alpha
    }

    /// `D(α)Zᵀ` (`l×n`).
    pub fn dzt(&self) -> DMatrix<f64> {
        &self.d * self.z.transpose()
    }

    /// `Z D(α)ᵀ D(α) Zᵀ` (`n×n`), the geometric part of the excitation matrix.
    pub fn geometry_gram(&self) -> DMatrix<f64> {
        let dzt = self.dzt();
        dzt.transpose() * dzt
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.count())
            .map(|j| self.z.column(j).iter().copied().collect())
            .collect()
    }
}
