use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measured-velocity profiles `u(t)` with analytic derivative `u̇(t)`.
///
/// Planar profiles (circular, figure-eight) act on the first two axes and
/// leave a third axis at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Trajectory {
    Constant {
        velocity: Vec<f64>,
    },
    /// `u = r (sin(ωt + φ), cos(ωt + φ))`.
    Circular {
        radius: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `u = A (cos ωt, cos 2ωt)`, whose primitive traces a figure eight.
    FigureEight { amplitude: f64, omega: f64 },
    /// `u_i(t) = Σ_k coefficients[i][k] t^k`.
    Polynomial { coefficients: Vec<Vec<f64>> },
}

impl Trajectory {
    pub fn circular_unit() -> Self {
        Self::Circular {
            radius: 1.0,
            omega: 1.0,
            phase: 0.0,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::Constant { velocity } if velocity.len() != dim => Err(Error::Config(format!(
                "constant velocity has {} components, expected {dim}",
                velocity.len()
            ))),
            Self::Polynomial { coefficients } if coefficients.len() != dim => {
                Err(Error::Config(format!(
                    "polynomial trajectory has {} components, expected {dim}",
                    coefficients.len()
                )))
            }
            Self::Circular { radius, omega, phase }
                if !(radius.is_finite() && omega.is_finite() && phase.is_finite()) =>
            {
                Err(Error::Config("non-finite circular trajectory parameter".into()))
            }
            Self::FigureEight { amplitude, omega } if !(amplitude.is_finite() && omega.is_finite()) => {
                Err(Error::Config("non-finite figure-eight parameter".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn velocity(&self, t: f64, dim: usize) -> DVector<f64> {
        let mut u = DVector::zeros(dim);
        match self {
            Self::Constant { velocity } => u.copy_from_slice(velocity),
            Self::Circular { radius, omega, phase } => {
                let (s, c) = (omega * t + phase).sin_cos();
                u[0] = radius * s;
                u[1] = radius * c;
            }
            Self::FigureEight { amplitude, omega } => {
                u[0] = amplitude * (omega * t).cos();
                u[1] = amplitude * (2.0 * omega * t).cos();
            }
            Self::Polynomial { coefficients } => {
                for (i, c) in coefficients.iter().enumerate() {
                    u[i] = c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck);
                }
            }
        }
        u
    }

    pub fn acceleration(&self, t: f64, dim: usize) -> DVector<f64> {
        let mut du = DVector::zeros(dim);
        match self {
            Self::Constant { .. } => {}
            Self::Circular { radius, omega, phase } => {
                let (s, c) = (omega * t + phase).sin_cos();
                du[0] = radius * omega * c;
                du[1] = -radius * omega * s;
            }
            Self::FigureEight { amplitude, omega } => {
                du[0] = -amplitude * omega * (omega * t).sin();
                du[1] = -2.0 * amplitude * omega * (2.0 * omega * t).sin();
            }
            Self::Polynomial { coefficients } => {
                for (i, c) in coefficients.iter().enumerate() {
                    du[i] = c
                        .iter()
                        .enumerate()
                        .skip(1)
                        .rev()
                        .fold(0.0, |acc, (k, &ck)| acc * t + k as f64 * ck);
                }
            }
        }
        du
    }
}
