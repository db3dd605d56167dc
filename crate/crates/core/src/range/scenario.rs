use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{BeaconConfig, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::central_difference;

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dim: usize,
    pub beacons: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    pub trajectory: Trajectory,
    /// `null` drops the bias states (position-only variant).
    pub bias: Option<Vec<f64>>,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub delta: f64,
}

/// Beacons, measured-velocity profile, truth and timing for one experiment.
///
/// The observer receives `u(t)`; the body moves with `u(t) + a`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub beacons: BeaconConfig,
    pub trajectory: Trajectory,
    pub x0: DVector<f64>,
    pub bias: Option<DVector<f64>>,
    pub horizon: f64,
    pub dt: f64,
    pub delta: f64,
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(f: ScenarioFile) -> Result<Self> {
        let beacons = BeaconConfig::new(f.dim, &f.beacons, f.alpha.as_deref())?;
        if f.x0.len() != f.dim {
            return Err(Error::Config(format!(
                "x0 has {} components, expected {}",
                f.x0.len(),
                f.dim
            )));
        }
        if let Some(b) = &f.bias {
            if b.len() != f.dim {
                return Err(Error::Config(format!(
                    "bias has {} components, expected {}",
                    b.len(),
                    f.dim
                )));
            }
        }
        let sc = Scenario {
            beacons,
            trajectory: f.trajectory,
            x0: DVector::from_vec(f.x0),
            bias: f.bias.map(DVector::from_vec),
            horizon: f.horizon,
            dt: f.dt,
            delta: f.delta,
        };
        sc.validate()?;
        Ok(sc)
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::try_from(file)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            dim: self.dim(),
            beacons: self.beacons.to_rows(),
            alpha: Some(self.beacons.alpha().iter().copied().collect()),
            trajectory: self.trajectory.clone(),
            bias: self.bias.as_ref().map(|b| b.iter().copied().collect()),
            x0: self.x0.iter().copied().collect(),
            horizon: self.horizon,
            dt: self.dt,
            delta: self.delta,
        }
    }

    pub fn dim(&self) -> usize {
        self.beacons.dim()
    }

    pub fn bias_enabled(&self) -> bool {
        self.bias.is_some()
    }

    /// True bias, zero when the bias states are disabled.
    pub fn bias_or_zero(&self) -> DVector<f64> {
        self.bias.clone().unwrap_or_else(|| DVector::zeros(self.dim()))
    }

    pub fn velocity(&self, t: f64) -> DVector<f64> {
        self.trajectory.velocity(t, self.dim())
    }

    pub fn acceleration(&self, t: f64) -> DVector<f64> {
        self.trajectory.acceleration(t, self.dim())
    }

    /// Timing sanity, bounded `u`/`u̇` on `[0, T + δ]`, and `u̇` consistent
    /// with a finite difference of `u` at 20 times.
    pub fn validate(&self) -> Result<()> {
        self.trajectory.validate(self.dim())?;
        for (name, v) in [("horizon", self.horizon), ("dt", self.dt), ("delta", self.delta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.x0.iter().chain(self.bias_or_zero().iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite initial position or bias".into()));
        }
        let end = self.horizon + self.delta;
        for k in 0..=200 {
            let t = end * k as f64 / 200.0;
            let bounded = self.velocity(t).iter().chain(self.acceleration(t).iter()).all(|v| v.is_finite());
            if !bounded {
                return Err(Error::Config(format!("velocity profile not finite at t = {t}")));
            }
        }
        let n = self.dim();
        for k in 0..20 {
            let t = self.horizon * (k as f64 + 0.5) / 20.0;
            let fd = central_difference(
                |s| nalgebra::DMatrix::from_column_slice(n, 1, self.velocity(s).as_slice()),
                t,
                1e-4,
            );
            let du = self.acceleration(t);
            let scale = 1.0 + du.amax();
            if (fd.column(0) - du).amax() > 1e-4 * scale {
                return Err(Error::Config(format!(
                    "acceleration inconsistent with velocity at t = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Index layout of the lifted state `[x_pos, a, y_0, aᵀx_pos, |a|²]`, or
/// `[x_pos, y_0]` without bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftedLayout {
    pub n: usize,
    pub bias: bool,
}

impl LiftedLayout {
    pub fn of(sc: &Scenario) -> Self {
        Self {
            n: sc.dim(),
            bias: sc.bias_enabled(),
        }
    }

    pub fn dim(&self) -> usize {
        if self.bias {
            2 * self.n + 3
        } else {
            self.n + 1
        }
    }

    pub fn position(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn bias_block(&self) -> Option<std::ops::Range<usize>> {
        self.bias.then(|| self.n..2 * self.n)
    }

    pub fn y0(&self) -> usize {
        if self.bias {
            2 * self.n
        } else {
            self.n
        }
    }

    pub fn bias_dot_position(&self) -> Option<usize> {
        self.bias.then_some(2 * self.n + 1)
    }

    pub fn bias_norm_sq(&self) -> Option<usize> {
        self.bias.then_some(2 * self.n + 2)
    }
}

/// A lifted state vector together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedState {
    pub layout: LiftedLayout,
    pub vector: DVector<f64>,
}

impl LiftedState {
    /// Lift physical position and bias; `bias` is ignored when the layout has
    /// no bias block.
    pub fn from_physical(
        beacons: &BeaconConfig,
        layout: LiftedLayout,
        x_pos: &DVector<f64>,
        bias: &DVector<f64>,
    ) -> Self {
        let mut v = DVector::zeros(layout.dim());
        v.rows_mut(0, layout.n).copy_from(x_pos);
        v[layout.y0()] = y0_of(beacons, x_pos);
        if let (Some(b), Some(ax), Some(aa)) = (
            layout.bias_block(),
            layout.bias_dot_position(),
            layout.bias_norm_sq(),
        ) {
            v.rows_mut(b.start, layout.n).copy_from(bias);
            v[ax] = bias.dot(x_pos);
            v[aa] = bias.norm_squared();
        }
        Self { layout, vector: v }
    }

    pub fn position(&self) -> DVector<f64> {
        self.vector.rows(0, self.layout.n).into_owned()
    }

    pub fn bias(&self) -> Option<DVector<f64>> {
        self.layout
            .bias_block()
            .map(|b| self.vector.rows(b.start, self.layout.n).into_owned())
    }

    pub fn y0(&self) -> f64 {
        self.vector[self.layout.y0()]
    }
}

/// `y_0 = ½|x|² - Σ α_i z_iᵀ x`.
pub fn y0_of(beacons: &BeaconConfig, x_pos: &DVector<f64>) -> f64 {
    0.5 * x_pos.norm_squared() - beacons.weighted_centroid().dot(x_pos)
}
