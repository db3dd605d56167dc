//! Continuous Riccati observer on the lifted range-localization system.
//!
//! ```text
//! dX̂/dt = A(t)X̂ + U(t) + K(t)(Y - C X̂),   K = P Cᵀ Q
//! dP/dt  = A P + P Aᵀ - P Cᵀ Q C P + V
//! ```
//!
//! Truth, estimate and `P` advance together under one fixed-step RK4 scheme;
//! `P` is symmetrized after every step.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{from_rows, is_finite, symmetrize, SymmetricSpectrum};
use crate::range::{
    input_vector, measure_from_ranges, output_matrix, LiftedLayout, LiftedState, Scenario,
};

/// `P` is declared collapsed below this eigenvalue.
pub const P_MIN_EIG: f64 = 1e-12;

pub const DEFAULT_OBSERVER_DT: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverConfig {
    /// Output weight, `(l+1)×(l+1)`.
    pub q: DMatrix<f64>,
    /// State weight, `N×N`.
    pub v: DMatrix<f64>,
    pub p0: DMatrix<f64>,
    pub x_hat0: DVector<f64>,
    /// Range noise standard deviation per beacon (zero for noiseless runs).
    pub noise_std: Vec<f64>,
    pub dt: f64,
}

impl ObserverConfig {
    /// `Q = I`, `V = 0.01 I`, `P₀ = I`, noiseless, with the initial estimate
    /// lifted from a physical position and bias guess.
    pub fn with_estimate(
        sc: &Scenario,
        position_estimate: &DVector<f64>,
        bias_estimate: &DVector<f64>,
    ) -> Self {
        let layout = LiftedLayout::of(sc);
        let dim = layout.dim();
        let l = sc.beacons.count();
        let x_hat0 =
            LiftedState::from_physical(&sc.beacons, layout, position_estimate, bias_estimate)
                .vector;
        Self {
            q: DMatrix::identity(l + 1, l + 1),
            v: DMatrix::identity(dim, dim) * 0.01,
            p0: DMatrix::identity(dim, dim),
            x_hat0,
            noise_std: vec![0.0; l],
            dt: DEFAULT_OBSERVER_DT,
        }
    }

    /// Exact initialization at the scenario's truth.
    pub fn exact(sc: &Scenario) -> Self {
        Self::with_estimate(sc, &sc.x0, &sc.bias_or_zero())
    }

    pub fn validate(&self, sc: &Scenario) -> Result<()> {
        let dim = LiftedLayout::of(sc).dim();
        let l = sc.beacons.count();
        let square = |name: &str, m: &DMatrix<f64>, n: usize| -> Result<()> {
            if m.shape() != (n, n) {
                return Err(Error::Dimension {
                    context: format!("observer weight {name}"),
                    expected: (n, n),
                    found: m.shape(),
                });
            }
            if (m - m.transpose()).amax() > 1e-12 {
                return Err(Error::Config(format!("observer weight {name} is not symmetric")));
            }
            Ok(())
        };
        square("Q", &self.q, l + 1)?;
        square("V", &self.v, dim)?;
        square("P0", &self.p0, dim)?;
        if SymmetricSpectrum::new(&self.q)?.min() < 1e-9 {
            return Err(Error::Config("Q must be positive definite".into()));
        }
        if SymmetricSpectrum::new(&self.p0)?.min() < 1e-9 {
            return Err(Error::Config("P0 must be positive definite".into()));
        }
        if SymmetricSpectrum::new(&self.v)?.min() < -1e-12 {
            return Err(Error::Config("V must be positive semidefinite".into()));
        }
        if self.x_hat0.len() != dim {
            return Err(Error::Config(format!(
                "initial estimate has {} entries, expected {dim}",
                self.x_hat0.len()
            )));
        }
        if self.noise_std.len() != l || self.noise_std.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Config(format!(
                "noise_std needs {l} non-negative entries"
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("observer dt must be positive".into()));
        }
        Ok(())
    }
}

/// Observer settings as read from JSON. Omitted fields take the defaults of
/// [`ObserverConfig::with_estimate`]; the estimate defaults to the true
/// initial position with zero bias.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_hat0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_estimate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_estimate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl ObserverConfigFile {
    pub fn resolve(&self, sc: &Scenario) -> Result<ObserverConfig> {
        let n = sc.dim();
        let vec_of = |name: &str, v: &Option<Vec<f64>>, default: DVector<f64>| -> Result<DVector<f64>> {
            match v {
                None => Ok(default),
                Some(v) if v.len() == n => Ok(DVector::from_column_slice(v)),
                Some(v) => Err(Error::Config(format!(
                    "{name} has {} components, expected {n}",
                    v.len()
                ))),
            }
        };
        let pos = vec_of("position_estimate", &self.position_estimate, sc.x0.clone())?;
        let bias = vec_of("bias_estimate", &self.bias_estimate, DVector::zeros(n))?;
        let mut cfg = ObserverConfig::with_estimate(sc, &pos, &bias);
        if let Some(q) = &self.q {
            cfg.q = from_rows(q)?;
        }
        if let Some(v) = &self.v {
            cfg.v = from_rows(v)?;
        }
        if let Some(p0) = &self.p0 {
            cfg.p0 = from_rows(p0)?;
        }
        if let Some(x) = &self.x_hat0 {
            cfg.x_hat0 = DVector::from_column_slice(x);
        }
        if let Some(s) = &self.noise_std {
            cfg.noise_std = if s.len() == 1 {
                vec![s[0]; sc.beacons.count()]
            } else {
                s.clone()
            };
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        cfg.validate(sc)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct TracePoint {
    pub t: f64,
    pub x: DVector<f64>,
    pub x_hat: DVector<f64>,
    pub err_norm: f64,
    pub pos_err: f64,
    pub bias_err: f64,
    pub p_min_eig: f64,
    pub p_max_eig: f64,
    /// `|Y - C X̂|` with the noiseless output.
    pub innovation_norm: f64,
    /// `max |P - Pᵀ|` after the step's symmetrization.
    pub p_asymmetry: f64,
}

#[derive(Debug, Clone)]
pub struct ObserverTrace {
    pub layout: LiftedLayout,
    pub points: Vec<TracePoint>,
    pub final_p: DMatrix<f64>,
}

/// `K = P Cᵀ Q`.
pub fn gain(p: &DMatrix<f64>, c: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    p * c.transpose() * q
}

#[derive(Clone)]
struct Joint {
    x_true: DVector<f64>,
    x_hat: DVector<f64>,
    p: DMatrix<f64>,
}

impl Joint {
    fn axpy(&self, h: f64, d: &Joint) -> Joint {
        Joint {
            x_true: &self.x_true + &d.x_true * h,
            x_hat: &self.x_hat + &d.x_hat * h,
            p: &self.p + &d.p * h,
        }
    }
}

struct Dynamics<'a> {
    sc: &'a Scenario,
    cfg: &'a ObserverConfig,
    a_fn: crate::ltv::MatrixFn,
    c: DMatrix<f64>,
    bias: DVector<f64>,
}

impl Dynamics<'_> {
    fn output(&self, x_true: &DVector<f64>, noise: &[f64]) -> DVector<f64> {
        let ranges: Vec<f64> = (0..self.sc.beacons.count())
            .map(|i| (x_true - self.sc.beacons.beacon(i)).norm() + noise[i])
            .collect();
        measure_from_ranges(&self.sc.beacons, &ranges)
    }

    fn rate(&self, t: f64, s: &Joint, noise: &[f64]) -> Result<Joint> {
        let a = self.a_fn.eval(t)?;
        let y = self.output(&s.x_true, noise);
        let k = gain(&s.p, &self.c, &self.cfg.q);
        let x_hat = &a * &s.x_hat + input_vector(self.sc, t) + &k * (y - &self.c * &s.x_hat);
        let pct = &s.p * self.c.transpose();
        let p = &a * &s.p + &s.p * a.transpose() - &pct * &self.cfg.q * pct.transpose() + &self.cfg.v;
        Ok(Joint {
            x_true: self.sc.velocity(t) + &self.bias,
            x_hat,
            p,
        })
    }

    fn step(&self, t: f64, s: &Joint, h: f64, noise: &[f64]) -> Result<Joint> {
        let k1 = self.rate(t, s, noise)?;
        let k2 = self.rate(t + 0.5 * h, &s.axpy(0.5 * h, &k1), noise)?;
        let k3 = self.rate(t + 0.5 * h, &s.axpy(0.5 * h, &k2), noise)?;
        let k4 = self.rate(t + h, &s.axpy(h, &k3), noise)?;
        let mut next = s.axpy(h / 6.0, &k1);
        next = next.axpy(h / 3.0, &k2);
        next = next.axpy(h / 3.0, &k3);
        next = next.axpy(h / 6.0, &k4);
        next.p = symmetrize(&next.p);
        Ok(next)
    }

    fn record(&self, t: f64, s: &Joint) -> Result<TracePoint> {
        let layout = LiftedLayout::of(self.sc);
        let truth = LiftedState::from_physical(&self.sc.beacons, layout, &s.x_true, &self.bias);
        let estimate = LiftedState {
            layout,
            vector: s.x_hat.clone(),
        };
        let spec = SymmetricSpectrum::new(&s.p).map_err(|_| Error::Divergence { time: t })?;
        let bias_err = match (estimate.bias(), truth.bias()) {
            (Some(e), Some(b)) => (e - b).norm(),
            _ => 0.0,
        };
        let clean = self.output(&s.x_true, &vec![0.0; self.sc.beacons.count()]);
        Ok(TracePoint {
            t,
            err_norm: (&s.x_hat - &truth.vector).norm(),
            pos_err: (estimate.position() - &s.x_true).norm(),
            bias_err,
            p_min_eig: spec.min(),
            p_max_eig: spec.max(),
            innovation_norm: (clean - &self.c * &s.x_hat).norm(),
            p_asymmetry: (&s.p - s.p.transpose()).amax(),
            x: truth.vector,
            x_hat: s.x_hat.clone(),
        })
    }
}

/// Simulate truth and observer over `[0, T]`. Range noise is drawn once per
/// step from one seeded stream per beacon.
pub fn run_observer(sc: &Scenario, cfg: &ObserverConfig, seed: u64) -> Result<ObserverTrace> {
    cfg.validate(sc)?;
    let layout = LiftedLayout::of(sc);
    let sys = crate::range::build_lifted_system(sc);
    let dyns = Dynamics {
        sc,
        cfg,
        a_fn: sys.a().clone(),
        c: output_matrix(&sc.beacons, layout),
        bias: sc.bias_or_zero(),
    };

    let l = sc.beacons.count();
    let mut streams: Vec<(ChaCha8Rng, Option<Normal<f64>>)> = (0..l)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let dist = (cfg.noise_std[i] > 0.0)
                .then(|| Normal::new(0.0, cfg.noise_std[i]).expect("validated std"));
            (rng, dist)
        })
        .collect();

    let mut state = Joint {
        x_true: sc.x0.clone(),
        x_hat: cfg.x_hat0.clone(),
        p: symmetrize(&cfg.p0),
    };
    let steps = (sc.horizon / cfg.dt).ceil() as usize;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(dyns.record(0.0, &state)?);
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let h = (sc.horizon - t).min(cfg.dt);
        let noise: Vec<f64> = streams
            .iter_mut()
            .map(|(rng, dist)| dist.as_ref().map_or(0.0, |d| d.sample(rng)))
            .collect();
        state = dyns.step(t, &state, h, &noise)?;
        let t_next = t + h;
        if !state.x_hat.iter().all(|v| v.is_finite()) || !state.x_true.iter().all(|v| v.is_finite())
        {
            return Err(Error::Divergence { time: t_next });
        }
        if !is_finite(&state.p) {
            return Err(Error::CovarianceCollapse {
                time: t_next,
                min_eig: f64::NAN,
            });
        }
        let point = dyns.record(t_next, &state)?;
        if point.p_min_eig < P_MIN_EIG {
            return Err(Error::CovarianceCollapse {
                time: t_next,
                min_eig: point.p_min_eig,
            });
        }
        points.push(point);
    }
    Ok(ObserverTrace {
        layout,
        points,
        final_p: state.p,
    })
}

fn ser_rate<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_str("nan")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    /// Minus the least-squares slope of `ln(err_norm)` over the second half
    /// of the horizon; `+inf` if the error reaches exactly zero there.
    #[serde(serialize_with = "ser_rate")]
    pub decay_rate: f64,
    pub final_pos_err: f64,
    pub final_bias_err: f64,
    pub p_cond_peak: f64,
}

/// Exponential decay rate of `values` over the samples with `t >= t_from`.
pub fn decay_rate(times: &[f64], values: &[f64], t_from: f64) -> f64 {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_from)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.iter().any(|(_, v)| *v == 0.0) {
        return f64::INFINITY;
    }
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lm = pts.iter().map(|p| p.1.abs().ln()).sum::<f64>() / m;
    let (num, den) = pts.iter().fold((0.0, 0.0), |(num, den), (t, v)| {
        (num + (t - tm) * (v.abs().ln() - lm), den + (t - tm) * (t - tm))
    });
    -num / den
}

pub fn convergence_metrics(trace: &ObserverTrace) -> Result<ConvergenceSummary> {
    let last = trace
        .points
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty observer trace".into()))?;
    let times: Vec<f64> = trace.points.iter().map(|p| p.t).collect();
    let errs: Vec<f64> = trace.points.iter().map(|p| p.err_norm).collect();
    let t0 = times[0];
    let half = t0 + 0.5 * (last.t - t0);
    Ok(ConvergenceSummary {
        decay_rate: decay_rate(&times, &errs, half),
        final_pos_err: last.pos_err,
        final_bias_err: last.bias_err,
        p_cond_peak: trace
            .points
            .iter()
            .map(|p| p.p_max_eig / p.p_min_eig)
            .fold(0.0, f64::max),
    })
}

/// Trace CSV header for a lifted state of dimension `dim`.
pub fn trace_header(dim: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=dim).map(|i| format!("x{i}")));
    cols.extend((1..=dim).map(|i| format!("xhat{i}")));
    cols.extend(
        ["err_norm", "pos_err", "bias_err", "p_min_eig", "p_max_eig"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.join(",")
}

/// Write the trace as CSV with 17 significant digits per value.
pub fn write_trace_csv<W: Write>(trace: &ObserverTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", trace_header(trace.layout.dim()))?;
    for p in &trace.points {
        let mut row: Vec<f64> = vec![p.t];
        row.extend(p.x.iter());
        row.extend(p.x_hat.iter());
        row.extend([p.err_norm, p.pos_err, p.bias_err, p.p_min_eig, p.p_max_eig]);
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
