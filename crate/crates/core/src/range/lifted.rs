//! The lifted LTV model of range-only localization with velocity bias.
//!
//! Lifted state `X = [x_pos, a, y_0, aᵀx_pos, |a|²]` (dimension `2n + 3`),
//! output `Y = [y_0, y_i - y_0 - ½|z_i|²]` (dimension `l + 1`) with
//! `y_i = ½|x_pos - z_i|²`. With the bias disabled the state reduces to
//! `[x_pos, y_0]`.

use nalgebra::{DMatrix, DVector};

use super::scenario::{LiftedLayout, Scenario};
use super::BeaconConfig;
use crate::linalg::{simpson_nodes_for, simpson_scalar};
use crate::ltv::{LtvSystem, MatrixFn, TransitionMatrix};

fn state_matrix(layout: LiftedLayout, sigma: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
    let n = layout.n;
    let mut a = DMatrix::zeros(layout.dim(), layout.dim());
    let y0 = layout.y0();
    for j in 0..n {
        a[(y0, j)] = u[j];
    }
    if layout.bias {
        for i in 0..n {
            a[(i, n + i)] = 1.0;
        }
        for j in 0..n {
            a[(y0, n + j)] = -sigma[j];
            a[(y0 + 1, n + j)] = u[j];
        }
        a[(y0, y0 + 1)] = 1.0;
        a[(y0 + 1, y0 + 2)] = 1.0;
    }
    a
}

/// `Ȧ(t)`: only the `u`-dependent entries move.
fn state_matrix_rate(layout: LiftedLayout, du: &DVector<f64>) -> DMatrix<f64> {
    let n = layout.n;
    let mut a = DMatrix::zeros(layout.dim(), layout.dim());
    let y0 = layout.y0();
    for j in 0..n {
        a[(y0, j)] = du[j];
        if layout.bias {
            a[(y0 + 1, n + j)] = du[j];
        }
    }
    a
}

/// Constant output matrix `C`.
pub fn output_matrix(beacons: &BeaconConfig, layout: LiftedLayout) -> DMatrix<f64> {
    let l = beacons.count();
    let mut c = DMatrix::zeros(l + 1, layout.dim());
    c[(0, layout.y0())] = 1.0;
    c.view_mut((1, 0), (l, layout.n)).copy_from(&beacons.dzt());
    c
}

/// The lifted system `(A(t), B = I, C)` with `Ȧ(t)` attached.
pub fn build_lifted_system(sc: &Scenario) -> LtvSystem {
    let layout = LiftedLayout::of(sc);
    let sigma = sc.beacons.weighted_centroid();
    let traj = sc.trajectory.clone();
    let traj_rate = sc.trajectory.clone();
    let n = layout.n;
    let a = MatrixFn::new(layout.dim(), layout.dim(), move |t| {
        state_matrix(layout, &sigma, &traj.velocity(t, n))
    })
    .with_derivative(move |t| state_matrix_rate(layout, &traj_rate.acceleration(t, n)));
    let c = MatrixFn::constant(output_matrix(&sc.beacons, layout));
    LtvSystem::new(a, MatrixFn::identity(layout.dim()), c)
        .expect("lifted system dimensions are consistent by construction")
}

/// Known input `U(t) = [u, 0, -Σ α_i z_iᵀu, 0, 0]`.
pub fn input_vector(sc: &Scenario, t: f64) -> DVector<f64> {
    let layout = LiftedLayout::of(sc);
    let u = sc.velocity(t);
    let mut v = DVector::zeros(layout.dim());
    v.rows_mut(0, layout.n).copy_from(&u);
    v[layout.y0()] = -sc.beacons.weighted_centroid().dot(&u);
    v
}

/// Output vector from the true position.
pub fn measure(sc: &Scenario, _t: f64, x_pos: &DVector<f64>) -> DVector<f64> {
    let ranges: Vec<f64> = (0..sc.beacons.count())
        .map(|i| (x_pos - sc.beacons.beacon(i)).norm())
        .collect();
    measure_from_ranges(&sc.beacons, &ranges)
}

/// Output vector from raw ranges `|x_pos - z_i|`. `y_0` is recovered as
/// `Σ α_i y_i - ½ Σ α_i |z_i|²`.
pub fn measure_from_ranges(beacons: &BeaconConfig, ranges: &[f64]) -> DVector<f64> {
    let l = beacons.count();
    let half_sq: Vec<f64> = (0..l).map(|i| 0.5 * beacons.beacon(i).norm_squared()).collect();
    let y: Vec<f64> = ranges.iter().map(|r| 0.5 * r * r).collect();
    let alpha = beacons.alpha();
    let y0: f64 = (0..l).map(|i| alpha[i] * (y[i] - half_sq[i])).sum();
    let mut out = DVector::zeros(l + 1);
    out[0] = y0;
    for i in 0..l {
        out[i + 1] = y[i] - y0 - half_sq[i];
    }
    out
}

/// `∫_t^{t+s} u(τ) dτ` by composite Simpson with spacing at most
/// `min(dt, 0.01)`.
pub fn velocity_primitive(sc: &Scenario, t: f64, s: f64) -> DVector<f64> {
    let n = sc.dim();
    if s == 0.0 {
        return DVector::zeros(n);
    }
    let nodes = simpson_nodes_for(s, sc.dt.min(1e-2));
    DVector::from_fn(n, |i, _| simpson_scalar(|tau| sc.velocity(tau)[i], t, t + s, nodes))
}

/// Closed-form `Φ(t+s, t)` of the lifted system, with
/// `a(t+s, t) = ∫_t^{t+s} uᵀ` and `d(t, s) = s (a(t+s, t) - Σ α_i z_iᵀ)`.
pub fn closed_form_phi(sc: &Scenario, t: f64, s: f64) -> TransitionMatrix {
    let layout = LiftedLayout::of(sc);
    let n = layout.n;
    let disp = velocity_primitive(sc, t, s);
    let mut phi = DMatrix::identity(layout.dim(), layout.dim());
    let y0 = layout.y0();
    for j in 0..n {
        phi[(y0, j)] = disp[j];
    }
    if layout.bias {
        let sigma = sc.beacons.weighted_centroid();
        for i in 0..n {
            phi[(i, n + i)] = s;
        }
        for j in 0..n {
            phi[(y0, n + j)] = s * (disp[j] - sigma[j]);
            phi[(y0 + 1, n + j)] = disp[j];
        }
        phi[(y0, y0 + 1)] = s;
        phi[(y0, y0 + 2)] = 0.5 * s * s;
        phi[(y0 + 1, y0 + 2)] = s;
    }
    TransitionMatrix { t, s, phi }
}

fn m_matrix(sc: &Scenario, u: &DVector<f64>, du: &DVector<f64>) -> DMatrix<f64> {
    let layout = LiftedLayout::of(sc);
    let n = layout.n;
    let l = sc.beacons.count();
    let dzt = sc.beacons.dzt();
    let y0 = layout.y0();
    let rows = if layout.bias { 2 * l + 3 } else { l + 3 };
    let mut m = DMatrix::zeros(rows, layout.dim());
    m[(0, y0)] = 1.0;
    m.view_mut((1, 0), (l, n)).copy_from(&dzt);
    let r = l + 1;
    for j in 0..n {
        m[(r, j)] = u[j];
    }
    if layout.bias {
        let sigma = sc.beacons.weighted_centroid();
        for j in 0..n {
            m[(r, n + j)] = -sigma[j];
        }
        m[(r, y0 + 1)] = 1.0;
        m.view_mut((r + 1, n), (l, n)).copy_from(&dzt);
        let last = r + 1 + l;
        for j in 0..n {
            m[(last, j)] = du[j];
            m[(last, n + j)] = 2.0 * u[j];
        }
        m[(last, y0 + 2)] = 1.0;
    } else {
        for j in 0..n {
            m[(r + 1, j)] = du[j];
        }
    }
    m
}

/// `M(t) = [N_0; N_1(t); first row of N_2(t)]` in closed form.
///
/// With bias: `(2l + 3) × (2n + 3)`, rows `[0,0,1,0,0]`, `[DZᵀ,0,0,0,0]`,
/// `[uᵀ, -Σα_i z_iᵀ, 0, 1, 0]`, `[0, DZᵀ, 0, 0, 0]`, `[u̇ᵀ, 2uᵀ, 0, 0, 1]`.
/// Without bias: `(l + 3) × (n + 1)`, rows `[0, 1]`, `[DZᵀ, 0]`, `[uᵀ, 0]`,
/// `[u̇ᵀ, 0]`.
pub fn build_m(sc: &Scenario) -> MatrixFn {
    let layout = LiftedLayout::of(sc);
    let l = sc.beacons.count();
    let rows = if layout.bias { 2 * l + 3 } else { l + 3 };
    let sc = sc.clone();
    MatrixFn::new(rows, layout.dim(), move |t| {
        m_matrix(&sc, &sc.velocity(t), &sc.acceleration(t))
    })
}

/// Component-wise expansion of `M(t+s)Φ(t+s,t)x` for the biased system,
/// written directly in terms of the blocks `x_1..x_5` of `x`.
pub fn m_phi_expansion(sc: &Scenario, t: f64, s: f64, x: &DVector<f64>) -> DVector<f64> {
    let layout = LiftedLayout::of(sc);
    assert!(layout.bias, "expansion is defined for the biased lifted system");
    let n = layout.n;
    let l = sc.beacons.count();
    let x1 = x.rows(0, n).into_owned();
    let x2 = x.rows(n, n).into_owned();
    let (x3, x4, x5) = (x[2 * n], x[2 * n + 1], x[2 * n + 2]);
    let disp = velocity_primitive(sc, t, s);
    let sigma = sc.beacons.weighted_centroid();
    let d_row = (&disp - &sigma) * s;
    let u = sc.velocity(t + s);
    let du = sc.acceleration(t + s);
    let dzt = sc.beacons.dzt();
    let moved = &x1 + &x2 * s;

    let mut out = DVector::zeros(2 * l + 3);
    out[0] = disp.dot(&x1) + d_row.dot(&x2) + x3 + s * x4 + 0.5 * s * s * x5;
    out.rows_mut(1, l).copy_from(&(&dzt * &moved));
    out[l + 1] = u.dot(&moved) - sigma.dot(&x2) + disp.dot(&x2) + x4 + s * x5;
    out.rows_mut(l + 2, l).copy_from(&(&dzt * &x2));
    out[2 * l + 2] = du.dot(&moved) + 2.0 * u.dot(&x2) + x5;
    out
}
