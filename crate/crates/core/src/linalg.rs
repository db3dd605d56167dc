//! Small dense linear-algebra and numerics helpers shared by every module.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry (the entrywise ∞-norm).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
///
/// Eigenvectors are stored as columns, each sign-normalized so that its first
/// component with magnitude above `1e-12` is positive.
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymmetricSpectrum {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension {
                context: "symmetric eigen-decomposition".into(),
                expected: (m.nrows(), m.nrows()),
                found: m.shape(),
            });
        }
        if !is_finite(m) {
            return Err(Error::Numeric(
                "non-finite entry in symmetric eigen-decomposition input".into(),
            ));
        }
        let n = m.nrows();
        let eig = SymmetricEigen::new(symmetrize(m));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let mut values = Vec::with_capacity(n);
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            values.push(eig.eigenvalues[src]);
            let mut v = eig.eigenvectors.column(src).into_owned();
            let norm = v.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::Numeric("degenerate eigenvector".into()));
            }
            v /= norm;
            normalize_sign(&mut v);
            vectors.set_column(dst, &v);
        }
        Ok(Self { values, vectors })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Unit eigenvector of the smallest eigenvalue.
    ///
    /// When several eigenvalues tie with the smallest one (within
    /// `1e-12 · max(1, |λ_max|)`), the lexicographically smallest
    /// sign-normalized eigenvector wins.
    pub fn weakest_direction(&self) -> DVector<f64> {
        let tol = 1e-12 * self.max().abs().max(1.0);
        let lo = self.min();
        (0..self.values.len())
            .take_while(|&i| self.values[i] - lo <= tol)
            .map(|i| self.vectors.column(i).into_owned())
            .min_by(lexicographic)
            .expect("spectrum is never empty")
    }
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Flip `v` so its first non-negligible component is positive.
pub fn normalize_sign(v: &mut DVector<f64>) {
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Eigenvalues of a general (possibly non-symmetric) square matrix.
pub fn general_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(Error::Dimension {
            context: "general eigenvalues".into(),
            expected: (m.nrows(), m.nrows()),
            found: m.shape(),
        });
    }
    if !is_finite(m) {
        return Err(Error::Numeric("non-finite matrix in general eigenvalues".into()));
    }
    let vals = m.clone().complex_eigenvalues();
    Ok(vals.iter().copied().collect())
}

/// Composite Simpson weight of node `i` out of `nodes` (odd), including the
/// step factor `h / 3`.
pub fn simpson_weight(i: usize, nodes: usize, h: f64) -> f64 {
    let w = if i == 0 || i + 1 == nodes {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    };
    w * h / 3.0
}

pub fn check_simpson_nodes(nodes: usize) -> Result<()> {
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "composite Simpson needs an odd node count >= 3, got {nodes}"
        )));
    }
    Ok(())
}

/// Smallest odd node count whose spacing over `length` does not exceed `max_step`.
pub fn simpson_nodes_for(length: f64, max_step: f64) -> usize {
    let panels = (length / (2.0 * max_step)).ceil().max(1.0) as usize;
    2 * panels + 1
}

/// Composite Simpson integral of a scalar function over `[a, b]`.
pub fn simpson_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: usize) -> f64 {
    let h = (b - a) / (nodes - 1) as f64;
    (0..nodes)
        .map(|i| simpson_weight(i, nodes, h) * f(a + i as f64 * h))
        .sum()
}

/// Fourth-order central difference `f'(t)` with step `h`.
pub fn central_difference<F>(f: F, t: f64, h: f64) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let f_p2 = f(t + 2.0 * h);
    let f_p1 = f(t + h);
    let f_m1 = f(t - h);
    let f_m2 = f(t - 2.0 * h);
    (f_m2 - f_p2 + (f_p1 - f_m1) * 8.0) / (12.0 * h)
}

/// One classical Runge-Kutta step for a matrix-valued ODE `y' = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: &DMatrix<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y + &k1 * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &(y + &k2 * (0.5 * h)));
    let k4 = f(t + h, &(y + &k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Row-major nested vectors, the serialization shape used in reports.
pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Config("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}
