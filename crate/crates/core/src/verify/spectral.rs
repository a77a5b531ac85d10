//! Second singular value and spectral gap by deflated power iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

const MAX_ITERATIONS: usize = 200_000;
const RESIDUAL_TOLERANCE: f64 = 1e-13;
const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// `1 - λ₂ / H`
    pub gamma: f64,
    /// Largest singular value.
    pub lambda1: f64,
    /// Second-largest singular value.
    pub lambda2: f64,
    /// Row degree used as `H`: the common row degree, or the maximum when
    /// rows are unequal.
    pub degree_h: usize,
    /// Whether every row has degree `H`.
    pub regular: bool,
}

/// Dense row-major copy of the mask with the smaller side as columns, so
/// the Gram matrix iterated below is as small as possible.
struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    fn from_mask(mask: &BinaryMask) -> Self {
        let src = if mask.cols() <= mask.rows() { mask.clone() } else { mask.transpose() };
        let (rows, cols) = (src.rows(), src.cols());
        let mut data = vec![0.0; rows * cols];
        for (i, j) in src.edges() {
            data[i * cols + j] = 1.0;
        }
        Dense { rows, cols, data }
    }

    /// `out = Q v`
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// `out = Qᵀ w`
    fn apply_t(&self, w: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &wi) in w.iter().enumerate() {
            if wi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * wi;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for u in basis {
        let c = dot(v, u);
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
    }
}

/// Leading right singular vector of `Q` restricted to the complement of
/// `deflated`, and its singular value. Iterates `v <- P QᵀQ P v` until the
/// eigen-residual of the Gram matrix is below tolerance.
///
/// `scale` bounds the Gram spectrum; an image smaller than
/// `ZERO_TOLERANCE * scale` is rounding noise and means singular value 0.
fn power_iterate(q: &Dense, deflated: &[Vec<f64>], start: Vec<f64>, scale: f64) -> (f64, Vec<f64>) {
    let mut v = start;
    project_out(&mut v, deflated);
    if normalize(&mut v) == 0.0 {
        return (0.0, v);
    }
    let mut qv = vec![0.0; q.rows];
    let mut g = vec![0.0; q.cols];
    let mut sigma = 0.0;
    for _ in 0..MAX_ITERATIONS {
        q.apply(&v, &mut qv);
        q.apply_t(&qv, &mut g);
        project_out(&mut g, deflated);
        let mu = dot(&v, &g);
        sigma = mu.max(0.0).sqrt();
        let residual: f64 = g.iter().zip(&v).map(|(gi, vi)| (gi - mu * vi).powi(2)).sum::<f64>().sqrt();
        if normalize(&mut g) <= ZERO_TOLERANCE * scale {
            return (0.0, v);
        }
        std::mem::swap(&mut v, &mut g);
        if residual <= RESIDUAL_TOLERANCE * mu.max(1.0) {
            break;
        }
    }
    // Singular value from the norm of Q v: linear in the vector error
    // rather than through a square root of the Gram eigenvalue.
    q.apply(&v, &mut qv);
    let direct = dot(&qv, &qv).sqrt();
    (if direct.is_finite() { direct } else { sigma }, v)
}

/// Deterministic, non-degenerate start vector.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract()).collect()
}

/// λ₁, λ₂ of the biadjacency matrix and `γ = 1 - λ₂ / H`.
pub fn spectral_gap(mask: &BinaryMask) -> Result<SpectralReport> {
    if mask.edge_count() == 0 {
        return Err(Error::UndefinedSpectrum("the mask has no edges".into()));
    }
    let q = Dense::from_mask(mask);
    // The all-ones vector is exact for biregular masks and a good start
    // otherwise.
    let (lambda1, v1) = power_iterate(&q, &[], vec![1.0; q.cols], 1.0);
    let (lambda2, _) = if q.cols > 1 {
        power_iterate(&q, &[v1], start_vector(q.cols), lambda1 * lambda1)
    } else {
        (0.0, Vec::new())
    };
    let degrees = mask.row_degrees();
    let degree_h = degrees.iter().copied().max().unwrap_or(0);
    let regular = degrees.iter().all(|&d| d == degree_h);
    Ok(SpectralReport {
        gamma: 1.0 - lambda2 / degree_h as f64,
        lambda1,
        lambda2,
        degree_h,
        regular,
    })
}
