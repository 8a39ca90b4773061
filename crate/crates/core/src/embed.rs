//! Classical (Torgerson) multidimensional scaling.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dissim::DissimMatrix;
use crate::error::{invalid_input, invalid_param, Result};
use crate::matrix::Matrix;

/// Eigenvalues at or below `POSITIVE_TOL · λ_max` are not retained.
pub const POSITIVE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    /// n×d' coordinates, columns ordered by descending eigenvalue.
    pub coords: Matrix,
    /// Full spectrum of the double-centred matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// `Σ|λ<0| / Σ|λ|`.
    pub negative_mass: f64,
    /// The dimension asked for; `coords.cols()` may be smaller.
    pub requested_dim: usize,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.coords.cols()
    }
}

/// Double-centres the squared dissimilarities: `B = −½·J·Δ²·J`.
///
/// The diagonal of `m` is ignored (treated as zero self-dissimilarity).
pub fn double_center(m: &DissimMatrix) -> Matrix {
    let n = m.n();
    let sq = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let v = m.get(i, j);
            v * v
        }
    });
    let row_mean: Vec<f64> = sq
        .iter_rows()
        .map(|r| r.iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    Matrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + grand)
    })
}

/// Embeds a prepared (non-negative) dissimilarity matrix into `d_prime` dimensions.
///
/// Coordinates are `√λₖ·eₖ` for the largest eigenvalues above the positivity
/// tolerance; fewer than `d_prime` columns are returned when the spectrum has
/// fewer positive eigenvalues. Each eigenvector is oriented so its
/// largest-magnitude entry is positive.
pub fn classical_mds(m: &DissimMatrix, d_prime: usize) -> Result<Embedding> {
    let n = m.n();
    if n < 2 {
        return Err(invalid_input("MDS needs at least 2 points"));
    }
    if d_prime < 1 {
        return Err(invalid_param("embedding dimension must be >= 1"));
    }
    if d_prime > n - 1 {
        return Err(invalid_param(format!(
            "embedding dimension {d_prime} exceeds n - 1 = {}",
            n - 1
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            let v = m.get(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(invalid_input(format!(
                    "dissimilarity ({i}, {j}) = {v}; prepare the matrix before embedding"
                )));
            }
        }
    }

    let b = double_center(m);
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, b.as_slice()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    let abs_total: f64 = eigenvalues.iter().map(|l| l.abs()).sum();
    let negative: f64 = eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let negative_mass = if abs_total > 0.0 {
        negative / abs_total
    } else {
        0.0
    };

    let lambda_max = eigenvalues[0];
    let keep = if lambda_max > 0.0 {
        eigenvalues
            .iter()
            .take(d_prime)
            .take_while(|&&l| l > POSITIVE_TOL * lambda_max)
            .count()
    } else {
        0
    };

    let mut coords = Matrix::zeros(n, keep);
    for (col, &k) in order.iter().take(keep).enumerate() {
        let vec = eig.eigenvectors.column(k);
        let mut pivot = 0;
        for i in 1..n {
            if vec[i].abs() > vec[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if vec[pivot] < 0.0 { -1.0 } else { 1.0 };
        let scale = sign * eigenvalues[col].sqrt();
        for i in 0..n {
            coords[(i, col)] = scale * vec[i];
        }
    }

    Ok(Embedding {
        coords,
        eigenvalues,
        negative_mass,
        requested_dim: d_prime,
    })
}
