//! Attraction-repulsion dissimilarities, pointwise and as full matrices.
//!
//! Every family is evaluated from the squared unprotected distance and the two
//! protected vectors, so the same code serves Euclidean, kernel-induced and
//! precomputed (e.g. geodesic) base distances.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::matrix::{sq_euclidean, Matrix};
use crate::types::{Dataset, DissimParams, Family};
use crate::wide::Wide;

/// Symmetric n×n dissimilarities plus the preprocessing applied to them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissimMatrix {
    values: Matrix,
    shift: f64,
    sqrt_applied: bool,
    params: Option<DissimParams>,
}

impl DissimMatrix {
    /// Wraps a symmetric square matrix that did not come from a perturbed family
    /// (plain distances, geodesic distances, user input).
    pub fn from_values(values: Matrix) -> Result<Self> {
        Self::from_parts(values, 0.0, false, None)
    }

    pub fn from_parts(
        values: Matrix,
        shift: f64,
        sqrt_applied: bool,
        params: Option<DissimParams>,
    ) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "dissimilarity matrix is {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        if !values.is_symmetric() {
            return Err(invalid_input("dissimilarity matrix is not symmetric"));
        }
        if values.as_slice().iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("dissimilarity matrix".into()));
        }
        if shift.is_nan() || shift < 0.0 {
            return Err(invalid_param("shift must be >= 0"));
        }
        Ok(DissimMatrix {
            values,
            shift,
            sqrt_applied,
            params,
        })
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// The `|min Δ| + ε` added by [`prepare_for_mds`], or 0.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn sqrt_applied(&self) -> bool {
        self.sqrt_applied
    }

    pub fn params(&self) -> Option<&DissimParams> {
        self.params.as_ref()
    }

    pub fn family(&self) -> Option<Family> {
        self.params.as_ref().map(DissimParams::family)
    }

    /// Minimum and maximum over off-diagonal entries.
    pub fn off_diagonal_range(&self) -> Option<(f64, f64)> {
        let n = self.n();
        let mut range: Option<(f64, f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let v = self.values[(i, j)];
                range = Some(match range {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            }
        }
        range
    }
}

/// Family evaluation with the `1'U1` constant precomputed.
#[derive(Clone, Debug)]
pub(crate) struct Evaluator {
    params: DissimParams,
    u_total: f64,
}

impl Evaluator {
    pub(crate) fn new(params: &DissimParams) -> Self {
        let u_total = match params {
            DissimParams::Delta1 { shift, .. } => shift.total(),
            _ => 0.0,
        };
        Evaluator {
            params: params.clone(),
            u_total,
        }
    }

    /// `1 + u·e^(−v·s_sq)` for `delta2`, 1 for every other family.
    #[inline]
    pub(crate) fn delta2_factor(&self, s_sq: f64) -> f64 {
        match &self.params {
            DissimParams::Delta2 { intensity, decay } => 1.0 + intensity * (-decay * s_sq).exp(),
            _ => 1.0,
        }
    }

    /// Dissimilarity given the squared unprotected distance `sq`.
    #[inline]
    pub(crate) fn eval(&self, sq: f64, s1: &[f64], s2: &[f64]) -> f64 {
        match &self.params {
            DissimParams::Delta1 { interaction, .. } => {
                self.u_total + interaction.symmetric_bilinear(s1, s2) + sq
            }
            DissimParams::Delta2 { intensity, decay } => {
                if *intensity == 0.0 {
                    return sq;
                }
                (1.0 + intensity * (-decay * sq_euclidean(s1, s2)).exp()) * sq
            }
            DissimParams::Delta3 { intensity } => sq - intensity * sq_euclidean(s1, s2),
            DissimParams::Delta4 {
                interaction,
                intensity,
                decay,
                locality,
            } => {
                let dist = sq.sqrt();
                if *intensity == 0.0 {
                    return dist;
                }
                let charge = interaction.symmetric_bilinear(s1, s2);
                let sign = if charge > 0.0 {
                    1.0
                } else if charge < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let saturation = -(-decay * charge * charge).exp_m1();
                (1.0 + sign * intensity * saturation * (-locality * dist).exp()) * dist
            }
        }
    }
}

impl Evaluator {
    /// Same as [`Evaluator::eval`] carried in double-double where the family allows.
    pub(crate) fn eval_wide(&self, sq: Wide, s1: &[f64], s2: &[f64]) -> Wide {
        match &self.params {
            DissimParams::Delta1 { interaction, .. } => Wide::new(self.u_total)
                .add(Wide::new(interaction.symmetric_bilinear(s1, s2)))
                .add(sq),
            DissimParams::Delta2 { .. } => sq.scale(self.delta2_factor(sq_euclidean(s1, s2))),
            DissimParams::Delta3 { intensity } => {
                sq.sub(Wide::sq_distance(s1, s2).scale(*intensity))
            }
            DissimParams::Delta4 { .. } => Wide::new(self.eval(sq.value(), s1, s2)),
        }
    }
}

fn check_point(x1: &[f64], s1: &[f64], x2: &[f64], s2: &[f64]) -> Result<()> {
    if x1.len() != x2.len() {
        return Err(Error::DimensionMismatch(format!(
            "unprotected vectors have lengths {} and {}",
            x1.len(),
            x2.len()
        )));
    }
    if s1.len() != s2.len() {
        return Err(Error::DimensionMismatch(format!(
            "protected vectors have lengths {} and {}",
            s1.len(),
            s2.len()
        )));
    }
    if x1
        .iter()
        .chain(x2)
        .chain(s1)
        .chain(s2)
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("point attributes".into()));
    }
    Ok(())
}

fn pointwise(params: &DissimParams, x1: &[f64], s1: &[f64], x2: &[f64], s2: &[f64]) -> Result<f64> {
    check_point(x1, s1, x2, s2)?;
    params.check_dim(s1.len())?;
    Ok(Evaluator::new(params).eval(sq_euclidean(x1, x2), s1, s2))
}

/// Additive perturbation `1'U1 + s₁'Vs₂ + ‖x₁−x₂‖²`.
pub fn delta1(
    x1: &[f64],
    s1: &[f64],
    x2: &[f64],
    s2: &[f64],
    u: &Matrix,
    v: &Matrix,
) -> Result<f64> {
    let params = DissimParams::delta1(u.clone(), v.clone())?;
    pointwise(&params, x1, s1, x2, s2)
}

/// Multiplicative perturbation `(1 + u·e^(−v‖s₁−s₂‖²))·‖x₁−x₂‖²`.
pub fn delta2(x1: &[f64], s1: &[f64], x2: &[f64], s2: &[f64], u: f64, v: f64) -> Result<f64> {
    pointwise(&DissimParams::delta2(u, v)?, x1, s1, x2, s2)
}

/// `‖x₁−x₂‖² − u‖s₁−s₂‖²`; may be negative.
pub fn delta3(x1: &[f64], s1: &[f64], x2: &[f64], s2: &[f64], u: f64) -> Result<f64> {
    pointwise(&DissimParams::delta3(u)?, x1, s1, x2, s2)
}

/// Local perturbation of the (unsquared) Euclidean distance, damped by `e^(−w‖x₁−x₂‖)`.
/// `sign(0)` is taken as 0.
#[allow(clippy::too_many_arguments)]
pub fn delta4(
    x1: &[f64],
    s1: &[f64],
    x2: &[f64],
    s2: &[f64],
    v: &Matrix,
    u: f64,
    decay: f64,
    w: f64,
) -> Result<f64> {
    pointwise(
        &DissimParams::delta4(v.clone(), u, decay, w)?,
        x1,
        s1,
        x2,
        s2,
    )
}

/// Fills a symmetric matrix from an upper-triangle generator, one evaluation
/// per unordered pair.
pub(crate) fn symmetric_from_fn<F>(n: usize, diag: impl Fn(usize) -> f64, f: F) -> Matrix
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let upper = |i: usize| -> Vec<f64> { (i + 1..n).map(|j| f(i, j)).collect() };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(upper).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..n).map(upper).collect();

    let mut m = Matrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        m[(i, i)] = diag(i);
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub(crate) fn assemble<F>(s: &Matrix, params: &DissimParams, sq_dist: F) -> Result<DissimMatrix>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    params.check_dim(s.cols())?;
    let eval = Evaluator::new(params);
    let values = symmetric_from_fn(
        s.rows(),
        |i| eval.eval(0.0, s.row(i), s.row(i)),
        |i, j| eval.eval(sq_dist(i, j), s.row(i), s.row(j)),
    );
    if values.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dissimilarity values".into()));
    }
    Ok(DissimMatrix {
        values,
        shift: 0.0,
        sqrt_applied: false,
        params: Some(params.clone()),
    })
}

/// Pairwise dissimilarities of a dataset under `params`.
pub fn dissim_matrix(data: &Dataset, params: &DissimParams) -> Result<DissimMatrix> {
    let x = data.x();
    assemble(data.s(), params, |i, j| sq_euclidean(x.row(i), x.row(j)))
}

/// Dissimilarities where `‖x₁−x₂‖` is replaced by a precomputed base distance
/// (geodesic, kernel-induced, ...). `base` holds distances, not squares.
pub fn dissim_from_distances(
    base: &Matrix,
    s: &Matrix,
    params: &DissimParams,
) -> Result<DissimMatrix> {
    if !base.is_square() || base.rows() != s.rows() {
        return Err(Error::DimensionMismatch(format!(
            "base distances are {}x{} for {} records",
            base.rows(),
            base.cols(),
            s.rows()
        )));
    }
    assemble(s, params, |i, j| {
        let d = base[(i, j)];
        d * d
    })
}

/// Plain Euclidean distances between rows of `x`.
pub fn euclidean_matrix(x: &Matrix) -> DissimMatrix {
    let values = symmetric_from_fn(
        x.rows(),
        |_| 0.0,
        |i, j| sq_euclidean(x.row(i), x.row(j)).sqrt(),
    );
    DissimMatrix {
        values,
        shift: 0.0,
        sqrt_applied: false,
        params: None,
    }
}

/// Default positivity margin: `1e-8·(max − min)` over off-diagonal entries,
/// never below `1e-12`.
pub fn default_epsilon(m: &DissimMatrix) -> f64 {
    match m.off_diagonal_range() {
        Some((lo, hi)) => (1e-8 * (hi - lo)).max(1e-12),
        None => 1e-12,
    }
}

/// Shifts off-diagonal entries to be positive when needed, then takes square
/// roots for the squared-scale families.
///
/// The shift `|min Δ| + ε` is applied when the smallest off-diagonal entry is
/// `<= 0`. The diagonal is reset to 0.
pub fn prepare_for_mds(m: &DissimMatrix, epsilon: Option<f64>) -> Result<DissimMatrix> {
    let eps = match epsilon {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => return Err(invalid_param(format!("epsilon must be > 0, got {e}"))),
        None => default_epsilon(m),
    };
    let n = m.n();
    let mut shift = 0.0;
    if let Some((lo, _)) = m.off_diagonal_range() {
        if lo <= 0.0 {
            shift = lo.abs() + eps;
        }
    }
    let root = m.family().is_some_and(Family::is_squared) && !m.sqrt_applied;
    let mut values = m.values.clone();
    for i in 0..n {
        values[(i, i)] = 0.0;
        for j in i + 1..n {
            let mut v = values[(i, j)] + shift;
            if root {
                v = v.sqrt();
            }
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(DissimMatrix {
        values,
        shift: m.shift + shift,
        sqrt_applied: m.sqrt_applied || root,
        params: m.params.clone(),
    })
}
