//! Domain types shared by every stage of the pipeline.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::matrix::Matrix;

/// `n` records of unprotected attributes `x` (n×d) and protected attributes `s` (n×p).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
    s: Matrix,
    ids: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Matrix, s: Matrix) -> Result<Self> {
        Self::with_ids(x, s, None)
    }

    pub fn with_ids(x: Matrix, s: Matrix, ids: Option<Vec<String>>) -> Result<Self> {
        if x.rows() == 0 {
            return Err(invalid_input("dataset has no records"));
        }
        if x.cols() == 0 || s.cols() == 0 {
            return Err(invalid_input(
                "dataset needs at least one unprotected and one protected column",
            ));
        }
        if x.rows() != s.rows() {
            return Err(Error::DimensionMismatch(format!(
                "x has {} rows but s has {}",
                x.rows(),
                s.rows()
            )));
        }
        if !x.all_finite() {
            return Err(Error::NonFinite("unprotected attributes".into()));
        }
        if !s.all_finite() {
            return Err(Error::NonFinite("protected attributes".into()));
        }
        if let Some(ids) = &ids {
            if ids.len() != x.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "{} ids for {} records",
                    ids.len(),
                    x.rows()
                )));
            }
        }
        Ok(Dataset { x, s, ids })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    /// Unprotected dimension `d`.
    pub fn x_dim(&self) -> usize {
        self.x.cols()
    }

    /// Protected dimension `p`.
    pub fn s_dim(&self) -> usize {
        self.s.cols()
    }

    /// Per-record class weights (n×q) used for proportions and fairness metrics.
    ///
    /// A single ±1 column expands to two columns (`+1` first). Non-negative
    /// codifications (one-hot, counts) are used as they are.
    pub fn class_counts(&self) -> Result<Matrix> {
        let s = &self.s;
        if s.cols() == 1 && s.as_slice().iter().all(|&v| v == 1.0 || v == -1.0) {
            return Ok(Matrix::from_fn(s.rows(), 2, |i, j| {
                let positive = s[(i, 0)] == 1.0;
                if (j == 0) == positive {
                    1.0
                } else {
                    0.0
                }
            }));
        }
        if s.as_slice().iter().any(|&v| v < 0.0) {
            return Err(invalid_input(
                "protected attributes are neither ±1 nor non-negative class weights",
            ));
        }
        Ok(s.clone())
    }

    /// Dominant class of every record (column index into [`Dataset::class_counts`]).
    pub fn class_labels(&self) -> Result<Vec<usize>> {
        let counts = self.class_counts()?;
        Ok(counts
            .iter_rows()
            .map(|row| {
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Binary classes as ±1.
    Signed,
    /// `q` classes as the `q` standard basis vectors.
    OneHot,
    /// Raw non-negative integer counts.
    Counts,
    /// Real values passed through.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codification {
    pub scheme: Scheme,
    /// Declared category list. When absent, categories are the observed values
    /// in lexicographic order.
    #[serde(default)]
    pub categories: Option<Vec<String>>,
}

impl Codification {
    pub fn new(scheme: Scheme) -> Self {
        Codification {
            scheme,
            categories: None,
        }
    }

    pub fn with_categories(scheme: Scheme, categories: Vec<String>) -> Self {
        Codification {
            scheme,
            categories: Some(categories),
        }
    }

    pub fn q(&self) -> Option<usize> {
        match self.scheme {
            Scheme::Signed => Some(2),
            _ => self.categories.as_ref().map(Vec::len),
        }
    }
}

/// Encoded protected attributes together with the category order used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassEncoding {
    pub matrix: Matrix,
    /// Column (one-hot) or sign (signed: index 0 is `+1`) order of categories.
    /// Empty for counts and raw schemes.
    pub categories: Vec<String>,
}

/// Encodes a categorical column according to `codification`.
pub fn encode_classes<S: AsRef<str>>(
    labels: &[S],
    codification: &Codification,
) -> Result<ClassEncoding> {
    if labels.is_empty() {
        return Err(invalid_input("no class labels"));
    }
    match codification.scheme {
        Scheme::Signed | Scheme::OneHot => {
            let categories = resolve_categories(labels, codification)?;
            let index = |label: &str| -> Result<usize> {
                categories
                    .iter()
                    .position(|c| c == label)
                    .ok_or_else(|| Error::UnknownCategory(label.to_string()))
            };
            let matrix = if codification.scheme == Scheme::Signed {
                if categories.len() != 2 {
                    return Err(invalid_param(format!(
                        "signed codification needs exactly 2 categories, found {}",
                        categories.len()
                    )));
                }
                let mut data = Vec::with_capacity(labels.len());
                for l in labels {
                    data.push(if index(l.as_ref())? == 0 { 1.0 } else { -1.0 });
                }
                Matrix::from_vec(labels.len(), 1, data)?
            } else {
                let q = categories.len();
                let mut m = Matrix::zeros(labels.len(), q);
                for (i, l) in labels.iter().enumerate() {
                    m[(i, index(l.as_ref())?)] = 1.0;
                }
                m
            };
            Ok(ClassEncoding { matrix, categories })
        }
        Scheme::Counts | Scheme::Raw => {
            let mut data = Vec::with_capacity(labels.len());
            for l in labels {
                let l = l.as_ref().trim();
                let v: f64 = l
                    .parse()
                    .map_err(|_| invalid_input(format!("`{l}` is not numeric")))?;
                data.push(v);
            }
            let matrix = Matrix::from_vec(labels.len(), 1, data)?;
            if codification.scheme == Scheme::Counts {
                validate_counts(&matrix)?;
            } else if !matrix.all_finite() {
                return Err(Error::NonFinite("raw protected values".into()));
            }
            Ok(ClassEncoding {
                matrix,
                categories: Vec::new(),
            })
        }
    }
}

fn resolve_categories<S: AsRef<str>>(
    labels: &[S],
    codification: &Codification,
) -> Result<Vec<String>> {
    match &codification.categories {
        Some(declared) => {
            let unique: BTreeSet<&String> = declared.iter().collect();
            if unique.len() != declared.len() {
                return Err(invalid_param("duplicate declared categories"));
            }
            Ok(declared.clone())
        }
        None => Ok(labels
            .iter()
            .map(|l| l.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()),
    }
}

/// Checks that every entry is a non-negative integer.
pub fn validate_counts(m: &Matrix) -> Result<()> {
    for (i, row) in m.iter_rows().enumerate() {
        for &v in row {
            if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0) {
                return Err(invalid_input(format!(
                    "row {i}: count {v} is not a non-negative integer"
                )));
            }
        }
    }
    Ok(())
}

/// Class-pair interaction pattern scaled by a positive intensity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    v_tilde: Matrix,
    v0: f64,
}

impl InteractionMatrix {
    /// Arbitrary real pattern (any square matrix) with intensity `v0`.
    pub fn raw(v_tilde: Matrix, v0: f64) -> Result<Self> {
        if !v_tilde.is_square() {
            return Err(Error::DimensionMismatch(
                "interaction matrix must be square".into(),
            ));
        }
        if !v_tilde.all_finite() {
            return Err(Error::NonFinite("interaction matrix".into()));
        }
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(invalid_param(format!("intensity v0 must be > 0, got {v0}")));
        }
        Ok(InteractionMatrix { v_tilde, v0 })
    }

    pub fn pattern(&self) -> &Matrix {
        &self.v_tilde
    }

    pub fn intensity(&self) -> f64 {
        self.v0
    }

    /// `v0 · Ṽ`.
    pub fn matrix(&self) -> Matrix {
        self.v_tilde.scaled(self.v0)
    }
}

/// Builds `V = v0·Ṽ` from a pattern of −1 (attraction), 0 (none) and +1 (repulsion).
pub fn build_interaction(v_tilde: Matrix, v0: f64) -> Result<InteractionMatrix> {
    if let Some(bad) = v_tilde
        .as_slice()
        .iter()
        .find(|&&v| v != -1.0 && v != 0.0 && v != 1.0)
    {
        return Err(invalid_param(format!(
            "interaction pattern entries must be -1, 0 or 1, found {bad}"
        )));
    }
    InteractionMatrix::raw(v_tilde, v0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Delta1,
    Delta2,
    Delta3,
    Delta4,
}

impl Family {
    /// Families whose values live on the squared-distance scale.
    pub fn is_squared(self) -> bool {
        !matches!(self, Family::Delta4)
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Family::Delta1 => "delta1",
            Family::Delta2 => "delta2",
            Family::Delta3 => "delta3",
            Family::Delta4 => "delta4",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta1" => Ok(Family::Delta1),
            "delta2" => Ok(Family::Delta2),
            "delta3" => Ok(Family::Delta3),
            "delta4" => Ok(Family::Delta4),
            other => Err(invalid_param(format!("unknown family `{other}`"))),
        }
    }
}

/// Attraction-repulsion dissimilarity family with its free parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DissimParams {
    /// `1'U1 + s₁'Vs₂ + ‖x₁−x₂‖²`.
    Delta1 { shift: Matrix, interaction: Matrix },
    /// `(1 + u·exp(−v‖s₁−s₂‖²))·‖x₁−x₂‖²`.
    Delta2 { intensity: f64, decay: f64 },
    /// `‖x₁−x₂‖² − u‖s₁−s₂‖²`.
    Delta3 { intensity: f64 },
    /// Local multiplicative perturbation of `‖x₁−x₂‖`.
    Delta4 {
        interaction: Matrix,
        intensity: f64,
        decay: f64,
        locality: f64,
    },
}

impl DissimParams {
    pub fn delta1(shift: Matrix, interaction: Matrix) -> Result<Self> {
        let p = DissimParams::Delta1 { shift, interaction };
        p.validate()?;
        Ok(p)
    }

    pub fn delta2(intensity: f64, decay: f64) -> Result<Self> {
        let p = DissimParams::Delta2 { intensity, decay };
        p.validate()?;
        Ok(p)
    }

    pub fn delta3(intensity: f64) -> Result<Self> {
        let p = DissimParams::Delta3 { intensity };
        p.validate()?;
        Ok(p)
    }

    pub fn delta4(interaction: Matrix, intensity: f64, decay: f64, locality: f64) -> Result<Self> {
        let p = DissimParams::Delta4 {
            interaction,
            intensity,
            decay,
            locality,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters under which the family reduces to the plain (squared) distance.
    pub fn unperturbed(family: Family, p: usize) -> Self {
        match family {
            Family::Delta1 => DissimParams::Delta1 {
                shift: Matrix::zeros(p, p),
                interaction: Matrix::zeros(p, p),
            },
            Family::Delta2 => DissimParams::Delta2 {
                intensity: 0.0,
                decay: 0.0,
            },
            Family::Delta3 => DissimParams::Delta3 { intensity: 0.0 },
            Family::Delta4 => DissimParams::Delta4 {
                interaction: Matrix::zeros(p, p),
                intensity: 0.0,
                decay: 0.0,
                locality: 0.0,
            },
        }
    }

    pub fn family(&self) -> Family {
        match self {
            DissimParams::Delta1 { .. } => Family::Delta1,
            DissimParams::Delta2 { .. } => Family::Delta2,
            DissimParams::Delta3 { .. } => Family::Delta3,
            DissimParams::Delta4 { .. } => Family::Delta4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid_param(format!(
                    "{name} must be finite and >= 0, got {v}"
                )))
            }
        };
        let sym = |name: &str, m: &Matrix| {
            if !m.all_finite() {
                Err(Error::NonFinite(name.to_string()))
            } else if !m.is_symmetric() {
                Err(invalid_param(format!(
                    "{name} must be a symmetric square matrix"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            DissimParams::Delta1 { shift, interaction } => {
                sym("U", shift)?;
                sym("V", interaction)?;
                if shift.rows() != interaction.rows() {
                    return Err(Error::DimensionMismatch("U and V sizes differ".into()));
                }
                Ok(())
            }
            DissimParams::Delta2 { intensity, decay } => {
                nonneg("u", *intensity)?;
                nonneg("v", *decay)
            }
            DissimParams::Delta3 { intensity } => nonneg("u", *intensity),
            DissimParams::Delta4 {
                interaction,
                intensity,
                decay,
                locality,
            } => {
                sym("V", interaction)?;
                if !(0.0..=1.0).contains(intensity) {
                    return Err(invalid_param(format!(
                        "u must lie in [0, 1], got {intensity}"
                    )));
                }
                nonneg("v", *decay)?;
                nonneg("w", *locality)
            }
        }
    }

    /// Validates and checks the protected dimension against the matrices.
    pub fn check_dim(&self, p: usize) -> Result<()> {
        self.validate()?;
        let m = match self {
            DissimParams::Delta1 { interaction, .. } | DissimParams::Delta4 { interaction, .. } => {
                interaction
            }
            _ => return Ok(()),
        };
        if m.rows() != p {
            return Err(Error::DimensionMismatch(format!(
                "interaction matrix is {0}x{0} but protected dimension is {p}",
                m.rows()
            )));
        }
        Ok(())
    }
}

/// Cluster labels for `n` points, with per-cluster class proportions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
    proportions: Matrix,
}

impl Partition {
    /// Labels must use every index in `0..K` at least once.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid_input("empty partition"));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(invalid_input(format!("cluster {missing} has no members")));
        }
        Ok(Partition {
            labels,
            k,
            proportions: Matrix::zeros(k, 0),
        })
    }

    /// Relabels arbitrary cluster ids to `0..K` in order of first appearance.
    pub fn from_raw_labels(raw: &[usize]) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self::new(labels)
    }

    /// Attaches per-cluster proportions computed from n×q class weights
    /// (each cluster row normalized by its total weight).
    pub fn with_classes(mut self, class_counts: &Matrix) -> Result<Self> {
        if class_counts.rows() != self.labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} class rows for {} labels",
                class_counts.rows(),
                self.labels.len()
            )));
        }
        self.proportions = cluster_proportions(&self.labels, self.k, class_counts);
        Ok(self)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// K×q proportions; zero columns until [`Partition::with_classes`] is called.
    pub fn proportions(&self) -> &Matrix {
        &self.proportions
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

pub(crate) fn cluster_proportions(labels: &[usize], k: usize, counts: &Matrix) -> Matrix {
    let q = counts.cols();
    let mut sums = Matrix::zeros(k, q);
    for (i, &l) in labels.iter().enumerate() {
        for (acc, &c) in sums.row_mut(l).iter_mut().zip(counts.row(i)) {
            *acc += c;
        }
    }
    for c in 0..k {
        let row = sums.row_mut(c);
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    sums
}
