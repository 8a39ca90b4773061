//! Grid search over dissimilarity parameters: for each clustering method,
//! the cell with the lowest unfairness among those whose average silhouette
//! (on the unperturbed distances) reaches a floor.

use std::fmt;
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissim::{self, DissimMatrix};
use crate::embed::{classical_mds, Embedding};
use crate::error::{invalid_param, Error, Result};
use crate::flatcluster::{kmeans, kmedoids, DEFAULT_RESTARTS};
use crate::hier::{self, Dendrogram, Linkage};
use crate::kernelize::{kernel_dissim_matrix, kernel_distance_matrix, KernelSpec};
use crate::matrix::Matrix;
use crate::metrics::{silhouette, unfairness};
use crate::types::{Dataset, DissimParams, Family, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    KmeansMds,
    KmedoidsMds,
    Complete,
    Average,
    Single,
    ChargedWard,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::KmeansMds,
        Method::KmedoidsMds,
        Method::Complete,
        Method::Average,
        Method::Single,
        Method::ChargedWard,
    ];

    pub fn needs_embedding(self) -> bool {
        matches!(self, Method::KmeansMds | Method::KmedoidsMds)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::KmeansMds => "kmeans_mds",
            Method::KmedoidsMds => "kmedoids_mds",
            Method::Complete => "complete",
            Method::Average => "average",
            Method::Single => "single",
            Method::ChargedWard => "charged_ward",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| invalid_param(format!("unknown method {s:?}")))
    }
}

/// How a single cell is run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneOptions {
    /// Embedding dimension for the MDS methods.
    pub d_prime: usize,
    pub restarts: usize,
    /// Positivity margin before MDS; `None` picks it from the data.
    pub epsilon: Option<f64>,
    /// Replace Euclidean distances on the unprotected attributes by a kernel distance.
    pub kernel: Option<KernelSpec>,
    /// Replace them by caller-supplied distances (e.g. geodesic).
    pub base_distances: Option<Matrix>,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            d_prime: 2,
            restarts: DEFAULT_RESTARTS,
            epsilon: None,
            kernel: None,
            base_distances: None,
        }
    }
}

impl TuneOptions {
    fn validate(&self, n: usize) -> Result<()> {
        if self.kernel.is_some() && self.base_distances.is_some() {
            return Err(invalid_param(
                "give either a kernel or base distances, not both",
            ));
        }
        if let Some(k) = &self.kernel {
            k.validate()?;
        }
        if let Some(b) = &self.base_distances {
            if !b.is_square() || b.rows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "base distances are {}x{} for {n} records",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        Ok(())
    }
}

/// The unperturbed distances `D` used for silhouettes.
pub fn base_distances(data: &Dataset, opts: &TuneOptions) -> Result<Matrix> {
    opts.validate(data.len())?;
    Ok(match (&opts.kernel, &opts.base_distances) {
        (Some(k), _) => kernel_distance_matrix(data.x(), k)?,
        (_, Some(b)) => b.clone(),
        _ => dissim::euclidean_matrix(data.x()).values().clone(),
    })
}

/// The perturbed dissimilarity matrix for `params` under the options' base distance.
pub fn perturbed(
    data: &Dataset,
    params: &DissimParams,
    opts: &TuneOptions,
) -> Result<DissimMatrix> {
    opts.validate(data.len())?;
    match (&opts.kernel, &opts.base_distances) {
        (Some(k), _) => kernel_dissim_matrix(data, params, k),
        (_, Some(b)) => dissim::dissim_from_distances(b, data.s(), params),
        _ => dissim::dissim_matrix(data, params),
    }
}

/// Output of one clustering run.
#[derive(Clone, Debug)]
pub struct Clustering {
    /// With class proportions attached.
    pub partition: Partition,
    pub embedding: Option<Embedding>,
    pub dendrogram: Option<Dendrogram>,
}

/// Runs one method with one parameter set.
pub fn cluster(
    data: &Dataset,
    method: Method,
    params: &DissimParams,
    k: usize,
    seed: u64,
    opts: &TuneOptions,
) -> Result<Clustering> {
    let counts = data.class_counts()?;
    let (partition, embedding, dendrogram) = match method {
        Method::KmeansMds | Method::KmedoidsMds => {
            let delta = dissim::prepare_for_mds(&perturbed(data, params, opts)?, opts.epsilon)?;
            let emb = classical_mds(&delta, opts.d_prime.min(data.len() - 1))?;
            let partition = if method == Method::KmeansMds {
                kmeans(&emb.coords, k, opts.restarts, seed)?.partition
            } else {
                kmedoids(&emb.coords, k, seed)?.partition
            };
            (partition, Some(emb), None)
        }
        Method::ChargedWard => {
            if opts.kernel.is_some() || opts.base_distances.is_some() {
                return Err(invalid_param(
                    "charged_ward works on attribute means and needs Euclidean base distances",
                ));
            }
            let dend = hier::charged_ward(data, params)?;
            (hier::cut(&dend, k)?, None, Some(dend))
        }
        Method::Complete | Method::Average | Method::Single => {
            let link = match method {
                Method::Complete => Linkage::Complete,
                Method::Average => Linkage::Average,
                _ => Linkage::Single,
            };
            let dend = hier::linkage(&perturbed(data, params, opts)?, link)?;
            (hier::cut(&dend, k)?, None, Some(dend))
        }
    };
    Ok(Clustering {
        partition: partition.with_classes(&counts)?,
        embedding,
        dendrogram,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub method: Method,
    /// Position in the parameter grid.
    pub index: usize,
    pub params: DissimParams,
    pub k: usize,
    /// NaN when the cell failed.
    pub unfairness: f64,
    /// Against the unperturbed distances; NaN when the cell failed.
    pub avg_silhouette: f64,
    pub seed: u64,
    pub feasible: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub best: Option<GridCell>,
    /// Every cell in grid order.
    pub curve: Vec<GridCell>,
    pub infeasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub family: Family,
    pub k: usize,
    pub tau: f64,
    pub seed: u64,
    pub methods: Vec<MethodResult>,
}

/// Index of the lowest unfairness among cells with silhouette `>= tau`.
/// Ties go to the lowest index; cells with a NaN are never feasible.
pub fn select_best(cells: &[(f64, f64)], tau: f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &(u, s)) in cells.iter().enumerate() {
        if u.is_nan() || s.is_nan() || s < tau {
            continue;
        }
        if best.is_none_or(|b| u < cells[b].0) {
            best = Some(i);
        }
    }
    best
}

/// Evaluates every method on every grid cell and selects per method.
#[allow(clippy::too_many_arguments)]
pub fn tune(
    data: &Dataset,
    methods: &[Method],
    family: Family,
    grid: &[DissimParams],
    k: usize,
    tau: f64,
    seed: u64,
    opts: &TuneOptions,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(invalid_param("empty parameter grid"));
    }
    if methods.is_empty() {
        return Err(invalid_param("no clustering method selected"));
    }
    if !(-1.0..=1.0).contains(&tau) {
        return Err(invalid_param(format!("tau = {tau} outside [-1, 1]")));
    }
    if k < 2 || k > data.len() {
        return Err(invalid_param(format!("k = {k} outside 2..={}", data.len())));
    }
    for (i, p) in grid.iter().enumerate() {
        if p.family() != family {
            return Err(invalid_param(format!(
                "grid cell {i} is {} but the grid family is {family}",
                p.family()
            )));
        }
        p.validate()?;
        p.check_dim(data.s_dim())?;
    }
    let d = base_distances(data, opts)?;
    let counts = data.class_counts()?;

    let jobs: Vec<(Method, usize)> = methods
        .iter()
        .flat_map(|&m| (0..grid.len()).map(move |i| (m, i)))
        .collect();
    let run = |&(method, index): &(Method, usize)| -> GridCell {
        let params = &grid[index];
        let outcome = cluster(data, method, params, k, seed, opts).and_then(|c| {
            let u = unfairness(&c.partition, &counts)?;
            let s = silhouette(&d, &c.partition, None)?.average;
            Ok((u, s))
        });
        let (unf, sil, error) = match outcome {
            Ok((u, s)) => (u, s, None),
            Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
        };
        GridCell {
            method,
            index,
            params: params.clone(),
            k,
            unfairness: unf,
            avg_silhouette: sil,
            seed,
            feasible: error.is_none() && sil >= tau,
            error,
        }
    };
    #[cfg(feature = "parallel")]
    let cells: Vec<GridCell> = jobs.par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let cells: Vec<GridCell> = jobs.iter().map(run).collect();

    let methods = cells
        .chunks(grid.len())
        .map(|curve| {
            let table: Vec<(f64, f64)> = curve
                .iter()
                .map(|c| (c.unfairness, c.avg_silhouette))
                .collect();
            let best = select_best(&table, tau).map(|i| curve[i].clone());
            MethodResult {
                method: curve[0].method,
                infeasible: best.is_none(),
                best,
                curve: curve.to_vec(),
            }
        })
        .collect();
    Ok(TuneResult {
        family,
        k,
        tau,
        seed,
        methods,
    })
}
