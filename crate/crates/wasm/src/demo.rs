//! The computations behind the page. Plain Rust so they can be tested natively;
//! every entry point returns a JSON string.

use arclust::dissim;
use arclust::metrics::{balance, silhouette, unfairness};
use arclust::plot::{scatter_svg, PlotOptions};
use arclust::synth::four_gaussians;
use arclust::tune::{cluster, Method, TuneOptions};
use arclust::{Dataset, DissimParams, Family, Matrix};
use serde::Serialize;

/// Knobs shared by every demo call. Unused ones are ignored by the family.
#[derive(Clone, Copy, Debug)]
pub struct Knobs {
    pub intensity: f64,
    pub decay: f64,
    pub locality: f64,
}

pub fn params(family: &str, knobs: Knobs) -> Result<DissimParams, String> {
    let family: Family = family.parse().map_err(|e: arclust::Error| e.to_string())?;
    let one = |v: f64| Matrix::from_rows(&[[v]]).expect("1x1");
    let p = match family {
        // Signed classes: V = u gives repulsion within a class, attraction across.
        Family::Delta1 => DissimParams::delta1(one(0.0), one(knobs.intensity)),
        Family::Delta2 => DissimParams::delta2(knobs.intensity, knobs.decay),
        Family::Delta3 => DissimParams::delta3(knobs.intensity),
        Family::Delta4 => {
            DissimParams::delta4(one(1.0), knobs.intensity, knobs.decay, knobs.locality)
        }
    };
    p.map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct Run {
    pub unfairness: f64,
    pub avg_silhouette: f64,
    pub balance: f64,
    /// Share of class S = +1 in each cluster.
    pub positive_share: Vec<f64>,
    pub sizes: Vec<usize>,
    pub coords: Vec<[f64; 2]>,
    pub clusters: Vec<usize>,
    pub classes: Vec<usize>,
    pub svg: String,
}

const RESTARTS: usize = 10;

fn run_once(
    data: &Dataset,
    d: &Matrix,
    params: &DissimParams,
    k: usize,
    seed: u64,
) -> Result<Run, String> {
    let opts = TuneOptions {
        restarts: RESTARTS,
        ..TuneOptions::default()
    };
    let err = |e: arclust::Error| e.to_string();
    let res = cluster(data, Method::KmeansMds, params, k, seed, &opts).map_err(err)?;
    let classes = data.class_labels().map_err(err)?;
    let emb = res.embedding.expect("MDS method");
    let points = if emb.dim() == 2 {
        emb.coords
    } else {
        // Degenerate spectrum: pad with a zero column so the plot still works.
        Matrix::from_fn(emb.coords.rows(), 2, |i, j| {
            if j < emb.dim() {
                emb.coords[(i, j)]
            } else {
                0.0
            }
        })
    };
    let opts = PlotOptions {
        class_names: vec!["S = +1".into(), "S = -1".into()],
        x_label: "MDS 1".into(),
        y_label: "MDS 2".into(),
        ..PlotOptions::default()
    };
    let svg = scatter_svg(&points, res.partition.labels(), &classes, &opts).map_err(err)?;
    Ok(Run {
        unfairness: unfairness(&res.partition, &data.class_counts().map_err(err)?).map_err(err)?,
        avg_silhouette: silhouette(d, &res.partition, None).map_err(err)?.average,
        balance: balance(&res.partition, &classes).map_err(err)?,
        positive_share: res.partition.proportions().column(0),
        sizes: res.partition.sizes(),
        coords: points.iter_rows().map(|r| [r[0], r[1]]).collect(),
        clusters: res.partition.labels().to_vec(),
        classes,
        svg,
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Four-Gaussian data, one perturbation, k-means on the MDS embedding.
pub fn gaussian_run(seed: u64, family: &str, knobs: Knobs, k: usize) -> Result<String, String> {
    let data = four_gaussians(seed);
    let d = dissim::euclidean_matrix(data.x()).values().clone();
    to_json(&run_once(&data, &d, &params(family, knobs)?, k, seed)?)
}

#[derive(Serialize)]
pub struct SweepPoint {
    pub intensity: f64,
    pub unfairness: f64,
    pub avg_silhouette: f64,
    pub balance: f64,
}

/// `steps` evenly spaced intensities from 0 to `max_intensity`.
pub fn intensity_sweep(
    seed: u64,
    family: &str,
    knobs: Knobs,
    max_intensity: f64,
    steps: usize,
    k: usize,
) -> Result<String, String> {
    if !(2..=200).contains(&steps) {
        return Err(format!("steps must be in 2..=200, got {steps}"));
    }
    let data = four_gaussians(seed);
    let d = dissim::euclidean_matrix(data.x()).values().clone();
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let intensity = max_intensity * i as f64 / (steps - 1) as f64;
        let p = params(family, Knobs { intensity, ..knobs })?;
        let r = run_once(&data, &d, &p, k, seed)?;
        out.push(SweepPoint {
            intensity,
            unfairness: r.unfairness,
            avg_silhouette: r.avg_silhouette,
            balance: r.balance,
        });
    }
    to_json(&out)
}

#[derive(Serialize)]
pub struct PairCurve {
    pub distance: Vec<f64>,
    pub same_class: Vec<f64>,
    pub other_class: Vec<f64>,
    /// Plain distance on the family's scale (squared for delta1..delta3).
    pub unperturbed: Vec<f64>,
}

/// Dissimilarity of two points at growing distance, for equal and opposite classes.
pub fn pair_curve(
    family: &str,
    knobs: Knobs,
    max_distance: f64,
    steps: usize,
) -> Result<String, String> {
    if !(2..=2000).contains(&steps) {
        return Err(format!("steps must be in 2..=2000, got {steps}"));
    }
    if !(max_distance > 0.0 && max_distance.is_finite()) {
        return Err("max distance must be positive".into());
    }
    let p = params(family, knobs)?;
    let squared = p.family().is_squared();
    let x = Matrix::from_fn(steps + 1, 1, |i, _| {
        if i == 0 {
            0.0
        } else {
            max_distance * (i - 1) as f64 / (steps - 1) as f64
        }
    });
    let curve = |sign: f64| -> Result<Vec<f64>, String> {
        let s = Matrix::from_fn(steps + 1, 1, |i, _| if i == 0 { 1.0 } else { sign });
        let data = Dataset::new(x.clone(), s).map_err(|e| e.to_string())?;
        let m = dissim::dissim_matrix(&data, &p).map_err(|e| e.to_string())?;
        Ok((1..=steps).map(|i| m.get(0, i)).collect())
    };
    let distance: Vec<f64> = (1..=steps).map(|i| x[(i, 0)]).collect();
    let unperturbed = distance
        .iter()
        .map(|&t| if squared { t * t } else { t })
        .collect();
    to_json(&PairCurve {
        same_class: curve(1.0)?,
        other_class: curve(-1.0)?,
        distance,
        unperturbed,
    })
}
