//! Partitional clustering on embedded coordinates.
//!
//! `kmeans` is Lloyd's algorithm from k-means++ seeds, best of several
//! restarts. `kmedoids` is PAM (BUILD then SWAP) and plays the role of
//! k-median: medoids are data points and the objective is the sum of Euclidean
//! distances to the nearest medoid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::matrix::{euclidean, sq_euclidean, Matrix};
use crate::types::Partition;

pub const MAX_ITERATIONS: usize = 300;
pub const DEFAULT_RESTARTS: usize = 20;

/// Identifies the random generator behind every seeded result: ChaCha with
/// 8 rounds, seeded by `seed_from_u64(seed)`, one stream per restart.
pub const RNG_NAME: &str = "chacha8-v1";

/// Generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub partition: Partition,
    pub centers: Matrix,
    pub within_ss: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Restart that produced this result.
    pub restart: usize,
    /// Objective after every centre update of the winning run.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMedoidsResult {
    pub partition: Partition,
    /// Row indices of the medoids; cluster `c` is the one around `medoids[c]`.
    pub medoids: Vec<usize>,
    /// Sum of distances to the nearest medoid.
    pub objective: f64,
    pub swaps: usize,
    pub seed: u64,
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(invalid_param(format!("k = {k} outside 2..={n}")));
    }
    Ok(())
}

fn check_coords(coords: &Matrix) -> Result<()> {
    if coords.rows() == 0 || coords.cols() == 0 {
        return Err(invalid_input("no coordinates to cluster"));
    }
    if !coords.all_finite() {
        return Err(Error::NonFinite("coordinates".into()));
    }
    Ok(())
}

/// Best of `restarts` Lloyd runs from k-means++ seeds, by within-cluster sum of squares.
pub fn kmeans(coords: &Matrix, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    check_coords(coords)?;
    check_k(coords.rows(), k)?;
    if restarts == 0 {
        return Err(invalid_param("restarts must be >= 1"));
    }
    let run = |r: usize| {
        let mut rng = rng_for(seed, r as u64);
        let centers = plus_plus(coords, k, &mut rng);
        let mut fit = lloyd(coords, centers);
        fit.restart = r;
        fit
    };
    #[cfg(feature = "parallel")]
    let fits: Vec<Lloyd> = (0..restarts).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let fits: Vec<Lloyd> = (0..restarts).map(run).collect();

    let best = fits
        .into_iter()
        .reduce(|best, f| {
            if f.within_ss < best.within_ss {
                f
            } else {
                best
            }
        })
        .expect("at least one restart");
    best.into_result(seed)
}

/// Lloyd iterations from explicit initial centres.
pub fn kmeans_from_centers(coords: &Matrix, centers: &Matrix) -> Result<KMeansResult> {
    check_coords(coords)?;
    check_k(coords.rows(), centers.rows())?;
    if centers.cols() != coords.cols() {
        return Err(Error::DimensionMismatch(
            "centres and coordinates differ in dimension".into(),
        ));
    }
    lloyd(coords, centers.clone()).into_result(0)
}

struct Lloyd {
    labels: Vec<usize>,
    centers: Matrix,
    within_ss: f64,
    iterations: usize,
    restart: usize,
    trace: Vec<f64>,
}

impl Lloyd {
    fn into_result(self, seed: u64) -> Result<KMeansResult> {
        Ok(KMeansResult {
            partition: Partition::new(self.labels)?,
            centers: self.centers,
            within_ss: self.within_ss,
            iterations: self.iterations,
            seed,
            restart: self.restart,
            trace: self.trace,
        })
    }
}

fn plus_plus(coords: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = coords.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut dist: Vec<f64> = (0..n)
        .map(|i| sq_euclidean(coords.row(i), coords.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            while dist[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(sq_euclidean(coords.row(i), coords.row(next)));
        }
    }
    coords.select_rows(&chosen)
}

fn assign(coords: &Matrix, centers: &Matrix, labels: &mut [usize]) {
    for (i, label) in labels.iter_mut().enumerate() {
        let row = coords.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..centers.rows() {
            let d = sq_euclidean(row, centers.row(c));
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        *label = best;
    }
}

/// Means of the current clusters. An empty cluster takes over the point
/// farthest from its own centre (among clusters with more than one member).
fn update_centers(coords: &Matrix, labels: &mut [usize], centers: &mut Matrix) {
    let (n, k, d) = (coords.rows(), centers.rows(), coords.cols());
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for i in 0..n {
            if counts[labels[i]] > 1 {
                let dist = sq_euclidean(coords.row(i), centers.row(labels[i]));
                if dist > far_d {
                    far = Some(i);
                    far_d = dist;
                }
            }
        }
        let far = far.expect("k <= n leaves a cluster with two members");
        labels[far] = empty;
        centers.row_mut(empty).copy_from_slice(coords.row(far));
    }
    let mut sums = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for i in 0..n {
        counts[labels[i]] += 1;
        for (acc, &v) in sums.row_mut(labels[i]).iter_mut().zip(coords.row(i)) {
            *acc += v;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        let inv = 1.0 / count as f64;
        for (dst, &s) in centers.row_mut(c).iter_mut().zip(sums.row(c)) {
            *dst = s * inv;
        }
    }
}

fn objective(coords: &Matrix, centers: &Matrix, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_euclidean(coords.row(i), centers.row(l)))
        .sum()
}

fn lloyd(coords: &Matrix, mut centers: Matrix) -> Lloyd {
    let mut labels = vec![0; coords.rows()];
    assign(coords, &centers, &mut labels);
    let mut next = labels.clone();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        update_centers(coords, &mut labels, &mut centers);
        trace.push(objective(coords, &centers, &labels));
        assign(coords, &centers, &mut next);
        if next == labels {
            break;
        }
        labels.copy_from_slice(&next);
    }
    // A run cut off at the iteration cap may have just emptied a cluster.
    update_centers(coords, &mut labels, &mut centers);
    let within_ss = objective(coords, &centers, &labels);
    Lloyd {
        labels,
        centers,
        within_ss,
        iterations,
        restart: 0,
        trace,
    }
}

/// PAM on Euclidean distances between rows of `coords`.
///
/// BUILD and SWAP are deterministic; `seed` is only recorded.
pub fn kmedoids(coords: &Matrix, k: usize, seed: u64) -> Result<KMedoidsResult> {
    check_coords(coords)?;
    let n = coords.rows();
    let dist = Matrix::from_fn(n, n, |i, j| euclidean(coords.row(i), coords.row(j)));
    let mut fit = kmedoids_from_distances(&dist, k)?;
    fit.seed = seed;
    Ok(fit)
}

/// PAM on a precomputed symmetric distance matrix.
pub fn kmedoids_from_distances(dist: &Matrix, k: usize) -> Result<KMedoidsResult> {
    if !dist.is_square() || dist.rows() == 0 {
        return Err(invalid_input(
            "distance matrix must be square and non-empty",
        ));
    }
    let n = dist.rows();
    check_k(n, k)?;

    let mut medoids = Vec::with_capacity(k);
    let first = (0..n)
        .map(|i| (i, dist.row(i).iter().sum::<f64>()))
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("n >= 2")
        .0;
    medoids.push(first);
    let mut nearest: Vec<f64> = dist.row(first).to_vec();
    while medoids.len() < k {
        let mut best = None;
        let mut best_gain = -1.0;
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - dist[(c, j)]).max(0.0)).sum();
            if gain > best_gain {
                best = Some(c);
                best_gain = gain;
            }
        }
        let c = best.expect("k <= n");
        medoids.push(c);
        for (j, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dist[(c, j)]);
        }
    }

    let mut swaps = 0;
    loop {
        let (near, near_d, second_d) = nearest_two(dist, &medoids);
        let total: f64 = near_d.iter().sum();
        let mut best: Option<(usize, usize)> = None;
        let mut best_delta = 0.0;
        for (slot, _) in medoids.iter().enumerate() {
            for h in (0..n).filter(|h| !medoids.contains(h)) {
                let mut delta = 0.0;
                for j in 0..n {
                    let dh = dist[(h, j)];
                    delta += if near[j] == slot {
                        dh.min(second_d[j]) - near_d[j]
                    } else {
                        dh.min(near_d[j]) - near_d[j]
                    };
                }
                if delta < best_delta {
                    best = Some((slot, h));
                    best_delta = delta;
                }
            }
        }
        match best {
            Some((slot, h)) if best_delta < -1e-12 * total.max(f64::MIN_POSITIVE) => {
                medoids[slot] = h;
                swaps += 1;
            }
            _ => break,
        }
    }

    let (mut labels, near_d, _) = nearest_two(dist, &medoids);
    for (slot, &m) in medoids.iter().enumerate() {
        labels[m] = slot;
    }
    let objective = near_d.iter().sum();
    Ok(KMedoidsResult {
        partition: Partition::new(labels)?,
        medoids,
        objective,
        swaps,
        seed: 0,
    })
}

/// Nearest medoid slot, its distance and the second-nearest distance for every point.
fn nearest_two(dist: &Matrix, medoids: &[usize]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = dist.rows();
    let mut near = vec![0; n];
    let mut near_d = vec![f64::INFINITY; n];
    let mut second_d = vec![f64::INFINITY; n];
    for j in 0..n {
        for (slot, &m) in medoids.iter().enumerate() {
            let d = dist[(m, j)];
            if d < near_d[j] {
                second_d[j] = near_d[j];
                near[j] = slot;
                near_d[j] = d;
            } else if d < second_d[j] {
                second_d[j] = d;
            }
        }
    }
    (near, near_d, second_d)
}
