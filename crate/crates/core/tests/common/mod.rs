//! Test-only reference implementations, written straight from the
//! definitions and sharing no code with the library.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rows = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Rows {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| scale * (rng.random::<f64>() * 2.0 - 1.0))
                .collect()
        })
        .collect()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += (a[i] - b[i]) * (a[i] - b[i]);
    }
    acc
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

fn quad(a: &[f64], m: &Rows, b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            acc += a[i] * m[i][j] * b[j];
        }
    }
    acc
}

/// The four pointwise families from their formulas.
#[derive(Clone, Debug)]
pub enum Family {
    One { u: Rows, v: Rows },
    Two { u: f64, v: f64 },
    Three { u: f64 },
    Four { v: Rows, u: f64, decay: f64, w: f64 },
}

pub fn delta(f: &Family, x1: &[f64], s1: &[f64], x2: &[f64], s2: &[f64]) -> f64 {
    let sq = sq_dist(x1, x2);
    match f {
        Family::One { u, v } => {
            let total: f64 = u.iter().flatten().sum();
            total + quad(s1, v, s2) + sq
        }
        Family::Two { u, v } => (1.0 + u * (-v * sq_dist(s1, s2)).exp()) * sq,
        Family::Three { u } => sq - u * sq_dist(s1, s2),
        Family::Four { v, u, decay, w } => {
            let c = quad(s1, v, s2);
            let sign = if c > 0.0 {
                1.0
            } else if c < 0.0 {
                -1.0
            } else {
                0.0
            };
            let d = sq.sqrt();
            (1.0 + sign * u * (1.0 - (-decay * c * c).exp()) * (-w * d).exp()) * d
        }
    }
}

pub fn mean_of(rows: &Rows, members: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; rows[0].len()];
    for &i in members {
        for (a, v) in m.iter_mut().zip(&rows[i]) {
            *a += v;
        }
    }
    m.iter_mut().for_each(|a| *a /= members.len() as f64);
    m
}

/// `nₐn_b/(nₐ+n_b)·δ(means)` evaluated on pooled members.
pub fn pooled_ward(f: &Family, x: &Rows, s: &Rows, a: &[usize], b: &[usize]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let w = na * nb / (na + nb);
    w * delta(
        f,
        &mean_of(x, a),
        &mean_of(s, a),
        &mean_of(x, b),
        &mean_of(s, b),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Link {
    Single,
    Complete,
    Average,
}

/// Agglomeration recomputing every cluster distance from members.
/// Returns merge heights and, for every k, the partition as sorted member lists.
pub fn naive_agglomerate(
    n: usize,
    cluster_dist: impl Fn(&[usize], &[usize]) -> f64,
) -> (Vec<f64>, Vec<Vec<Vec<usize>>>) {
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    let mut partitions = vec![Vec::new(); n + 1];
    partitions[n] = canonical(&clusters);
    while clusters.len() > 1 {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let d = cluster_dist(&clusters[i], &clusters[j]);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        let merged = clusters.remove(best.1);
        clusters[best.0].extend(merged);
        heights.push(best.2);
        partitions[clusters.len()] = canonical(&clusters);
    }
    (heights, partitions)
}

pub fn canonical(clusters: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = clusters
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c
        })
        .collect();
    out.sort();
    out
}

pub fn labels_to_clusters(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().unwrap() + 1;
    let mut out = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        out[l].push(i);
    }
    canonical(&out)
}

pub fn linkage_dist(d: &Rows, link: Link, a: &[usize], b: &[usize]) -> f64 {
    let vals: Vec<f64> = a
        .iter()
        .flat_map(|&i| b.iter().map(move |&j| d[i][j]))
        .collect();
    match link {
        Link::Single => vals.iter().cloned().fold(f64::INFINITY, f64::min),
        Link::Complete => vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        Link::Average => vals.iter().sum::<f64>() / vals.len() as f64,
    }
}

/// Cyclic Jacobi eigenvalue iteration. Returns eigenvalues (descending) and
/// matching eigenvectors as columns.
pub fn jacobi_eigen(a: &Rows) -> (Vec<f64>, Rows) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Rows = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n)
        .map(|r| order.iter().map(|&c| v[r][c]).collect())
        .collect();
    (values, vectors)
}

pub fn silhouette(d: &Rows, labels: &[usize]) -> Vec<f64> {
    let n = labels.len();
    let k = labels.iter().max().unwrap() + 1;
    (0..n)
        .map(|i| {
            let own: Vec<usize> = (0..n)
                .filter(|&j| j != i && labels[j] == labels[i])
                .collect();
            if own.is_empty() {
                return 0.0;
            }
            let a = own.iter().map(|&j| d[i][j]).sum::<f64>() / own.len() as f64;
            let mut b = f64::INFINITY;
            for c in (0..k).filter(|&c| c != labels[i]) {
                let other: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                b = b.min(other.iter().map(|&j| d[i][j]).sum::<f64>() / other.len() as f64);
            }
            if a.max(b) == 0.0 {
                0.0
            } else {
                (b - a) / a.max(b)
            }
        })
        .collect()
}

pub fn balance(labels: &[usize], red: &[bool]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    let mut worst = f64::INFINITY;
    for c in 0..k {
        let r = (0..labels.len())
            .filter(|&i| labels[i] == c && red[i])
            .count() as f64;
        let b = (0..labels.len())
            .filter(|&i| labels[i] == c && !red[i])
            .count() as f64;
        let bal = if r == 0.0 || b == 0.0 {
            0.0
        } else {
            (r / b).min(b / r)
        };
        worst = worst.min(bal);
    }
    worst
}

pub fn unfairness(labels: &[usize], counts: &Rows) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    let q = counts[0].len();
    let props = |members: Vec<usize>| -> Vec<f64> {
        let tot: f64 = members.iter().map(|&i| counts[i].iter().sum::<f64>()).sum();
        (0..q)
            .map(|j| members.iter().map(|&i| counts[i][j]).sum::<f64>() / tot)
            .collect()
    };
    let global = props((0..labels.len()).collect());
    let mut acc = 0.0;
    for c in 0..k {
        let p = props((0..labels.len()).filter(|&i| labels[i] == c).collect());
        acc += dist(&p, &global);
    }
    acc / k as f64
}

pub fn kmeans_ss(x: &Rows, labels: &[usize]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    (0..k)
        .map(|c| {
            let m: Vec<usize> = (0..x.len()).filter(|&i| labels[i] == c).collect();
            let mu = mean_of(x, &m);
            m.iter().map(|&i| sq_dist(&x[i], &mu)).sum::<f64>()
        })
        .sum()
}

pub fn kmedian_sum(x: &Rows, labels: &[usize]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    (0..k)
        .map(|c| {
            let m: Vec<usize> = (0..x.len()).filter(|&i| labels[i] == c).collect();
            m.iter()
                .map(|&a| m.iter().map(|&i| dist(&x[a], &x[i])).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Every assignment of `n` points to exactly `k` non-empty labelled groups
/// with label 0 on point 0 (labels up to permutation are visited repeatedly).
pub fn for_each_partition(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut labels = vec![0; n];
    fn rec(
        i: usize,
        n: usize,
        k: usize,
        used: usize,
        labels: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if i == n {
            if used == k {
                f(labels);
            }
            return;
        }
        for l in 0..(used + 1).min(k) {
            labels[i] = l;
            rec(i + 1, n, k, used.max(l + 1), labels, f);
        }
    }
    rec(0, n, k, 0, &mut labels, &mut f);
}

pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
