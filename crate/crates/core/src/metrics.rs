//! Quality and fairness measures for a partition.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Error, Result};
use crate::matrix::{euclidean, sq_euclidean, Matrix};
use crate::types::{cluster_proportions, Partition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    pub values: Vec<f64>,
    pub average: f64,
    /// Mean silhouette of the members of each class; `None` for an absent class.
    pub per_class: Vec<Option<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    /// Squared distances to cluster means.
    pub kmeans_ss: f64,
    /// Distances to the best medoid of each cluster.
    pub kmedian_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub k: usize,
    pub avg_silhouette: f64,
    pub per_class_silhouette: Vec<Option<f64>>,
    /// Only defined for two classes.
    pub balance: Option<f64>,
    pub unfairness: f64,
    pub per_cluster_proportions: Matrix,
    pub objectives: Option<Objectives>,
}

fn check_labels(partition: &Partition, n: usize) -> Result<()> {
    if partition.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "partition has {} labels for {n} points",
            partition.len()
        )));
    }
    Ok(())
}

/// Silhouette of every point under `distances` (any symmetric n×n matrix).
///
/// Members of singleton clusters score 0, as do points with `a = b = 0`.
/// `classes` gives a class index per point for the per-class averages.
pub fn silhouette(
    distances: &Matrix,
    partition: &Partition,
    classes: Option<&[usize]>,
) -> Result<Silhouette> {
    let n = distances.rows();
    if !distances.is_square() {
        return Err(invalid_input("distance matrix must be square"));
    }
    check_labels(partition, n)?;
    let k = partition.k();
    if k < 2 {
        return Err(invalid_input("silhouette needs at least two clusters"));
    }
    let labels = partition.labels();
    let sizes = partition.sizes();
    let mut sums = vec![0.0; k];
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            sums.iter_mut().for_each(|s| *s = 0.0);
            for (j, &d) in distances.row(i).iter().enumerate() {
                if j != i {
                    sums[labels[j]] += d;
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m > 0.0 {
                (b - a) / m
            } else {
                0.0
            }
        })
        .collect();
    let average = values.iter().sum::<f64>() / n as f64;
    let per_class = match classes {
        None => Vec::new(),
        Some(cls) => {
            if cls.len() != n {
                return Err(Error::DimensionMismatch(
                    "one class per point expected".into(),
                ));
            }
            let q = cls.iter().max().map_or(0, |m| m + 1);
            let mut acc = vec![(0.0, 0usize); q];
            for (&c, &v) in cls.iter().zip(&values) {
                acc[c].0 += v;
                acc[c].1 += 1;
            }
            acc.into_iter()
                .map(|(s, m)| (m > 0).then(|| s / m as f64))
                .collect()
        }
    };
    Ok(Silhouette {
        values,
        average,
        per_class,
    })
}

/// Worst per-cluster ratio between the two classes, in `[0, 1]`.
///
/// A cluster missing one of the classes has balance 0.
pub fn balance(partition: &Partition, classes: &[usize]) -> Result<f64> {
    check_labels(partition, classes.len())?;
    let mut present: Vec<usize> = classes.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() != 2 {
        return Err(invalid_input(format!(
            "balance needs exactly two classes, found {}",
            present.len()
        )));
    }
    let mut counts = vec![[0usize; 2]; partition.k()];
    for (&l, &c) in partition.labels().iter().zip(classes) {
        counts[l][usize::from(c == present[1])] += 1;
    }
    let worst = counts
        .iter()
        .map(|&[r, b]| {
            if r == 0 || b == 0 {
                0.0
            } else {
                (r as f64 / b as f64).min(b as f64 / r as f64)
            }
        })
        .fold(1.0, f64::min);
    Ok(worst.clamp(0.0, 1.0))
}

/// Mean Euclidean gap between each cluster's class proportions and the
/// global ones, from n×q non-negative class weights.
pub fn unfairness(partition: &Partition, counts: &Matrix) -> Result<f64> {
    check_labels(partition, counts.rows())?;
    if counts.as_slice().iter().any(|&c| !c.is_finite() || c < 0.0) {
        return Err(invalid_input(
            "class weights must be finite and non-negative",
        ));
    }
    let k = partition.k();
    let mut totals = vec![0.0; k];
    for (i, &l) in partition.labels().iter().enumerate() {
        totals[l] += counts.row(i).iter().sum::<f64>();
    }
    if let Some(c) = totals.iter().position(|&t| t <= 0.0) {
        return Err(invalid_input(format!(
            "cluster {c} has zero total class weight"
        )));
    }
    let per_cluster = cluster_proportions(partition.labels(), k, counts);
    let global = cluster_proportions(&vec![0; counts.rows()], 1, counts);
    let sum: f64 = (0..k)
        .map(|c| sq_euclidean(per_cluster.row(c), global.row(0)).sqrt())
        .sum();
    Ok(sum / k as f64)
}

/// k-means and k-median objectives of a fixed partition.
pub fn partition_objectives(coords: &Matrix, partition: &Partition) -> Result<Objectives> {
    check_labels(partition, coords.rows())?;
    let d = coords.cols();
    let mut kmeans_ss = 0.0;
    let mut kmedian_sum = 0.0;
    for members in partition.members() {
        let mut mean = vec![0.0; d];
        for &i in &members {
            for (m, &v) in mean.iter_mut().zip(coords.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= members.len() as f64);
        kmeans_ss += members
            .iter()
            .map(|&i| sq_euclidean(coords.row(i), &mean))
            .sum::<f64>();
        kmedian_sum += members
            .iter()
            .map(|&c| {
                members
                    .iter()
                    .map(|&i| euclidean(coords.row(c), coords.row(i)))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
    }
    Ok(Objectives {
        kmeans_ss,
        kmedian_sum,
    })
}

/// All metrics at once. Silhouette is taken on `distances`; objectives need `coords`.
pub fn evaluate(
    distances: &Matrix,
    coords: Option<&Matrix>,
    partition: &Partition,
    counts: &Matrix,
) -> Result<MetricsReport> {
    let classes: Vec<usize> = counts
        .iter_rows()
        .map(|row| {
            (0..row.len())
                .reduce(|best, j| if row[j] > row[best] { j } else { best })
                .unwrap_or(0)
        })
        .collect();
    let sil = silhouette(distances, partition, Some(&classes))?;
    let two_classes = {
        let mut c = classes.clone();
        c.sort_unstable();
        c.dedup();
        c.len() == 2
    };
    Ok(MetricsReport {
        k: partition.k(),
        avg_silhouette: sil.average,
        per_class_silhouette: sil.per_class,
        balance: if two_classes {
            Some(balance(partition, &classes)?)
        } else {
            None
        },
        unfairness: unfairness(partition, counts)?,
        per_cluster_proportions: cluster_proportions(partition.labels(), partition.k(), counts),
        objectives: coords
            .map(|c| partition_objectives(c, partition))
            .transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(labels: &[usize]) -> Partition {
        Partition::new(labels.to_vec()).unwrap()
    }

    #[test]
    fn separated_duplicates_score_one() {
        let d = Matrix::from_fn(4, 4, |i, j| if i / 2 == j / 2 { 0.0 } else { 3.0 });
        let s = silhouette(&d, &part(&[0, 0, 1, 1]), Some(&[0, 1, 0, 1])).unwrap();
        assert_eq!(s.values, vec![1.0; 4]);
        assert_eq!(s.per_class, vec![Some(1.0), Some(1.0)]);
    }

    #[test]
    fn singleton_and_tie_score_zero() {
        let d = Matrix::from_rows(&[[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]).unwrap();
        let s = silhouette(&d, &part(&[0, 0, 1]), None).unwrap();
        assert_eq!(s.values, vec![0.0; 3]);
        assert!(silhouette(&d, &part(&[0, 0, 0]), None).is_err());
    }

    #[test]
    fn balance_examples() {
        assert_eq!(balance(&part(&[0, 0, 1, 1]), &[0, 1, 0, 1]).unwrap(), 1.0);
        assert_eq!(balance(&part(&[0, 0, 1, 1]), &[0, 0, 1, 1]).unwrap(), 0.0);
        let b = balance(&part(&[0, 0, 0, 0, 1, 1, 1, 1]), &[1, 1, 1, 0, 1, 1, 0, 0]).unwrap();
        assert!((b - 1.0 / 3.0).abs() < 1e-15);
        assert!(balance(&part(&[0, 1, 1]), &[0, 1, 2]).is_err());
        assert!(balance(&part(&[0, 1]), &[0, 0]).is_err());
    }

    #[test]
    fn unfairness_examples() {
        let counts = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let u = unfairness(&part(&[0, 1]), &counts).unwrap();
        assert!((u - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(unfairness(&part(&[0, 0]), &counts).unwrap(), 0.0);
        let zero = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(unfairness(&part(&[0, 1]), &zero).is_err());
    }

    #[test]
    fn objectives_examples() {
        let x = Matrix::from_rows(&[[0.0], [2.0], [7.0]]).unwrap();
        let o = partition_objectives(&x, &part(&[0, 0, 1])).unwrap();
        assert_eq!(o.kmeans_ss, 2.0);
        assert_eq!(o.kmedian_sum, 2.0);
        let o = partition_objectives(&x, &part(&[0, 1, 2])).unwrap();
        assert_eq!((o.kmeans_ss, o.kmedian_sum), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn silhouette_in_range(
            pts in prop::collection::vec(-3.0f64..3.0, 12),
            raw in prop::collection::vec(0usize..3, 12),
        ) {
            let p = Partition::from_raw_labels(&raw).unwrap();
            prop_assume!(p.k() >= 2);
            let d = Matrix::from_fn(12, 12, |i, j| (pts[i] - pts[j]).abs());
            let s = silhouette(&d, &p, None).unwrap();
            for v in s.values {
                prop_assert!((-1.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn fairness_ignores_relabeling(
            raw in prop::collection::vec(0usize..3, 10),
            cls in prop::collection::vec(0usize..2, 10),
            scale in 0.5f64..4.0,
        ) {
            let p = Partition::from_raw_labels(&raw).unwrap();
            let flipped = Partition::from_raw_labels(&raw.iter().map(|l| 2 - l).collect::<Vec<_>>()).unwrap();
            prop_assume!(cls.contains(&0) && cls.contains(&1));
            let b = balance(&p, &cls).unwrap();
            prop_assert_eq!(b, balance(&flipped, &cls).unwrap());
            let swapped: Vec<usize> = cls.iter().map(|c| 1 - c).collect();
            prop_assert_eq!(b, balance(&p, &swapped).unwrap());

            let counts = Matrix::from_fn(10, 2, |i, j| if cls[i] == j { 1.0 } else { 0.0 });
            let u = unfairness(&p, &counts).unwrap();
            prop_assert!((u - unfairness(&flipped, &counts).unwrap()).abs() < 1e-12);
            // Scaling the weights of one cluster leaves its proportions alone.
            let scaled = Matrix::from_fn(10, 2, |i, j| {
                counts[(i, j)] * if p.labels()[i] == 0 { scale } else { 1.0 }
            });
            let before = cluster_proportions(p.labels(), p.k(), &counts);
            let after = cluster_proportions(p.labels(), p.k(), &scaled);
            for (a, b) in before.as_slice().iter().zip(after.as_slice()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
