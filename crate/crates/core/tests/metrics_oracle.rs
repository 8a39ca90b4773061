mod common;

use arclust::metrics::{balance, evaluate, partition_objectives, silhouette, unfairness};
use arclust::{Matrix, Partition};
use common::{random_rows, rng, Rows};
use rand::Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn metrics_match_brute_force() {
    let mut r = rng(51);
    for _ in 0..40 {
        let n = r.random_range(4..=20);
        let k = r.random_range(2..=4.min(n));
        let mut labels: Vec<usize> = (0..n)
            .map(|i| if i < k { i } else { r.random_range(0..k) })
            .collect();
        labels.swap(0, n - 1);
        let x = random_rows(&mut r, n, 2, 2.0);
        let d: Rows = (0..n)
            .map(|i| (0..n).map(|j| common::dist(&x[i], &x[j])).collect())
            .collect();
        let red: Vec<bool> = (0..n).map(|i| i % 2 == 0 || r.random::<bool>()).collect();
        let counts: Rows = (0..n)
            .map(|_| (0..3).map(|_| r.random_range(0..5) as f64 + 0.5).collect())
            .collect();

        let p = Partition::new(labels.clone()).unwrap();
        let sil = silhouette(&Matrix::from_rows(&d).unwrap(), &p, None).unwrap();
        for (a, b) in sil.values.iter().zip(common::silhouette(&d, &labels)) {
            assert!(close(*a, b));
        }
        let classes: Vec<usize> = red.iter().map(|&b| usize::from(!b)).collect();
        if classes.contains(&1) {
            assert!(close(
                balance(&p, &classes).unwrap(),
                common::balance(&labels, &red)
            ));
        }
        let cm = Matrix::from_rows(&counts).unwrap();
        assert!(close(
            unfairness(&p, &cm).unwrap(),
            common::unfairness(&labels, &counts)
        ));
        let obj = partition_objectives(&Matrix::from_rows(&x).unwrap(), &p).unwrap();
        assert!(close(obj.kmeans_ss, common::kmeans_ss(&x, &labels)));
        assert!(close(obj.kmedian_sum, common::kmedian_sum(&x, &labels)));
    }
}

#[test]
fn per_class_averages_are_convex_combinations() {
    let mut r = rng(52);
    let x = random_rows(&mut r, 16, 2, 2.0);
    let d = Matrix::from_fn(16, 16, |i, j| common::dist(&x[i], &x[j]));
    let labels: Vec<usize> = (0..16).map(|i| i % 3).collect();
    let classes: Vec<usize> = (0..16).map(|i| usize::from(i % 4 == 0)).collect();
    let s = silhouette(&d, &Partition::new(labels).unwrap(), Some(&classes)).unwrap();
    let n1 = classes.iter().filter(|&&c| c == 1).count() as f64;
    let avg = (s.per_class[0].unwrap() * (16.0 - n1) + s.per_class[1].unwrap() * n1) / 16.0;
    assert!(close(avg, s.average));
}

#[test]
fn report_bundles_everything() {
    let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [5.0, 0.0], [5.0, 1.0]]).unwrap();
    let d = arclust::dissim::euclidean_matrix(&x);
    let counts = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
    let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
    let rep = evaluate(d.values(), Some(&x), &p, &counts).unwrap();
    assert_eq!(rep.balance, Some(1.0));
    assert_eq!(rep.unfairness, 0.0);
    assert_eq!(
        rep.per_cluster_proportions.as_slice(),
        &[0.5, 0.5, 0.5, 0.5]
    );
    assert_eq!(rep.objectives.unwrap().kmeans_ss, 1.0);
    assert!(rep.avg_silhouette > 0.7);
}
