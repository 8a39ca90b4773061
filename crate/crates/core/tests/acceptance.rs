//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use arclust::dissim::{euclidean_matrix, prepare_for_mds};
use arclust::embed::classical_mds;
use arclust::flatcluster::kmeans;
use arclust::hier::{charged_ward, ChargedWard};
use arclust::kernelize::{additive_kernel_candidate, kernel_dissim_matrix, KernelSpec};
use arclust::metrics::{balance, partition_objectives, silhouette, unfairness};
use arclust::synth::{four_gaussians, rings, RingConfig};
use arclust::tune::{cluster, select_best, Method, TuneOptions};
use arclust::{Dataset, DissimParams, Family, Matrix, Partition};
use common::{random_rows, rng, Rows};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn m(rows: &Rows) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

fn random_sym(r: &mut rand_chacha::ChaCha8Rng, p: usize) -> Matrix {
    let a = random_rows(r, p, p, 1.0);
    Matrix::from_fn(p, p, |i, j| 0.5 * (a[i][j] + a[j][i]))
}

fn random_protected(r: &mut rand_chacha::ChaCha8Rng, n: usize, p: usize) -> Rows {
    match r.random_range(0..3) {
        0 => (0..n)
            .map(|_| {
                (0..p)
                    .map(|_| if r.random::<bool>() { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect(),
        1 => (0..n)
            .map(|_| {
                let hot = r.random_range(0..p);
                (0..p).map(|j| if j == hot { 1.0 } else { 0.0 }).collect()
            })
            .collect(),
        _ => random_rows(r, n, p, 1.5),
    }
}

/// Recursively updated charged Ward values against pooled evaluation, at every merge.
fn recursion_oracle() -> Outcome {
    let mut r = rng(1001);
    let mut worst: f64 = 0.0;
    let mut checks = 0usize;
    for _ in 0..200 {
        let n = r.random_range(2..=60);
        let d = r.random_range(1..=5);
        let p = r.random_range(1..=3);
        let x = random_rows(&mut r, n, d, 2.0);
        let s = random_protected(&mut r, n, p);
        let data = Dataset::new(m(&x), m(&s)).unwrap();
        let (u, v) = (random_sym(&mut r, p), random_sym(&mut r, p));
        let (a, b) = (r.random::<f64>() * 5.0, r.random::<f64>() * 5.0);
        let c = r.random::<f64>() * 2.0;
        let cases = [
            (
                common::Family::One {
                    u: u.to_rows(),
                    v: v.to_rows(),
                },
                DissimParams::delta1(u, v).unwrap(),
            ),
            (
                common::Family::Two { u: a, v: b },
                DissimParams::delta2(a, b).unwrap(),
            ),
            (
                common::Family::Three { u: c },
                DissimParams::delta3(c).unwrap(),
            ),
        ];
        for (fam, params) in cases {
            let mut state = ChargedWard::new(&data, &params).unwrap();
            let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
            for _ in 1..n {
                let active = state.active_slots();
                let i = r.random_range(0..active.len());
                let mut j = r.random_range(0..active.len() - 1);
                if j >= i {
                    j += 1;
                }
                let (sa, sb) = (active[i], active[j]);
                state.merge(sa, sb).unwrap();
                let moved = std::mem::take(&mut members[sb]);
                members[sa].extend(moved);
                let active = state.active_slots();
                for (ai, &p1) in active.iter().enumerate() {
                    for &p2 in &active[ai + 1..] {
                        let want = common::pooled_ward(&fam, &x, &s, &members[p1], &members[p2]);
                        let got = state.dissimilarity(p1, p2);
                        let rel = (got - want).abs() / want.abs();
                        let rel = if want == got { 0.0 } else { rel };
                        worst = worst.max(rel);
                        checks += 1;
                    }
                }
            }
        }
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("max relative error {worst:.2e} over {checks} cluster pairs"),
    }
}

fn mds_exactness() -> Outcome {
    let mut r = rng(1002);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = r.random_range(3..=40);
        let d = r.random_range(1..=4).min(n - 1);
        let x = random_rows(&mut r, n, d, 5.0);
        let dm = euclidean_matrix(&m(&x));
        let emb = classical_mds(&dm, d).unwrap();
        let back = euclidean_matrix(&emb.coords);
        let (mut num, mut den) = (0.0, 0.0);
        for (a, b) in back.values().as_slice().iter().zip(dm.values().as_slice()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        worst = worst.max((num / den).sqrt());
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max relative Frobenius error {worst:.2e}"),
    }
}

fn gaussian_reproduction() -> Outcome {
    let opts = TuneOptions::default();
    let (mut lo, mut hi, mut bal) = (vec![], vec![], vec![]);
    for seed in 0..10 {
        let data = four_gaussians(seed);
        let plain = cluster(
            &data,
            Method::KmeansMds,
            &DissimParams::unperturbed(Family::Delta1, 1),
            2,
            seed,
            &opts,
        )
        .unwrap();
        let props = plain.partition.proportions().column(0);
        lo.push(props.iter().cloned().fold(f64::INFINITY, f64::min));
        hi.push(props.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let params =
            DissimParams::delta1(Matrix::zeros(1, 1), Matrix::from_rows(&[[4.4]]).unwrap())
                .unwrap();
        let fair = cluster(&data, Method::KmedoidsMds, &params, 2, seed, &opts).unwrap();
        bal.push(balance(&fair.partition, &data.class_labels().unwrap()).unwrap());
    }
    let (lo, hi, bal) = (median(lo), median(hi), median(bal));
    Outcome {
        pass: lo <= 0.10 && hi >= 0.90 && bal >= 0.80,
        detail: format!("median min/max class share {lo:.3}/{hi:.3}, median balance {bal:.3}"),
    }
}

fn intensity_trend() -> Outcome {
    let opts = TuneOptions::default();
    let grid: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
    let mut gaps = vec![vec![]; grid.len()];
    let mut sils = vec![vec![]; grid.len()];
    for seed in 0..10 {
        let data = four_gaussians(seed);
        let classes = Partition::new(data.class_labels().unwrap()).unwrap();
        for (g, &u) in grid.iter().enumerate() {
            let params = DissimParams::delta2(u, 20.0).unwrap();
            let c = cluster(&data, Method::KmeansMds, &params, 2, seed, &opts).unwrap();
            gaps[g].push((c.partition.proportions()[(0, 0)] - 0.5).abs());
            let emb = c.embedding.unwrap();
            let ed = euclidean_matrix(&emb.coords);
            sils[g].push(silhouette(ed.values(), &classes, None).unwrap().average);
        }
    }
    let gaps: Vec<f64> = gaps.into_iter().map(median).collect();
    let sils: Vec<f64> = sils.into_iter().map(median).collect();
    let mut rise: f64 = 0.0;
    for i in 0..sils.len() {
        for j in i + 1..sils.len() {
            rise = rise.max(sils[j] - sils[i]);
        }
    }
    Outcome {
        pass: gaps[9] < gaps[0] && rise <= 0.05,
        detail: format!(
            "median gap {:.3} at u=0, {:.3} at u=4.5; class silhouette {:.3} -> {:.3}, largest rise {rise:.3}",
            gaps[0], gaps[9], sils[0], sils[10]
        ),
    }
}

fn kernel_rings() -> Outcome {
    let v = Matrix::from_rows(&[[1.0, -1.0], [-1.0, 0.0]]).unwrap();
    let grid: Vec<f64> = (0..=10).map(|i| 0.098 * i as f64).collect();
    let global = 0.754;
    let (mut gap0, mut gap1, mut spread): (Vec<f64>, Vec<f64>, f64) = (vec![], vec![], 0.0);
    for seed in 0..5 {
        let data = rings(seed, &RingConfig::default()).unwrap();
        let counts = data.class_counts().unwrap();
        let cls = data.class_labels().unwrap();
        let by_class = Partition::new(cls.clone()).unwrap();
        let mut per_class: Vec<[f64; 2]> = vec![];
        for (g, &u) in grid.iter().enumerate() {
            let params = DissimParams::delta4(v.clone(), u, 20.0, 0.05).unwrap();
            let raw = kernel_dissim_matrix(&data, &params, &KernelSpec::SquaredCoords).unwrap();
            let emb = classical_mds(&prepare_for_mds(&raw, None).unwrap(), 2).unwrap();
            let fit = kmeans(&emb.coords, 2, 20, seed).unwrap();
            let p = fit.partition.with_classes(&counts).unwrap();
            let gap = (0..2)
                .map(|c| (p.proportions()[(c, 1)] - global).abs())
                .fold(0.0, f64::max);
            if g == 0 {
                gap0.push(gap);
            }
            if g == grid.len() - 1 {
                gap1.push(gap);
            }
            let s = silhouette(
                euclidean_matrix(&emb.coords).values(),
                &by_class,
                Some(&cls),
            )
            .unwrap();
            per_class.push([s.per_class[0].unwrap(), s.per_class[1].unwrap()]);
        }
        for c in 0..2 {
            let col: Vec<f64> = per_class.iter().map(|v| v[c]).collect();
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            spread = spread.max(hi - lo);
        }
    }
    let (g0, g1) = (median(gap0), median(gap1));
    Outcome {
        pass: g1 < g0 && spread <= 0.05,
        detail: format!("median gap to 0.754: {g0:.3} at u=0, {g1:.3} at u=0.98; largest per-class silhouette change {spread:.3}"),
    }
}

fn metric_oracles() -> Outcome {
    let mut r = rng(1006);
    let mut worst: f64 = 0.0;
    let mut track =
        |a: f64, b: f64| worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
    for _ in 0..100 {
        let n = r.random_range(3..=20);
        let k = r.random_range(2..=n.min(5));
        let mut labels: Vec<usize> = (0..n)
            .map(|i| if i < k { i } else { r.random_range(0..k) })
            .collect();
        for i in (1..n).rev() {
            labels.swap(i, r.random_range(0..=i));
        }
        let dim = r.random_range(1..=3);
        let x = random_rows(&mut r, n, dim, 2.0);
        let d: Rows = (0..n)
            .map(|i| (0..n).map(|j| common::dist(&x[i], &x[j])).collect())
            .collect();
        let part = Partition::new(labels.clone()).unwrap();
        let sil = silhouette(&m(&d), &part, None).unwrap();
        for (a, b) in sil.values.iter().zip(common::silhouette(&d, &labels)) {
            track(*a, b);
        }
        let mut red: Vec<bool> = (0..n).map(|_| r.random::<bool>()).collect();
        red[0] = true;
        red[1] = false;
        let classes: Vec<usize> = red.iter().map(|&b| usize::from(b)).collect();
        track(
            balance(&part, &classes).unwrap(),
            common::balance(&labels, &red),
        );
        let counts: Rows = (0..n)
            .map(|_| (0..3).map(|_| r.random::<f64>() + 0.01).collect())
            .collect();
        track(
            unfairness(&part, &m(&counts)).unwrap(),
            common::unfairness(&labels, &counts),
        );
        let obj = partition_objectives(&m(&x), &part).unwrap();
        track(obj.kmeans_ss, common::kmeans_ss(&x, &labels));
        track(obj.kmedian_sum, common::kmedian_sum(&x, &labels));
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("max relative deviation {worst:.2e} over 100 instances"),
    }
}

fn tuner_selection() -> Outcome {
    let mut r = rng(1007);
    let (mut agree, mut infeasible) = (0, 0);
    for case in 0..100 {
        let len = r.random_range(1..=40);
        let tau = if case % 10 == 0 {
            1.0
        } else {
            r.random::<f64>() * 2.0 - 1.0
        };
        let cells: Vec<(f64, f64)> = (0..len)
            .map(|_| {
                let u = (r.random::<f64>() * 10.0).round() / 10.0;
                let s = if case % 10 == 0 {
                    r.random::<f64>() * 1.9 - 1.0
                } else {
                    r.random::<f64>() * 2.0 - 1.0
                };
                (u, s)
            })
            .collect();
        let mut expect: Option<usize> = None;
        for (i, &(u, s)) in cells.iter().enumerate() {
            if s >= tau && expect.is_none_or(|e| u < cells[e].0) {
                expect = Some(i);
            }
        }
        infeasible += usize::from(expect.is_none());
        agree += usize::from(select_best(&cells, tau) == expect);
    }
    Outcome {
        pass: agree == 100 && infeasible > 0,
        detail: format!("{agree}/100 selections agree ({infeasible} infeasible grids)"),
    }
}

fn ward_performance() -> (Outcome, Duration) {
    let mut r = rng(1008);
    let x = random_rows(&mut r, 2000, 5, 3.0);
    let s: Rows = (0..2000)
        .map(|i| {
            if i % 3 == 0 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            }
        })
        .collect();
    let data = Dataset::new(m(&x), m(&s)).unwrap();
    let params = DissimParams::delta2(1.0, 1.0).unwrap();
    let t = Instant::now();
    let dend = charged_ward(&data, &params).unwrap();
    let el = t.elapsed();
    (
        Outcome {
            pass: dend.merges().len() == 1999 && el < Duration::from_secs(20),
            detail: format!(
                "n=2000 in {:.2}s on {} thread(s)",
                el.as_secs_f64(),
                std::thread::available_parallelism().map_or(1, |n| n.get())
            ),
        },
        el,
    )
}

fn joint_kernel_infeasibility() -> Outcome {
    let (mut tried, mut hits) = (0, 0);
    for i in 0..25 {
        for j in 0..20 {
            for k in 0..20 {
                let a = 0.2 * i as f64;
                let c = 0.25 * j as f64;
                let rho = -1.0 + 2.0 * k as f64 / 19.0;
                let b = rho * (a * c).sqrt();
                assert!(a >= 0.0 && c >= 0.0 && b * b <= a * c * (1.0 + 1e-12));
                tried += 1;
                hits += usize::from(additive_kernel_candidate(a, b, c));
            }
        }
    }
    Outcome {
        pass: tried == 10_000 && hits == 0,
        detail: format!("{hits} of {tried} PSD candidates satisfy the repulsion inequality"),
    }
}

fn main() {
    let timed = |limit: u64, f: fn() -> Outcome| {
        let t = Instant::now();
        let mut o = f();
        let el = t.elapsed();
        if el > Duration::from_secs(limit) {
            o.pass = false;
        }
        o.detail = format!("{} [{:.1}s, limit {limit}s]", o.detail, el.as_secs_f64());
        o
    };
    let mut results = vec![
        (
            "recursions match pooled evaluation",
            timed(30, recursion_oracle),
        ),
        (
            "MDS recovers Euclidean configurations",
            timed(10, mds_exactness),
        ),
        (
            "Gaussian experiment, unperturbed vs additive",
            timed(60, gaussian_reproduction),
        ),
        ("intensity-fairness trend", timed(120, intensity_trend)),
        ("kernel ring experiment", timed(120, kernel_rings)),
        ("metric oracles", timed(5, metric_oracles)),
        ("tuner selection", timed(1, tuner_selection)),
    ];
    results.push(("charged Ward performance", ward_performance().0));
    results.push((
        "joint kernel infeasibility",
        timed(1, joint_kernel_infeasibility),
    ));

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {}: {} - {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
