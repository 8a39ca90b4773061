mod common;

use arclust::dissim::{dissim_matrix, euclidean_matrix, prepare_for_mds};
use arclust::embed::{classical_mds, double_center};
use arclust::{Dataset, DissimParams, Matrix};
use common::{jacobi_eigen, random_rows, rng, Rows};

#[test]
fn spectrum_matches_jacobi_on_non_euclidean_input() {
    let mut r = rng(31);
    let x = random_rows(&mut r, 14, 2, 1.0);
    let s: Rows = (0..14)
        .map(|i| vec![if i < 7 { 1.0 } else { -1.0 }])
        .collect();
    let data = Dataset::new(
        Matrix::from_rows(&x).unwrap(),
        Matrix::from_rows(&s).unwrap(),
    )
    .unwrap();
    let prep = prepare_for_mds(
        &dissim_matrix(&data, &DissimParams::delta3(2.0).unwrap()).unwrap(),
        None,
    )
    .unwrap();
    let emb = classical_mds(&prep, 13).unwrap();

    let b = double_center(&prep);
    let rows: Rows = b.to_rows();
    let (values, vectors) = jacobi_eigen(&rows);
    let scale = values[0].abs();
    for (got, want) in emb.eigenvalues.iter().zip(&values) {
        assert!((got - want).abs() <= 1e-9 * scale, "{got} vs {want}");
    }
    assert!(
        values.iter().any(|&v| v < -1e-6 * scale),
        "input should be non-Euclidean"
    );
    let neg: f64 = values.iter().filter(|&&v| v < 0.0).map(|v| v.abs()).sum();
    let tot: f64 = values.iter().map(|v| v.abs()).sum();
    assert!((emb.negative_mass - neg / tot).abs() < 1e-9);

    // Coordinates reproduce the positive part of B, and columns follow
    // the sign convention.
    let kept = emb.dim();
    assert_eq!(kept, values.iter().filter(|&&v| v > 1e-9 * scale).count());
    for i in 0..14 {
        for j in 0..14 {
            let got: f64 = (0..kept)
                .map(|c| emb.coords[(i, c)] * emb.coords[(j, c)])
                .sum();
            let want: f64 = (0..kept)
                .map(|c| values[c] * vectors[i][c] * vectors[j][c])
                .sum();
            assert!((got - want).abs() <= 1e-8 * scale);
        }
    }
    for c in 0..kept {
        let col = emb.coords.column(c);
        let big = col
            .iter()
            .cloned()
            .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        assert!(big > 0.0);
    }
}

#[test]
fn euclidean_configurations_are_recovered() {
    let mut r = rng(32);
    for trial in 0..10 {
        let (n, d) = (8 + trial * 3, 1 + trial % 4);
        let x = random_rows(&mut r, n, d, 5.0);
        let dm = euclidean_matrix(&Matrix::from_rows(&x).unwrap());
        let emb = classical_mds(&dm, d).unwrap();
        let back = euclidean_matrix(&emb.coords);
        let (mut num, mut den) = (0.0, 0.0);
        for (a, b) in back.values().as_slice().iter().zip(dm.values().as_slice()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        assert!((num / den).sqrt() < 1e-8);
    }
}
