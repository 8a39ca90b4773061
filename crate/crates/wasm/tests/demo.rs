use arclust_wasm::demo::{gaussian_run, intensity_sweep, pair_curve, Knobs};
use serde_json::Value;

const KNOBS: Knobs = Knobs {
    intensity: 2.0,
    decay: 20.0,
    locality: 1.0,
};

#[test]
fn gaussian_run_reports_every_point() {
    let v: Value = serde_json::from_str(&gaussian_run(7, "delta2", KNOBS, 2).unwrap()).unwrap();
    assert_eq!(v["coords"].as_array().unwrap().len(), 200);
    assert_eq!(v["sizes"].as_array().unwrap().len(), 2);
    assert_eq!(
        v["svg"].as_str().unwrap().matches("class=\"pt\"").count(),
        200
    );
    let again: Value = serde_json::from_str(&gaussian_run(7, "delta2", KNOBS, 2).unwrap()).unwrap();
    assert_eq!(v, again);
}

#[test]
fn sweep_moves_towards_fairness() {
    let pts: Vec<Value> =
        serde_json::from_str(&intensity_sweep(7, "delta2", KNOBS, 4.5, 4, 2).unwrap()).unwrap();
    assert_eq!(pts.len(), 4);
    let first = pts[0]["unfairness"].as_f64().unwrap();
    let last = pts[3]["unfairness"].as_f64().unwrap();
    assert!(last < first, "{first} -> {last}");
}

#[test]
fn pair_curve_separates_classes() {
    for family in ["delta1", "delta2", "delta3", "delta4"] {
        // delta4 intensities live in [0, 1].
        let knobs = if family == "delta4" {
            Knobs {
                intensity: 0.5,
                ..KNOBS
            }
        } else {
            KNOBS
        };
        let c: Value = serde_json::from_str(&pair_curve(family, knobs, 3.0, 50).unwrap()).unwrap();
        let same = c["same_class"].as_array().unwrap();
        let other = c["other_class"].as_array().unwrap();
        assert_eq!(same.len(), 50);
        // Far enough apart, same-class pairs are never closer than cross-class pairs.
        let (a, b) = (same[40].as_f64().unwrap(), other[40].as_f64().unwrap());
        assert!(a >= b, "{family}: {a} < {b}");
    }
}

#[test]
fn bad_requests_are_errors() {
    assert!(gaussian_run(1, "delta9", KNOBS, 2).is_err());
    assert!(gaussian_run(
        1,
        "delta2",
        Knobs {
            intensity: -1.0,
            ..KNOBS
        },
        2
    )
    .is_err());
    assert!(intensity_sweep(1, "delta2", KNOBS, 1.0, 1, 2).is_err());
    assert!(pair_curve("delta2", KNOBS, 0.0, 10).is_err());
}
