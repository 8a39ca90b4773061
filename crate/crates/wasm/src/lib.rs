//! WebAssembly bindings for the demo page in `www/`.

pub mod demo;

use demo::Knobs;
use wasm_bindgen::prelude::*;

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gaussian_run(
    seed: u64,
    family: &str,
    intensity: f64,
    decay: f64,
    locality: f64,
    k: usize,
) -> Result<String, JsError> {
    let knobs = Knobs {
        intensity,
        decay,
        locality,
    };
    js(demo::gaussian_run(seed, family, knobs, k))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn intensity_sweep(
    seed: u64,
    family: &str,
    decay: f64,
    locality: f64,
    max_intensity: f64,
    steps: usize,
    k: usize,
) -> Result<String, JsError> {
    let knobs = Knobs {
        intensity: 0.0,
        decay,
        locality,
    };
    js(demo::intensity_sweep(
        seed,
        family,
        knobs,
        max_intensity,
        steps,
        k,
    ))
}

#[wasm_bindgen]
pub fn pair_curve(
    family: &str,
    intensity: f64,
    decay: f64,
    locality: f64,
    max_distance: f64,
    steps: usize,
) -> Result<String, JsError> {
    let knobs = Knobs {
        intensity,
        decay,
        locality,
    };
    js(demo::pair_curve(family, knobs, max_distance, steps))
}
