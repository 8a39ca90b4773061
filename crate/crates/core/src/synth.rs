//! Seeded synthetic datasets: four Gaussian blobs and concentric rings.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::flatcluster::rng_for;
use crate::matrix::Matrix;
use crate::types::Dataset;

pub const GAUSSIAN_PER_COMPONENT: usize = 50;
pub const GAUSSIAN_SD: f64 = 0.5;
pub const GAUSSIAN_MEANS: [[f64; 2]; 4] = [[-1.0, 0.5], [-1.0, -0.5], [1.0, 0.5], [1.0, -0.5]];

/// 200 points from four isotropic Gaussians (variance 0.25). The two
/// components at `x = −1` carry class `+1`, the other two class `−1`.
pub fn four_gaussians(seed: u64) -> Dataset {
    let mut rng = rng_for(seed, 0);
    let noise = Normal::new(0.0, GAUSSIAN_SD).expect("valid sd");
    let n = 4 * GAUSSIAN_PER_COMPONENT;
    let mut x = Matrix::zeros(n, 2);
    let mut s = Matrix::zeros(n, 1);
    for i in 0..n {
        let c = i / GAUSSIAN_PER_COMPONENT;
        for j in 0..2 {
            x[(i, j)] = GAUSSIAN_MEANS[c][j] + noise.sample(&mut rng);
        }
        s[(i, 0)] = if c < 2 { 1.0 } else { -1.0 };
    }
    let ids = (0..n).map(|i| format!("g{i:03}")).collect();
    Dataset::with_ids(x, s, Some(ids)).expect("generated data is valid")
}

/// Geometry of the ring dataset: squares on the inner and outer rings,
/// circles on the middle one.
///
/// The default scale matters for locality-weighted dissimilarities, since
/// squared-coordinate kernel distances grow with the fourth power of radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    pub total: usize,
    pub circle_fraction: f64,
    /// Centre radii of the inner, middle and outer rings.
    pub radii: [f64; 3],
    /// Radial width of every ring.
    pub width: f64,
}

impl Default for RingConfig {
    fn default() -> Self {
        RingConfig {
            total: 981,
            circle_fraction: 0.246,
            radii: [3.0, 6.0, 9.0],
            width: 1.2,
        }
    }
}

impl RingConfig {
    /// Circles, inner squares, outer squares. Squares split evenly, extra to the inner ring.
    pub fn counts(&self) -> [usize; 3] {
        let circles = (self.circle_fraction * self.total as f64).round() as usize;
        let squares = self.total - circles;
        [circles, squares - squares / 2, squares / 2]
    }

    pub fn validate(&self) -> Result<()> {
        let [r0, r1, r2] = self.radii;
        if self.total < 3 {
            return Err(invalid_param("ring dataset needs at least 3 points"));
        }
        if !(self.circle_fraction > 0.0 && self.circle_fraction < 1.0) {
            return Err(invalid_param("circle fraction must be in (0, 1)"));
        }
        if !(self.width > 0.0 && r0 - self.width / 2.0 >= 0.0 && r0 < r1 && r1 < r2) {
            return Err(invalid_param(
                "radii must increase and the inner ring must not cross the origin",
            ));
        }
        Ok(())
    }
}

/// Points uniform in angle and radius on each ring. Circles are coded
/// `(1, 0)`, squares `(0, 1)`.
pub fn rings(seed: u64, config: &RingConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = rng_for(seed, 0);
    let [circles, inner, outer] = config.counts();
    let layout = [
        (config.radii[0], inner, 1usize),
        (config.radii[1], circles, 0),
        (config.radii[2], outer, 1),
    ];
    let mut x = Matrix::zeros(config.total, 2);
    let mut s = Matrix::zeros(config.total, 2);
    let mut i = 0;
    for (radius, count, class) in layout {
        for _ in 0..count {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let r = radius + config.width * (rng.random::<f64>() - 0.5);
            x[(i, 0)] = r * theta.cos();
            x[(i, 1)] = r * theta.sin();
            s[(i, class)] = 1.0;
            i += 1;
        }
    }
    let ids = (0..config.total).map(|i| format!("r{i:04}")).collect();
    Dataset::with_ids(x, s, Some(ids))
}
