//! Attraction-repulsion clustering.
//!
//! Perturbations of the Euclidean distance that take a protected attribute
//! into account (same-class pairs repel, different-class pairs attract), used
//! either through a classical MDS embedding followed by a partitional method
//! or directly by hierarchical clustering. Fairness of the resulting
//! partitions is measured by balance and an unfairness index, and a grid
//! tuner picks the parameters with the lowest unfairness among those keeping
//! the average silhouette above a floor.
//!
//! ```
//! use arclust::{dissim, embed, flatcluster, matrix::Matrix, types::*};
//!
//! let x = Matrix::from_rows(&[[0.0, 0.0], [0.1, 0.0], [3.0, 0.0], [3.1, 0.0]]).unwrap();
//! let s = Matrix::from_rows(&[[1.0], [1.0], [-1.0], [-1.0]]).unwrap();
//! let data = Dataset::new(x, s).unwrap();
//!
//! let params = DissimParams::delta2(1.0, 20.0).unwrap();
//! let delta = dissim::prepare_for_mds(&dissim::dissim_matrix(&data, &params).unwrap(), None).unwrap();
//! let coords = embed::classical_mds(&delta, 2).unwrap().coords;
//! let fit = flatcluster::kmeans(&coords, 2, 5, 7).unwrap();
//! assert_eq!(fit.partition.k(), 2);
//! ```

pub mod dissim;
pub mod embed;
pub mod error;
pub mod flatcluster;
pub mod geo;
pub mod hier;
pub mod kernelize;
pub mod matrix;
pub mod metrics;
pub mod plot;
pub mod synth;
pub mod tune;
pub mod types;
mod wide;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use types::{
    Codification, Dataset, DissimParams, Family, InteractionMatrix, Partition, Scheme,
};
