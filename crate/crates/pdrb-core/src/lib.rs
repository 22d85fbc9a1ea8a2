//! Robust Wasserstein barycenters of persistence diagrams.
//!
//! This crate implements the metric machinery for persistence diagrams
//! under the q-Wasserstein distance, a fixed-point barycenter solver with
//! a tunable robustness exponent, k-means clustering in diagram space,
//! and dictionary encoding of diagram ensembles as barycentric weights
//! over a small set of atom diagrams.
//!
//! The crate is `no_std`-compatible (with `alloc`); file formats, the
//! command-line interface and everything else that needs an operating
//! system live in the companion `pdrb-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod assignment;
pub mod barycenter;
pub mod clustering;
pub mod diagram;
pub mod dictionary;
pub mod error;
pub mod grid;
pub mod ground;
pub mod metric;

mod num;

pub use assignment::{
    brute_force_assignment, build_cost_matrix, solve_assignment, Assignment, CostMatrix,
};
pub use barycenter::{
    compute_barycenter, frechet_energy, BarycenterConfig, BarycenterInit, BarycenterResult,
};
pub use clustering::{
    adjusted_rand_index, kmeans, kmeans_pp_init, make_outlier_ensemble, ClusterShape,
    ClusteringResult, EnsembleSpec, KmeansConfig,
};
pub use diagram::{
    augment, project_to_diagonal, prune, AugmentedPair, DiagramPoint, PersistenceDiagram, PointFlag,
};
pub use dictionary::{
    encode, encoding_energy, fd_gradient_check, planar_layout, reconstruct, CoefficientVector,
    Dictionary, EncodeConfig, EncodingResult, PlanarLayout,
};
pub use error::{Error, Result};
pub use grid::{extract_max_pairs, threshold_top_k, Connectivity, ScalarGrid};
pub use ground::{
    check_uniqueness, grid_search_oracle, ground_barycenter, ground_barycenter_from, v_q,
    GroundProblem, GroundSolution, Point2,
};
pub use metric::{distance_matrix, wasserstein_distance, DistanceMatrix};
