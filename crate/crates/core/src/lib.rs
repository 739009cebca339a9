//! Exact simulation of long-range first-passage percolation on the discrete
//! torus, together with the numerics for its limiting constants.
//!
//! Every edge `{u, v}` of the complete graph on `{0, …, m-1}^d` carries the
//! weight `||u - v||^α · E` with `E ~ Exp(1)`. Distances in this random metric
//! are simulated exactly through the exploration birth process
//! ([`explore::Explorer`]) and cross-checked against shortest paths on a
//! sampled weight realisation ([`explore::oracle`]).
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the aliases
//! below fix `f64`, which is what the simulator and statistics use.

pub mod constants;
pub mod error;
pub mod explore;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stats;
pub mod sum;
pub mod torus;
pub mod weights;

pub use error::{Error, Result};
pub use explore::{flooding_time, run_exploration, transmission_time, diameter_exact, dijkstra_oracle, Explorer, StopRule};
pub use scalar::Real;
pub use torus::{sites_by_distance, torus_norm, NormIndex, Site};
pub use weights::{compute_rk_nearest, compute_rn};

pub type Torus = torus::TorusConfig<f64>;
pub type Norm = torus::NormIndex<f64>;
pub type Field = weights::WeightField<f64>;
pub type Record = explore::ExplorationRecord<f64>;
pub type Stop = explore::StopRule<f64>;
pub type Experiment = stats::ExperimentSpec;
pub type Summary = stats::StatSummary;

pub type Query = constants::ConstantQuery<f64>;
pub type Estimate = constants::ConstantEstimate<f64>;
