//! Fréchet means of probability measures on the unit circle.
//!
//! The crate evaluates the Fréchet functional `F(p) = ½ ∫ d²(x, p) dμ(x)`
//! exactly for atomic measures, piecewise-constant densities and mixtures of
//! the two, finds all of its local and global minimizers, certifies
//! uniqueness of a global minimizer, and checks a sufficient condition for
//! uniqueness together with the resulting concentration bounds for empirical
//! means.

pub mod consistency;
pub mod criterion;
pub mod error;
pub mod frechet;
pub mod geometry;
pub mod input;
pub mod measures;
pub mod solver;
pub mod uniqueness;

pub use error::{Error, Result};
pub use frechet::{derivative, functional, g_centered, FrechetEvaluation};
pub use geometry::{arclength_distance, exp_map, log_map, wrap, Angle, CirclePoint};
pub use measures::{CircularMeasure, GridDensity, LineMeasure};
pub use solver::{critical_points, frechet_mean, frechet_mean_in_chart, grid_oracle, CriticalPoint, MeanResult};
pub use uniqueness::{certify, find_mean_and_certify, UniquenessCertificate};
pub use criterion::{alpha_delta, guarantee_existence, mean_bound, phi_alpha, satisfies_p, translate, weaken, CriterionParams};
pub use consistency::{concentration_envelope, rate_envelope, rho_from_gap, simulate, ConcentrationReport, SimulationConfig};
