//! Exact and Monte Carlo verification of information-theoretic
//! generalization identities for Gibbs-type meta-learning algorithms.
//!
//! The crate is organised bottom-up:
//!
//! - [`info`]: divergences and (conditional) information measures,
//! - [`gibbs`]: Gibbs posteriors on finite and quadratic hypothesis spaces,
//! - [`env`]: finite task environments, enumeration and seeded sampling,
//! - [`meta`]: the joint-training meta Gibbs algorithm and its risks,
//! - [`mean_est`]: the Gaussian mean-estimation closed forms,
//! - [`super_task`]: the super-sample/super-task construction,
//! - [`bounds`]: distribution-free upper bounds and rate sweeps.

pub mod bounds;
pub mod env;
pub mod error;
pub mod gibbs;
pub mod info;
pub mod mean_est;
pub mod meta;
pub mod numeric;
pub mod presets;
pub mod rng;
pub mod super_task;

pub use error::{Error, Result};
pub use info::{Axis, DiscreteDist, GaussianChannel, GaussianDist, InfoKind, InfoTriple, JointDist};
