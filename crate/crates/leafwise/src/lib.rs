//! Numerical certification engine for the leafwise symplectic geometry of
//! the Fermat-type cubic (and Ẽ₇, Ẽ₈) Milnor fibrations: chart-based
//! exterior calculus, Heisenberg nil-manifold models, link sampling and
//! Newton retraction, Liouville/symplectization identities, and the
//! end-periodic cutoff construction with its certified volume identity.

// index loops over small fixed-size frames and Jacobians read better than
// iterator chains in the numeric kernels
#![allow(clippy::needless_range_loop)]
#![allow(clippy::type_complexity)]

pub mod config;
pub mod endperiodic;
pub mod error;
pub mod exterior;
pub mod milnor;
pub mod nil;
pub mod report;
pub mod suite;
mod suite_checks;
pub mod symplectic;

pub use error::{Error, Result};
