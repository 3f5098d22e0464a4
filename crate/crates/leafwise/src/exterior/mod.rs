//! Chart-based exterior calculus with exact first derivatives.
//!
//! Everything else in the crate expresses its forms and checks through this
//! module: sparse differential forms over named charts, wedge, exterior
//! derivative (dual-number partials), pullback, pointwise evaluation and the
//! 4-dimensional Pfaffian certificate.

pub mod chart;
pub mod dual;
pub mod expr;
pub mod form;

pub use chart::{Chart, ChartMap, Domain, ScalarField, TangentVector};
pub use dual::{smooth_step, Dual, Real};
pub use expr::Field;
pub use form::{DifferentialForm, IndexSet};
