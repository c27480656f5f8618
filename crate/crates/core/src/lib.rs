//! Randomness certification from a bound on the spin of a system rotated in the plane.
//!
//! A preparation device emits a system whose SO(2) charge is at most `J`; a
//! measurement device rotates it by `0` or `α` and reads one bit. The observed
//! biases `(E1, E2)` that quantum theory allows under this bound form a convex
//! set with a closed-form boundary. Correlations outside the classical diagonal
//! certify private randomness, quantified by the entropy bound `H*`.
//!
//! Modules:
//!
//! * [`sets`]: membership tests and boundary curves of every correlation set;
//! * [`quantum`]: finite-dimensional quantum realizations and extremal models;
//! * [`boxes`]: rotation boxes as bounded trigonometric polynomials;
//! * [`certify`]: the entropy functional, `H*` and its robustness bounds;
//! * [`coherent`]: the coherent-state truncation error model;
//! * [`verify`]: seeded Monte-Carlo suites that check the closed forms.

pub mod boxes;
pub mod certify;
pub mod coherent;
pub mod error;
pub mod lp;
pub mod quantum;
pub mod rng;
pub mod sets;
pub mod types;
pub mod verify;

pub use error::{Error, RepresentationError, Result};
pub use types::{Angle, Correlation, ErrorBudget, ScenarioParams, SpinBound};
