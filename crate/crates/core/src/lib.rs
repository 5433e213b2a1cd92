//! Tacit collusion in an N-firm market with costly sequential consumer search.
//!
//! The crate evaluates the reservation-price integral `G(λ;N)` and its
//! derivatives by adaptive quadrature, builds the profit and critical
//! discount factor quantities on top of it, locates the model's thresholds
//! with a bracketing solver, and numerically certifies the analytical
//! identities, limits and inequalities that the comparative statics of the
//! critical discount factor rest on.

pub mod error;
pub mod model;
pub mod plot;
pub mod quadrature;
pub mod solvers;
pub mod sweep;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use model::{EquilibriumPoint, GDerivatives, MarketParams, MarketShape, Profits, Regime};
pub use quadrature::{integrate, IntegralResult, IntegrationConfig};
pub use solvers::{find_root, Bracket, RootNote, RootResult, SolverConfig};
pub use table::{Cell, CurveTable};
