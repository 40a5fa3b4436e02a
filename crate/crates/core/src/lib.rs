//! Exact contextuality analysis for cyclic systems of ±1 measurements.
//!
//! A cyclic system measures properties `q_1..q_n` in the contexts
//! `(q_1,q_2), ..., (q_n,q_1)`. From the observed bunch expectations the
//! crate computes `Δ0`, `Δmin` and the contextuality measure
//! `CNTX = Δmin - Δ0` in closed form ([`criteria`]), and recomputes `Δmin`
//! by exact linear programming over all couplings ([`lp_oracle`]) with an
//! explicit witness pmf.
//!
//! All arithmetic is exact ([`Rational`]).

pub mod criteria;
pub mod error;
pub mod feasibility;
pub mod ingest;
pub mod lp_oracle;
pub mod model;
pub mod rational;
pub mod sampling;
pub mod smax;

pub use criteria::{
    canonicalize_signs, cntx, criterion_conjectured, criterion_main, delta_min_formula, delta_zero,
    optimal_connection_vector, ConnectionCase,
};
pub use error::{Error, Result};
pub use lp_oracle::Oracle;
pub use model::{
    delta_of_coupling, validate_system, AnalysisReport, Branch, BunchStats, ConnectionVector,
    CouplingPMF, SystemSpec, Violation,
};
pub use rational::Rational;
