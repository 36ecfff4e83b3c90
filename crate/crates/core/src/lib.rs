//! Data-driven distributionally robust multistage linear optimization.
//!
//! Stages are linear programs whose uncertainty enters either the objective
//! or the right-hand side. Cost-to-go functions are bracketed by cutting
//! planes from below and Lipschitz envelopes from above, and refined by a
//! dual dynamic programming loop until the two bounds meet.

pub mod approx;
pub mod ddp;
pub mod error;
pub mod evaluation;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod problems;
pub(crate) mod serde_inf;
pub mod stage;

pub use approx::{gap_at, Cut, LowerApprox, UpperApprox};
pub use ddp::{run, DdpConfig, ForwardMode, SolveReport, SolveStatus};
pub use error::{DrmcoError, Result};
pub use measures::{DiscreteMeasure, Metric};
pub use model::{
    growth_rate, oracle_kind, recommended_regularization, validate, AmbiguityKind, AmbiguitySpec, Bounds, ConstraintBlock,
    DeclaredConstants, Instance, MomentConstraint, OracleKind, RowSense, StageModel, UncertaintySet, Violation,
};
pub use oracle::{Forward, OracleContext, OracleOutput};
