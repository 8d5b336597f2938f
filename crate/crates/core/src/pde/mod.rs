//! Discrete Gelfand triples on `Λ = (0, 1)`, the p-Laplace and porous-medium
//! operators, integral drivers and the semi-implicit solver for
//! `du = A(t, u) dt + dI_t(u)`.

mod audit;
mod driver;
mod operator;
mod solver;
mod space;

pub use audit::{audit_assumptions, AuditReport, ConditionSummary, Violation, AUDIT_SLACK};
pub use driver::{
    driver_increment, h5_diagnostic, h6_diagnostic, DriverKind, DriverOperator, H5Row, H5Table, H6Row, H6Table,
};
pub use operator::{AssumptionConstants, GelfandDiscretization, Operator, Psi};
pub use solver::{contraction_audit, solve, BoundAudit, ContractionAudit, NewtonStats, SolveOptions, SolveReport};
pub use space::SpaceGrid;
