//! Exact exterior calculus on the finite jet spaces `J^m(ℝ×ℝ)`.
//!
//! Everything here is a pure function of immutable values, with exact
//! rational coefficients, so identity checks are equality tests on
//! canonical polynomials.

mod context;
mod forms;
mod jet;
mod poly;
mod suite;

pub use context::{AtomDecl, JetContext, DEFAULT_MAX_ORDER};
pub use forms::{
    differential, evaluate_form, evaluate_two_form, exterior_derivative, interior_product, wedge,
    OneForm, TwoForm, VectorField,
};
pub use jet::{
    contact_form, ode_constraint_form, ode_vector_field, project_jet, prolonged_tangent,
    reduce_mod_contact_ideal, structural_curvature, torsion_form, total_derivative, IdealGenerator,
    IdealTerm, JetPoint, ReductionResult, SplitTangent,
};
pub use poly::{rational, AtomRef, CoeffExpr, Coord, Monomial, Var};
pub use suite::{checks_for_order, identity_suite, IdentityCheck};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("index {index} out of range for jet order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("jet order {order} exceeds the limit {limit}")]
    OrderExceedsLimit { order: usize, limit: usize },
    #[error("coordinate {coord} is not in the roster of J^{order}")]
    UnknownCoordinate { coord: String, order: usize },
    #[error("atom {0} is not registered in this context")]
    UnregisteredAtom(String),
    #[error("invalid atom name: {0}")]
    InvalidAtomName(String),
    #[error("objects live on different jet spaces (orders {left} and {right})")]
    ContextMismatch { left: usize, right: usize },
    #[error("forbidden dependence: {0}")]
    ForbiddenDependence(String),
    #[error("identity check failed: {0}")]
    IdentityViolation(String),
}
