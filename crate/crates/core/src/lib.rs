//! Boolean constraint languages under a degree bound: classification,
//! equality-simulation gadgets, exact counting and the count-preserving
//! reductions between bounded-degree `#CSP` and hypergraph independent-set
//! counting.

pub mod classify;
pub mod counting;
pub mod error;
pub mod formats;
pub mod gadgets;
pub mod instance;
pub mod language;
pub mod ppp;
pub mod reductions;
pub mod relation;
pub mod report;

pub use error::{Error, ParseError, Result, SimulationFailure};
pub use instance::{Assignment, Constraint, CspInstance, Hypergraph, Term};
pub use language::ConstraintLanguage;
pub use relation::{standard, BitTuple, BooleanRelation};
