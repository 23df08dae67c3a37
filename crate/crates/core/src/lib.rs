//! Finite relational structures, their endomorphism monoids, and the
//! definability and interpretation questions that those monoids decide.

pub mod acceptance;
pub mod algebra;
pub mod corpus;
pub(crate) mod csp;
pub mod definability;
pub mod demo;
pub mod error;
pub mod interp;
pub mod limits;
pub mod logic;
pub mod maps;
pub mod structure;

pub use algebra::{MonoidHom, TransformationMonoid};
pub use error::{Error, Result};
pub use logic::{Formula, Fragment, Term};
pub use maps::{FinMap, MapFilter, MapKind};
pub use structure::{Signature, Structure, Tuple, TupleSet};
