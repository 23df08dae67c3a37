//! Transformation monoids: generation, orbits, closure, cosets,
//! distinguished elements and monoid homomorphisms.

mod hom;
mod monoid;
mod orbit;
mod special;

pub use hom::{
    search_monoid_homs, verify_monoid_hom, HomVerdict, MonoidHom, ALL_PAIRS_LIMIT,
    SEARCH_SOURCE_CAP,
};
pub use monoid::{generate, TransformationMonoid};
pub use orbit::{closure, is_closed, is_closed_under, orbit, ClosureWitness};
pub use special::{
    coset_asymmetry, right_cosets, sandwich_check, special_elements, SandwichReport,
    SpecialElements,
};
