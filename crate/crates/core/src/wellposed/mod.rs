//! Directional openness, regularity and continuity: grid verifiers, modulus
//! estimation and the three-way equivalence harness.

pub mod catalog;
mod checks;
mod equivalence;
pub mod grid;
mod modulus;
mod rate;
mod spec;

pub use checks::{
    check_continuity, check_openness, check_property, check_regularity, GridMeta, Property, Status, Verdict, Witness,
};
pub use equivalence::{equivalence_harness, Agreement, EquivalenceReport};
pub use modulus::{bracket_threshold, estimate_modulus, ModulusEstimate, BISECTION_RATIO, C_MAX, C_MIN};
pub use rate::RateFunction;
pub use spec::{geometric_scales, NeighborhoodSpec};

#[cfg(test)]
mod tests;
