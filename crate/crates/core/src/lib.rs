//! Directional well-posedness of set-valued maps between finite-dimensional
//! spaces: minimal time functions, openness/regularity/continuity checks,
//! directional coderivatives, variations and a finite Ekeland principle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coderiv;
pub mod cones;
pub mod ekeland;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod maps;
pub mod polyhedron;
pub mod sampling;
pub mod variation;
pub mod wellposed;

pub use coderiv::{check_criterion, CriterionReport, CriterionSampling, NormalConeRep, NormalKind};
pub use cones::{minimal_time, support_over_cap, DirectionSet, MinimalTimeValue, PolyhedralCone, Region};
pub use ekeland::{directional_ekeland, refine_preimage, EkelandInstance, RefinementTrace};
pub use error::{Error, Result};
pub use maps::{BasePoint, SetValuedMap};
pub use polyhedron::Polyhedron;
pub use variation::{variation_membership, variation_modulus, VariationModulus, VariationProbe};
pub use wellposed::{NeighborhoodSpec, RateFunction, Status, Verdict};
