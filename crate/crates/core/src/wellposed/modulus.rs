use super::checks::{check_property, Property, Status};
use super::{NeighborhoodSpec, RateFunction};
use crate::cones::DirectionSet;
use crate::error::{Error, Result};
use crate::maps::{BasePoint, SetValuedMap};

pub const C_MIN: f64 = 1e-6;
pub const C_MAX: f64 = 1e6;
pub const BISECTION_RATIO: f64 = 1.05;

/// Bracket `[c_lo, c_hi]` of a modulus threshold together with the side on
/// which the property holds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusEstimate {
    pub property: Property,
    pub rate: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    /// `true` when the property holds for `c ≤ c_lo` (openness); `false`
    /// when it holds for `c ≥ c_hi` (regularity, continuity).
    pub passes_below: bool,
    pub trace: Vec<(f64, Status)>,
}

/// Deterministic threshold search for a predicate that is true on `(0, c*)`
/// and false beyond. Starts at 1, expands by factors of 4 within
/// `[C_MIN, C_MAX]`, then bisects geometrically until `hi/lo ≤ ratio`.
///
/// Returns `(lo, hi)` with `below(lo)` and `!below(hi)`; `lo = 0` if no
/// tested value satisfies the predicate and `hi = ∞` if all do.
pub fn bracket_threshold(ratio: f64, mut below: impl FnMut(f64) -> Result<bool>) -> Result<(f64, f64)> {
    let (mut lo, mut hi);
    if below(1.0)? {
        lo = 1.0;
        loop {
            let c = lo * 4.0;
            if c > C_MAX {
                return Ok((lo, f64::INFINITY));
            }
            if below(c)? {
                lo = c;
            } else {
                hi = c;
                break;
            }
        }
    } else {
        hi = 1.0;
        loop {
            let c = hi / 4.0;
            if c < C_MIN {
                return Ok((0.0, hi));
            }
            if below(c)? {
                lo = c;
                break;
            }
            hi = c;
        }
    }
    while hi / lo > ratio {
        let mid = (lo * hi).sqrt();
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Brackets the modulus `c` of `φ(t) = c·tʳ` for the given property.
/// INCONCLUSIVE grid verdicts count as "does not hold".
#[allow(clippy::too_many_arguments)]
pub fn estimate_modulus(
    property: Property,
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    r: f64,
    spec: &NeighborhoodSpec,
) -> Result<ModulusEstimate> {
    if property == Property::Open && r < 1.0 {
        return Err(Error::InvalidRate(format!("openness rate r = {r} must be at least 1")));
    }
    let passes_below = property == Property::Open;
    let mut trace = Vec::new();
    let (c_lo, c_hi) = bracket_threshold(BISECTION_RATIO, |c| {
        let phi = RateFunction::power(c, r)?;
        let v = check_property(property, f, base, l, m, &phi, spec)?;
        trace.push((c, v.status));
        let holds = v.status == Status::Holds;
        Ok(if passes_below { holds } else { !holds })
    })?;
    Ok(ModulusEstimate { property, rate: r, c_lo, c_hi, passes_below, trace })
}
