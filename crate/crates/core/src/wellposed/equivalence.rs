use super::checks::{check_continuity, check_openness, check_regularity, Status, Verdict};
use super::{NeighborhoodSpec, RateFunction};
use crate::cones::{negate, DirectionSet};
use crate::error::Result;
use crate::maps::{BasePoint, SetValuedMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

impl Agreement {
    pub fn name(self) -> &'static str {
        match self {
            Agreement::Agree => "AGREE",
            Agreement::Disagree => "DISAGREE",
            Agreement::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// `F` open w.r.t. `(L, M)` with `φ`.
    pub open: Verdict,
    /// `F` regular w.r.t. `(L, −M)` with `φ⁻¹`.
    pub regular: Verdict,
    /// `F⁻¹` continuous around `(ȳ, x̄)` w.r.t. `(−M, L)` with `φ⁻¹`.
    pub continuous: Verdict,
    pub agreement: Agreement,
    /// Set when the reciprocal modulus `1/c` differs from the exact inverse
    /// modulus `c^{−1/r}`; the checks use the exact inverse.
    pub rate_note: Option<String>,
}

impl EquivalenceReport {
    pub fn verdicts(&self) -> [&Verdict; 3] {
        [&self.open, &self.regular, &self.continuous]
    }
}

/// Runs the three equivalent statements on one grid and compares them.
pub fn equivalence_harness(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    phi: &RateFunction,
    spec: &NeighborhoodSpec,
) -> Result<EquivalenceReport> {
    let psi = phi.inverse();
    let neg_m = negate(m);
    let open = check_openness(f, base, l, m, phi, spec)?;
    let regular = check_regularity(f, base, l, &neg_m, &psi, spec)?;
    let finv = f.inverse();
    let inv_base = BasePoint { x: base.y.clone(), y: base.x.clone() };
    let swapped = NeighborhoodSpec { rho_x: spec.rho_y, rho_y: spec.rho_x, ..spec.clone() };
    let continuous = check_continuity(&finv, &inv_base, &neg_m, l, &psi, &swapped)?;

    let verdicts = [&open, &regular, &continuous];
    let agreement = if verdicts.iter().any(|v| v.status == Status::Inconclusive) {
        Agreement::Inconclusive
    } else if verdicts.iter().all(|v| v.status == open.status) {
        Agreement::Agree
    } else if verdicts.iter().any(|v| v.witness.as_ref().is_some_and(|w| w.violation.abs() <= spec.boundary_band)) {
        Agreement::Inconclusive
    } else {
        Agreement::Disagree
    };
    let rate_note = match phi {
        RateFunction::Power { c, r } if phi.reciprocal_convention_differs() => Some(format!(
            "exact inverse modulus {} differs from reciprocal 1/c = {} at rate 1/r = {}",
            c.powf(-1.0 / r),
            1.0 / c,
            1.0 / r
        )),
        _ => None,
    };
    Ok(EquivalenceReport { open, regular, continuous, agreement, rate_note })
}
