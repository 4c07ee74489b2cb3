//! Grid verifiers for directional openness, regularity and continuity.

use rayon::prelude::*;

use super::grid::{ball_grid, graph_points, y_density};
use super::{NeighborhoodSpec, RateFunction};
use crate::cones::{self, minimal_time, DirectionSet};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::maps::{BasePoint, SetValuedMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    Open,
    Regular,
    Continuous,
    /// Variation criterion verdicts.
    Variation,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Open => "open",
            Property::Regular => "regular",
            Property::Continuous => "continuous",
            Property::Variation => "variation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Holds => "HOLDS",
            Status::Fails => "FAILS",
            Status::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// A grid record that violates (or sits on the boundary of) the property.
///
/// * open: `lhs = T_L(x, F⁻¹(probe))` against `rhs = t`, probe `y'` in the
///   directional target ball;
/// * regular: `lhs = T_L(x, F⁻¹(y))` against `rhs = ψ(T_M(y, F(x)))`, probe = `y`;
/// * continuous: `lhs = T_M(y, F(x'))` against `rhs = ψ(T_L(x', x))`, probe = `x'`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Option<f64>,
    pub probe: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`; positive for failures.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMeta {
    pub rho_x: f64,
    pub rho_y: f64,
    pub epsilon: f64,
    pub t_count: usize,
    pub t_min: f64,
    pub grid_density: usize,
    pub graph_points: usize,
    pub evaluations: usize,
    pub retries_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub property: Property,
    pub rate: String,
    pub status: Status,
    /// Present exactly when `status` is not `Holds`.
    pub witness: Option<Witness>,
    pub meta: GridMeta,
}

impl Verdict {
    pub fn holds_on_grid(&self) -> bool {
        self.status == Status::Holds
    }
}

enum Outcome {
    Pass,
    Boundary(Witness),
    Fail(Witness),
}

struct Task {
    x: Vec<f64>,
    y: Vec<f64>,
    t: Option<f64>,
    probe: Vec<f64>,
}

fn aggregate(property: Property, rate: &RateFunction, outcomes: Vec<Outcome>, meta: GridMeta) -> Verdict {
    let mut boundary = None;
    for o in outcomes {
        match o {
            Outcome::Fail(w) => {
                return Verdict { property, rate: rate.label(), status: Status::Fails, witness: Some(w), meta }
            }
            Outcome::Boundary(w) if boundary.is_none() => boundary = Some(w),
            _ => {}
        }
    }
    let status = if boundary.is_some() { Status::Inconclusive } else { Status::Holds };
    Verdict { property, rate: rate.label(), status, witness: boundary, meta }
}

fn meta(spec: &NeighborhoodSpec, graph_points: usize, evaluations: usize) -> GridMeta {
    GridMeta {
        rho_x: spec.rho_x,
        rho_y: spec.rho_y,
        epsilon: spec.epsilon,
        t_count: spec.t_values.len(),
        t_min: *spec.t_values.last().expect("validated"),
        grid_density: spec.grid_density,
        graph_points,
        evaluations,
        retries_used: 0,
    }
}

fn validate(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    spec: &NeighborhoodSpec,
) -> Result<()> {
    check_dim(f.n, l.dim())?;
    check_dim(f.m, m.dim())?;
    check_dim(f.n, base.x.len())?;
    check_dim(f.m, base.y.len())?;
    spec.validate()
}

fn with_retries(spec: &NeighborhoodSpec, mut run: impl FnMut(&NeighborhoodSpec) -> Result<Verdict>) -> Result<Verdict> {
    let mut s = spec.clone();
    let mut v = run(&s)?;
    let mut k = 0;
    while v.status == Status::Fails && k < spec.retries {
        s = s.halved();
        k += 1;
        v = run(&s)?;
    }
    v.meta.retries_used = k;
    Ok(v)
}

/// `B(y, φ(t)) ∩ [y + cone M] ⊆ F(B(x, t) ∩ [x + cone L])` over graph points
/// near the base, every `t` in the spec and sampled targets `y'`.
pub fn check_openness(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    phi: &RateFunction,
    spec: &NeighborhoodSpec,
) -> Result<Verdict> {
    validate(f, base, l, m, spec)?;
    let finv = f.inverse();
    with_retries(spec, |spec| {
        let points = graph_points(f, base, spec);
        let dirs = m.sample(spec.target_dirs);
        let fractions = spec.radial_fractions();
        let mut tasks = Vec::new();
        for (x, y) in &points {
            for &t in &spec.t_values {
                let radius = phi.eval(t);
                for w in &dirs {
                    for &fr in &fractions {
                        tasks.push(Task {
                            x: x.clone(),
                            y: y.clone(),
                            t: Some(t),
                            probe: linalg::axpy(y, fr * radius, w),
                        });
                    }
                }
            }
        }
        let outcomes = tasks
            .par_iter()
            .map(|task| -> Result<Outcome> {
                let t = task.t.expect("openness task has a scale");
                let lhs = minimal_time(l, &task.x, &finv.values_at(&task.probe))?.value;
                let margin = t - lhs;
                let witness = || Witness {
                    x: task.x.clone(),
                    y: task.y.clone(),
                    t: task.t,
                    probe: task.probe.clone(),
                    lhs,
                    rhs: t,
                    violation: lhs - t,
                };
                Ok(if margin > spec.slack {
                    Outcome::Pass
                } else if margin < -spec.slack {
                    Outcome::Fail(witness())
                } else {
                    Outcome::Boundary(witness())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = tasks.len();
        Ok(aggregate(Property::Open, phi, outcomes, meta(spec, points.len(), n)))
    })
}

fn compare(task: &Task, lhs: f64, rhs: f64, slack: f64) -> Outcome {
    if lhs.is_infinite() && rhs.is_infinite() {
        return Outcome::Pass;
    }
    let violation = lhs - rhs;
    if violation <= slack {
        Outcome::Pass
    } else {
        Outcome::Fail(Witness {
            x: task.x.clone(),
            y: task.y.clone(),
            t: task.t,
            probe: task.probe.clone(),
            lhs,
            rhs,
            violation,
        })
    }
}

/// `T_L(x, F⁻¹(y)) ≤ ψ(T_M(y, F(x)))` for grid `(x, y) ∈ U × V` with
/// `T_M(y, F(x)) < ε`, plus probes `y = y₀ − f·ψ⁻¹(t)·u` off graph points.
pub fn check_regularity(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    psi: &RateFunction,
    spec: &NeighborhoodSpec,
) -> Result<Verdict> {
    validate(f, base, l, m, spec)?;
    let finv = f.inverse();
    let psi_inv = psi.inverse();
    with_retries(spec, |spec| {
        let in_v = |y: &[f64]| linalg::dist(y, &base.y) < spec.rho_y;
        let xs = ball_grid(&base.x, spec.rho_x, spec.grid_density);
        let ys = ball_grid(&base.y, spec.rho_y, y_density(spec.grid_density, f.m));
        let mut tasks = Vec::new();
        for x in &xs {
            for y in &ys {
                tasks.push(Task { x: x.clone(), y: y.clone(), t: None, probe: y.clone() });
            }
        }
        let points = graph_points(f, base, spec);
        let dirs = m.sample(spec.target_dirs);
        let fractions = spec.radial_fractions();
        for (x0, y0) in &points {
            for &t in &spec.t_values {
                let s = psi_inv.eval(t);
                for u in &dirs {
                    for &fr in &fractions {
                        let y = linalg::axpy(y0, -fr * s, u);
                        if in_v(&y) {
                            tasks.push(Task { x: x0.clone(), y: y.clone(), t: Some(t), probe: y });
                        }
                    }
                }
            }
        }
        let outcomes = tasks
            .par_iter()
            .map(|task| -> Result<Outcome> {
                let tm = minimal_time(m, &task.y, &f.values_at(&task.x))?.value;
                if !(tm < spec.epsilon) {
                    return Ok(Outcome::Pass);
                }
                let lhs = minimal_time(l, &task.x, &finv.values_at(&task.y))?.value;
                Ok(compare(task, lhs, psi.eval(tm), spec.slack))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = tasks.len();
        Ok(aggregate(Property::Regular, psi, outcomes, meta(spec, points.len(), n)))
    })
}

/// `T_M(y, F(x')) ≤ ψ(T_L(x', x))` for `x, x' ∈ U`, `y ∈ F(x) ∩ V`, plus
/// probes `x' = x − f·ψ⁻¹(t)·u` with `u ∈ L`.
pub fn check_continuity(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    psi: &RateFunction,
    spec: &NeighborhoodSpec,
) -> Result<Verdict> {
    validate(f, base, l, m, spec)?;
    let psi_inv = psi.inverse();
    with_retries(spec, |spec| {
        let in_u = |x: &[f64]| linalg::dist(x, &base.x) < spec.rho_x;
        let xs = ball_grid(&base.x, spec.rho_x, spec.grid_density);
        let points = graph_points(f, base, spec);
        let dirs = l.sample(spec.target_dirs);
        let fractions = spec.radial_fractions();
        let mut tasks = Vec::new();
        for (x, y) in &points {
            for xp in &xs {
                tasks.push(Task { x: x.clone(), y: y.clone(), t: None, probe: xp.clone() });
            }
            for &t in &spec.t_values {
                let s = psi_inv.eval(t);
                for u in &dirs {
                    for &fr in &fractions {
                        let xp = linalg::axpy(x, -fr * s, u);
                        if in_u(&xp) {
                            tasks.push(Task { x: x.clone(), y: y.clone(), t: Some(t), probe: xp });
                        }
                    }
                }
            }
        }
        let outcomes = tasks
            .par_iter()
            .map(|task| -> Result<Outcome> {
                let tl = cones::time_to_point(l, &task.probe, &task.x, cones::DEFAULT_TOL).value;
                if tl.is_infinite() {
                    return Ok(Outcome::Pass);
                }
                let lhs = minimal_time(m, &task.y, &f.values_at(&task.probe))?.value;
                Ok(compare(task, lhs, psi.eval(tl), spec.slack))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = tasks.len();
        Ok(aggregate(Property::Continuous, psi, outcomes, meta(spec, points.len(), n)))
    })
}

/// Dispatch on the property.
pub fn check_property(
    property: Property,
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    phi: &RateFunction,
    spec: &NeighborhoodSpec,
) -> Result<Verdict> {
    match property {
        Property::Open => check_openness(f, base, l, m, phi, spec),
        Property::Regular => check_regularity(f, base, l, m, phi, spec),
        Property::Continuous => check_continuity(f, base, l, m, phi, spec),
        Property::Variation => {
            Err(Error::InvalidParameter("variation verdicts come from check_variation_criterion".into()))
        }
    }
}
