//! The directional Ekeland principle on finite sets and the iterative
//! preimage refinement behind the variation criterion.

use crate::cones::{time_to_point, DirectionSet, PolyhedralCone, Region, DEFAULT_TOL};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm};
use crate::maps::SetValuedMap;

#[derive(Debug, Clone, PartialEq)]
pub struct EkelandInstance {
    /// Points of `Ω ⊂ Rⁿ × Rᵐ`, stored stacked.
    pub points: Vec<Vec<f64>>,
    pub n: usize,
    /// `f` on `Ω`; `+∞` allowed.
    pub values: Vec<f64>,
    pub start: usize,
    pub epsilon: f64,
    pub l: DirectionSet,
    pub m: DirectionSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EkelandResult {
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
    /// Descent moves taken from the start.
    pub moves: usize,
}

/// Outcome of the exhaustive scan of both conclusions at a candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct EkelandCheck {
    /// `f(x₀, y₀) − ε(T_L(x_ε, x₀) + T_M(y_ε, y₀)) − f(x_ε, y_ε)`, must be `≥ 0`.
    pub descent_margin: f64,
    /// `min` over other points of `f(x, y) + ε(T_L(x, x_ε) + T_M(y, y_ε)) − f(x_ε, y_ε)`,
    /// must be `> 0`.
    pub strict_margin: f64,
    /// First point violating the strict inequality, if any.
    pub violator: Option<usize>,
}

impl EkelandCheck {
    pub fn passes(&self) -> bool {
        self.descent_margin >= 0.0 && self.strict_margin > 0.0
    }
}

impl EkelandInstance {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidParameter("Ω is empty".into()));
        }
        if self.values.len() != self.points.len() {
            return Err(Error::Dimension { expected: self.points.len(), got: self.values.len() });
        }
        check_dim(self.n, self.l.dim())?;
        for p in &self.points {
            check_dim(self.n + self.m.dim(), p.len())?;
        }
        if self.start >= self.points.len() {
            return Err(Error::InvalidParameter(format!("start index {} out of range", self.start)));
        }
        if !self.values[self.start].is_finite() {
            return Err(Error::InvalidParameter("f must be finite at the start point".into()));
        }
        if self.values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidParameter("f must be bounded below and not NaN".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        for d in [&self.l, &self.m] {
            if !d.is_convex() {
                return Err(Error::NonConvexCone(format!("{d:?}")));
            }
        }
        Ok(())
    }

    /// `T_L(a_x, b_x) + T_M(a_y, b_y)`: time for `a` to reach `b`.
    pub fn joint_time(&self, a: usize, b: usize) -> f64 {
        let (ax, ay) = self.points[a].split_at(self.n);
        let (bx, by) = self.points[b].split_at(self.n);
        time_to_point(&self.l, ax, bx, DEFAULT_TOL).value + time_to_point(&self.m, ay, by, DEFAULT_TOL).value
    }

    /// `f(p) + ε·T(p → c)`, the penalized value seen from `c`.
    fn penalized(&self, p: usize, c: usize) -> f64 {
        let t = self.joint_time(p, c);
        if t.is_infinite() {
            f64::INFINITY
        } else {
            self.values[p] + self.epsilon * t
        }
    }

    /// Exhaustive scan of both conclusions at candidate `k`.
    pub fn verify(&self, k: usize) -> EkelandCheck {
        let t0 = self.joint_time(k, self.start);
        let descent_margin = if t0.is_infinite() {
            f64::NEG_INFINITY
        } else {
            self.values[self.start] - self.epsilon * t0 - self.values[k]
        };
        let mut strict_margin = f64::INFINITY;
        let mut violator = None;
        for p in (0..self.points.len()).filter(|&p| p != k) {
            let s = self.penalized(p, k) - self.values[k];
            if s <= 0.0 && violator.is_none() {
                violator = Some(p);
            }
            strict_margin = strict_margin.min(s);
        }
        EkelandCheck { descent_margin, strict_margin, violator }
    }
}

/// Iterated descent: move to the violator of the strict inequality with the
/// smallest `f` (ties lexicographic) until none is left.
pub fn directional_ekeland(inst: &EkelandInstance) -> Result<EkelandResult> {
    inst.validate()?;
    let mut cur = inst.start;
    let mut moves = 0;
    loop {
        let next = (0..inst.points.len()).filter(|&p| p != cur && inst.penalized(p, cur) <= inst.values[cur]).min_by(
            |&a, &b| {
                inst.values[a]
                    .total_cmp(&inst.values[b])
                    .then_with(|| linalg::lex_cmp(&inst.points[a], &inst.points[b]))
            },
        );
        match next {
            Some(p) => {
                cur = p;
                moves += 1;
            }
            None => break,
        }
    }
    let check = inst.verify(cur);
    if !check.passes() {
        return Err(Error::InternalConsistency(format!("Ekeland verifier rejected point {cur}: {check:?}")));
    }
    Ok(EkelandResult { index: cur, point: inst.points[cur].clone(), value: inst.values[cur], moves })
}

/// One application of the covering hypothesis: from `(x, y)` find a graph
/// point within `radius` of `x` along `cone C` whose value is as close to
/// `target` as the step allows.
pub trait CoveringStep {
    fn step(
        &self,
        f: &SetValuedMap,
        c: &DirectionSet,
        x: &[f64],
        y: &[f64],
        target: &[f64],
        radius: f64,
    ) -> Result<Option<(Vec<f64>, Vec<f64>)>>;
}

/// Exact query: the target itself when reachable, otherwise the reachable
/// point furthest along the segment from `y` to the target.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactCovering;

/// Moves only `factor` of the way towards the exact preimage of the target.
#[derive(Debug, Clone, Copy)]
pub struct DampedCovering {
    pub factor: f64,
}

fn reach(f: &SetValuedMap, c: &DirectionSet, x: &[f64], y: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
    let v = crate::cones::minimal_time_tol(c, x, &f.preimage(y), 1e-13)?;
    if !v.is_finite() {
        return Ok(None);
    }
    Ok(match (v.attaining_time, v.attaining_direction) {
        (Some(t), Some(d)) => Some((t, linalg::axpy(x, t, &d))),
        _ => None,
    })
}

impl CoveringStep for ExactCovering {
    fn step(
        &self,
        f: &SetValuedMap,
        c: &DirectionSet,
        x: &[f64],
        y: &[f64],
        target: &[f64],
        radius: f64,
    ) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let within = |z: &[f64]| -> Result<Option<Vec<f64>>> {
            Ok(reach(f, c, x, z)?.filter(|(t, _)| *t <= radius * (1.0 + 1e-12)).map(|(_, p)| p))
        };
        if let Some(p) = within(target)? {
            return Ok(Some((p, target.to_vec())));
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if within(&linalg::axpy(y, mid, &linalg::sub(target, y)))?.is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z = linalg::axpy(y, lo, &linalg::sub(target, y));
        Ok(within(&z)?.map(|p| (p, z)))
    }
}

impl CoveringStep for DampedCovering {
    fn step(
        &self,
        f: &SetValuedMap,
        c: &DirectionSet,
        x: &[f64],
        _y: &[f64],
        target: &[f64],
        radius: f64,
    ) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let Some((t, p)) = reach(f, c, x, target)? else {
            return Ok(None);
        };
        if t > radius * (1.0 + 1e-12) {
            return Ok(None);
        }
        let xn = linalg::axpy(x, self.factor, &linalg::sub(&p, x));
        Ok(f.values_at(&xn).nearest(target).map(|yn| (xn, yn)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTrace {
    /// `(x_i, y_i)` for `i = 0, 1, ...`, starting at `(x, y)`.
    pub iterates: Vec<(Vec<f64>, Vec<f64>)>,
    /// `‖x_i − x_{i−1}‖` for `i ≥ 1`.
    pub steps: Vec<f64>,
    /// `α^{(i−1)/r}(1 − α^{1/r})t` for `i ≥ 1`.
    pub step_bounds: Vec<f64>,
    /// `‖y' − y_i‖` for `i ≥ 0`.
    pub residuals: Vec<f64>,
    /// `sup_K‖·‖ · α^i((1 − α^{1/r})t)^r` for `i ≥ 0`.
    pub residual_bounds: Vec<f64>,
    pub final_x: Vec<f64>,
    pub converged: bool,
    /// Iteration cap reached with every bound intact.
    pub extrapolated: bool,
}

impl RefinementTrace {
    /// `step_{i+1} / step_i` over consecutive nonzero steps.
    pub fn step_ratios(&self) -> Vec<f64> {
        self.steps.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineSpec {
    pub r: f64,
    pub alpha: f64,
    pub t: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl RefineSpec {
    pub fn new(r: f64, alpha: f64, t: f64) -> Self {
        Self { r, alpha, t, tol: 1e-10, max_iter: 200 }
    }
}

fn radius_of(k: &Region) -> Result<f64> {
    let mut c: f64 = k.points.iter().map(|p| norm(p)).fold(0.0, f64::max);
    for p in &k.polytopes {
        let v = p.vrep();
        if !v.rays.is_empty() {
            return Err(Error::InvalidParameter("K must be bounded".into()));
        }
        c = v.vertices.iter().map(|z| norm(z)).fold(c, f64::max);
    }
    Ok(c)
}

/// Whether `d ∈ s·K` (within `tol`), `s ≥ 0`.
fn in_scaled(k: &Region, d: &[f64], s: f64, tol: f64) -> bool {
    if s <= f64::MIN_POSITIVE {
        return norm(d) <= tol;
    }
    k.contains(&linalg::scale(d, 1.0 / s), tol / s)
}

/// Builds the sequence `(x_i, y_i)` of the constructive covering argument:
/// `x_i ∈ x_{i−1} + C`, `‖x_i − x_{i−1}‖ ≤ α^{(i−1)/r}(1 − α^{1/r})t` and
/// `y' ∈ y_i + α^i((1 − α^{1/r})t)^r K`, until `‖y' − y_i‖ ≤ tol`.
#[allow(clippy::too_many_arguments)]
pub fn refine_preimage(
    f: &SetValuedMap,
    x: &[f64],
    y: &[f64],
    y_target: &[f64],
    c: &PolyhedralCone,
    k: &Region,
    spec: &RefineSpec,
    covering: &dyn CoveringStep,
) -> Result<RefinementTrace> {
    check_dim(f.n, x.len())?;
    check_dim(f.m, y.len())?;
    check_dim(f.m, y_target.len())?;
    check_dim(f.n, c.dim())?;
    check_dim(f.m, k.dim)?;
    let RefineSpec { r, alpha, t, tol, max_iter } = *spec;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidRate(format!("rate must be positive, got {r}")));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if !f.values_at(x).contains(y, tol) {
        return Err(Error::PointNotInSet { violation: f.values_at(x).distance(y) });
    }
    let cone_dirs = DirectionSet::cap(c.clone())?;
    let k_radius = radius_of(k)?;
    let a_root = alpha.powf(1.0 / r);
    let base = ((1.0 - a_root) * t).powf(r);
    let gap = linalg::sub(y_target, y);
    if !in_scaled(k, &gap, base, tol) {
        return Err(Error::InvalidParameter("y' − y must lie in (1 − α^{1/r})^r t^r K".into()));
    }

    let mut iterates = vec![(x.to_vec(), y.to_vec())];
    let mut steps = Vec::new();
    let mut step_bounds = Vec::new();
    let mut residuals = vec![norm(&gap)];
    let mut residual_bounds = vec![k_radius * base];
    let mut converged = residuals[0] <= tol;
    let mut i = 0;
    while !converged && i < max_iter {
        let (xi, yi) = iterates[i].clone();
        let radius = alpha.powf(i as f64 / r) * (1.0 - a_root) * t;
        let Some((xn, yn)) = covering.step(f, &cone_dirs, &xi, &yi, y_target, radius)? else {
            return Err(Error::CoveringInfeasible { iterate: i, residual: residuals[i], bound: radius });
        };
        i += 1;
        let step = linalg::dist(&xn, &xi);
        let dx = linalg::sub(&xn, &xi);
        let scale_i = alpha.powi(i as i32) * base;
        let res = linalg::dist(y_target, &yn);
        let a6 = step <= radius * (1.0 + 1e-9) + tol && c.contains(&dx, 1e-9 * (1.0 + step));
        let a7 = in_scaled(k, &linalg::sub(y_target, &yn), scale_i, tol);
        if !(a6 && a7) {
            return Err(Error::CoveringInfeasible {
                iterate: i,
                residual: res,
                bound: if a6 { k_radius * scale_i } else { radius },
            });
        }
        steps.push(step);
        step_bounds.push(radius);
        residuals.push(res);
        residual_bounds.push(k_radius * scale_i);
        iterates.push((xn, yn));
        converged = res <= tol;
    }
    let final_x = iterates.last().expect("nonempty").0.clone();
    Ok(RefinementTrace {
        extrapolated: !converged,
        iterates,
        steps,
        step_bounds,
        residuals,
        residual_bounds,
        final_x,
        converged,
    })
}
