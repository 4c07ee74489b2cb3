//! r-th directional variations, the variation criterion for directional
//! openness at rate r and the supremum of admissible moduli.

use rayon::prelude::*;

use crate::cones::DirectionSet;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm};
use crate::maps::{BasePoint, SetValuedMap};
use crate::sampling::sphere_points;
use crate::wellposed::{
    bracket_threshold, geometric_scales, GridMeta, Property, Status, Verdict, Witness, BISECTION_RATIO,
};

const TIME_SLACK: f64 = 1e-9;
const SCAN_STEPS: usize = 16;
const BISECT_STEPS: usize = 30;

/// Finite surrogate for "all sequences `t_k → 0`, `(x_k, y_k) → (x̄, ȳ)`":
/// every scale is paired with the base point and with graph points at
/// distance `t_k` and `2t_k` from `x̄` along `base_dirs` sphere directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    /// Decreasing positive scales.
    pub scales: Vec<f64>,
    pub base_dirs: usize,
    /// Directions of `M` used to search for `v_k` with `v ∈ v_k + cone M`.
    pub m_dirs: usize,
    pub tol: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self { scales: geometric_scales(0.25, 8), base_dirs: 8, m_dirs: 16, tol: 1e-6 }
    }
}

impl ProbeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty()
            || self.scales.iter().any(|t| !(t.is_finite() && *t > 0.0))
            || self.scales.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidParameter("scales must be positive and strictly decreasing".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParameter("tol must be nonnegative".into()));
        }
        Ok(())
    }

    /// The same spec with one extra halving of the finest scale.
    pub fn refined(&self) -> Self {
        let mut s = self.clone();
        let last = *s.scales.last().expect("validated");
        s.scales.push(last / 2.0);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `v_k` with `v ∈ v_k + cone M` closest to `v`.
    pub witness: Vec<f64>,
    /// `‖v − v_k‖`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationProbe {
    pub v: Vec<f64>,
    pub r: f64,
    pub scales: Vec<f64>,
    pub records: Vec<ScaleRecord>,
    pub max_residual: f64,
    pub member: bool,
}

struct Ctx<'a> {
    f: &'a SetValuedMap,
    l: &'a DirectionSet,
    r: f64,
    m_dirs: Vec<Vec<f64>>,
}

impl Ctx<'_> {
    /// `y + tʳ w ∈ F(B̄(x, t) ∩ [x + cone L])`.
    fn reaches(&self, x: &[f64], y: &[f64], t: f64, w: &[f64]) -> Result<bool> {
        let target = linalg::axpy(y, t.powf(self.r), w);
        let time = self.f.ball_preimage_time(self.l, x, &target)?;
        Ok(time <= t * (1.0 + TIME_SLACK) + 1e-12)
    }

    fn search_dirs(&self, v: &[f64]) -> Vec<Vec<f64>> {
        let mut dirs = self.m_dirs.clone();
        if let Some(u) = linalg::normalized(v) {
            dirs.push(u);
        }
        dirs
    }

    /// Smallest `σ ∈ [0, ‖v‖]` along some `d ∈ M` with `v − σd` reachable.
    fn residual(&self, x: &[f64], y: &[f64], t: f64, v: &[f64]) -> Result<(f64, Vec<f64>)> {
        if self.reaches(x, y, t, v)? {
            return Ok((0.0, v.to_vec()));
        }
        let nv = norm(v);
        let mut best = (nv, vec![0.0; v.len()]);
        for d in self.search_dirs(v) {
            let w = |s: f64| linalg::axpy(v, -s, &d);
            let mut prev = 0.0;
            for j in 1..=SCAN_STEPS {
                let s = nv * j as f64 / SCAN_STEPS as f64;
                if s >= best.0 {
                    break;
                }
                if self.reaches(x, y, t, &w(s))? {
                    let (mut lo, mut hi) = (prev, s);
                    for _ in 0..BISECT_STEPS {
                        let mid = 0.5 * (lo + hi);
                        if self.reaches(x, y, t, &w(mid))? {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    best = (hi, w(hi));
                    break;
                }
                prev = s;
            }
        }
        Ok(best)
    }

    /// Whether some `v − σd` with `σ ≤ bound` is reachable, testing `σ = 0`
    /// and `σ = bound` only.
    fn within(&self, x: &[f64], y: &[f64], t: f64, v: &[f64], bound: f64) -> Result<bool> {
        if self.reaches(x, y, t, v)? {
            return Ok(true);
        }
        if bound <= 0.0 {
            return Ok(false);
        }
        for d in self.search_dirs(v) {
            if self.reaches(x, y, t, &linalg::axpy(v, -bound, &d))? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// `(t, x_k, y_k)` of the finite sequence surrogate.
type SeqPoint = (f64, Vec<f64>, Vec<f64>);

fn sequence_points(f: &SetValuedMap, base: &BasePoint, spec: &ProbeSpec) -> Vec<SeqPoint> {
    let dirs = sphere_points(f.n, spec.base_dirs);
    let mut out = Vec::new();
    for &t in &spec.scales {
        out.push((t, base.x.clone(), base.y.clone()));
        for s in [t, 2.0 * t] {
            for u in &dirs {
                let x = linalg::axpy(&base.x, s, u);
                if let Some(y) = f.values_at(&x).nearest(&base.y) {
                    out.push((t, x, y));
                }
            }
        }
    }
    out
}

fn validate(f: &SetValuedMap, l: &DirectionSet, m: &DirectionSet, r: f64, spec: &ProbeSpec) -> Result<()> {
    check_dim(f.n, l.dim())?;
    check_dim(f.m, m.dim())?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidRate(format!("rate must be positive, got {r}")));
    }
    spec.validate()
}

fn context<'a>(f: &'a SetValuedMap, l: &'a DirectionSet, m: &DirectionSet, r: f64, spec: &ProbeSpec) -> Ctx<'a> {
    Ctx { f, l, r, m_dirs: m.sample(spec.m_dirs) }
}

/// Membership of `v` in the r-th directional variation, with per-scale
/// evidence.
#[allow(clippy::too_many_arguments)]
pub fn variation_membership(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    r: f64,
    v: &[f64],
    spec: &ProbeSpec,
) -> Result<VariationProbe> {
    validate(f, l, m, r, spec)?;
    check_dim(f.m, v.len())?;
    let ctx = context(f, l, m, r, spec);
    let points = sequence_points(f, base, spec);
    let records = points
        .par_iter()
        .map(|(t, x, y)| {
            let (residual, witness) = ctx.residual(x, y, *t, v)?;
            Ok(ScaleRecord { t: *t, x: x.clone(), y: y.clone(), witness, residual })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = records.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(VariationProbe {
        v: v.to_vec(),
        r,
        scales: spec.scales.clone(),
        member: max_residual <= spec.tol * (1.0 + norm(v)),
        records,
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationGrid {
    pub probe: ProbeSpec,
    /// Size of the direction grid on `M ∩ sphere`.
    pub directions: usize,
}

impl Default for VariationGrid {
    fn default() -> Self {
        Self { probe: ProbeSpec::default(), directions: 15 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationModulus {
    pub r: f64,
    pub c_bar_lo: f64,
    pub c_bar_hi: f64,
    pub directions: Vec<Vec<f64>>,
}

fn all_members(ctx: &Ctx, points: &[SeqPoint], dirs: &[Vec<f64>], c: f64, tol: f64) -> Result<bool> {
    let tasks: Vec<(&Vec<f64>, &SeqPoint)> = dirs.iter().flat_map(|u| points.iter().map(move |p| (u, p))).collect();
    let failed = tasks.par_iter().map(|(u, (t, x, y))| -> Result<bool> {
        let v = linalg::scale(u, c);
        Ok(!ctx.within(x, y, *t, &v, tol * (1.0 + c))?)
    });
    Ok(!failed.collect::<Result<Vec<bool>>>()?.into_iter().any(|b| b))
}

/// Brackets `c̄ = sup{c : c·B̄ ∩ cone M ⊆ F⁽ʳ⁾}` over a direction grid of
/// `M`, on the shared threshold grid of the modulus estimators.
pub fn variation_modulus(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    r: f64,
    grid: &VariationGrid,
) -> Result<VariationModulus> {
    validate(f, l, m, r, &grid.probe)?;
    if r < 1.0 {
        return Err(Error::InvalidRate(format!("variation modulus needs r >= 1, got {r}")));
    }
    let ctx = context(f, l, m, r, &grid.probe);
    let points = sequence_points(f, base, &grid.probe);
    let dirs = m.sample(grid.directions);
    let (lo, hi) = bracket_threshold(BISECTION_RATIO, |c| all_members(&ctx, &points, &dirs, c, grid.probe.tol))?;
    Ok(VariationModulus { r, c_bar_lo: lo, c_bar_hi: hi, directions: dirs })
}

/// Verdict for `c·B̄ ∩ cone M ⊆ F⁽ʳ⁾` on the direction grid. Failures with
/// residual within ten times the tolerance are INCONCLUSIVE.
#[allow(clippy::too_many_arguments)]
pub fn check_variation_criterion(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    r: f64,
    c: f64,
    grid: &VariationGrid,
) -> Result<Verdict> {
    validate(f, l, m, r, &grid.probe)?;
    for d in [l, m] {
        if !d.is_convex() {
            return Err(Error::NonConvexCone(format!("{d:?}")));
        }
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("modulus must be positive, got {c}")));
    }
    let ctx = context(f, l, m, r, &grid.probe);
    let points = sequence_points(f, base, &grid.probe);
    let dirs = m.sample(grid.directions);
    let bound = grid.probe.tol * (1.0 + c);
    let tasks: Vec<(&Vec<f64>, &SeqPoint)> = dirs.iter().flat_map(|u| points.iter().map(move |p| (u, p))).collect();
    let outcomes = tasks
        .par_iter()
        .map(|(u, (t, x, y))| -> Result<Option<Witness>> {
            let v = linalg::scale(u, c);
            if ctx.within(x, y, *t, &v, bound)? {
                return Ok(None);
            }
            let (residual, _) = ctx.residual(x, y, *t, &v)?;
            Ok(Some(Witness {
                x: x.clone(),
                y: y.clone(),
                t: Some(*t),
                probe: v,
                lhs: residual,
                rhs: bound,
                violation: residual - bound,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut status = Status::Holds;
    let mut witness = None;
    for w in outcomes.into_iter().flatten() {
        if w.lhs > 10.0 * bound {
            status = Status::Fails;
            witness = Some(w);
            break;
        }
        if witness.is_none() {
            status = Status::Inconclusive;
            witness = Some(w);
        }
    }
    let scales = &grid.probe.scales;
    let meta = GridMeta {
        rho_x: 2.0 * scales[0],
        rho_y: 0.0,
        epsilon: scales[0],
        t_count: scales.len(),
        t_min: *scales.last().expect("validated"),
        grid_density: grid.probe.base_dirs,
        graph_points: points.len(),
        evaluations: tasks.len(),
        retries_used: 0,
    };
    Ok(Verdict { property: Property::Variation, rate: format!("{c}*t^{r}"), status, witness, meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(d: usize) -> DirectionSet {
        DirectionSet::full_sphere(d)
    }

    fn up() -> DirectionSet {
        DirectionSet::finite(1, vec![vec![1.0]]).unwrap()
    }

    fn down() -> DirectionSet {
        DirectionSet::finite(1, vec![vec![-1.0]]).unwrap()
    }

    fn two_x() -> SetValuedMap {
        SetValuedMap::linear(vec![vec![2.0]]).unwrap()
    }

    #[test]
    fn zero_is_always_a_member() {
        for f in [two_x(), SetValuedMap::square(), crate::maps::abs_graph()] {
            let b = BasePoint::origin(&f);
            let p = variation_membership(&f, &b, &full(1), &full(1), 1.0, &[0.0], &ProbeSpec::default()).unwrap();
            assert!(p.member);
            assert_eq!(p.max_residual, 0.0);
        }
    }

    #[test]
    fn linear_membership() {
        let f = two_x();
        let b = BasePoint::origin(&f);
        let s = ProbeSpec::default();
        assert!(variation_membership(&f, &b, &full(1), &full(1), 1.0, &[1.9], &s).unwrap().member);
        let p = variation_membership(&f, &b, &full(1), &full(1), 1.0, &[2.1], &s).unwrap();
        assert!(!p.member);
        assert!((p.max_residual - 0.1).abs() < 1e-6, "{}", p.max_residual);
    }

    #[test]
    fn square_membership_at_rate_two() {
        let f = SetValuedMap::square();
        let b = BasePoint::origin(&f);
        let s = ProbeSpec::default();
        assert!(variation_membership(&f, &b, &full(1), &up(), 2.0, &[1.0], &s).unwrap().member);
        let p = variation_membership(&f, &b, &full(1), &up(), 2.0, &[1.2], &s).unwrap();
        assert!(!p.member);
        assert!((p.max_residual - 0.2).abs() < 1e-6, "{}", p.max_residual);
        assert!(p.records.iter().all(|r| r.witness[0] <= 1.2 + 1e-12));
    }

    #[test]
    fn diag_modulus_is_one() {
        let f = SetValuedMap::linear(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = BasePoint::origin(&f);
        let g = VariationGrid { directions: 16, ..Default::default() };
        let m = variation_modulus(&f, &b, &full(2), &full(2), 1.0, &g).unwrap();
        assert!(m.c_bar_lo <= 1.0 + 1e-9 && 1.0 <= m.c_bar_hi, "{m:?}");
        assert!(m.c_bar_hi / m.c_bar_lo <= BISECTION_RATIO + 1e-12);
    }

    #[test]
    fn square_modulus_depends_on_rate() {
        let f = SetValuedMap::square();
        let b = BasePoint::origin(&f);
        let g = VariationGrid::default();
        let m2 = variation_modulus(&f, &b, &full(1), &up(), 2.0, &g).unwrap();
        assert!(m2.c_bar_lo <= 1.0 + 1e-9 && 1.0 <= m2.c_bar_hi, "{m2:?}");
        let m1 = variation_modulus(&f, &b, &full(1), &up(), 1.0, &g).unwrap();
        let t_min = *g.probe.scales.last().unwrap();
        assert!(m1.c_bar_lo <= t_min * (1.0 + 1e-9) && t_min <= m1.c_bar_hi, "{m1:?}");
        let finer = VariationGrid { probe: g.probe.refined().refined(), ..g };
        let m1f = variation_modulus(&f, &b, &full(1), &up(), 1.0, &finer).unwrap();
        assert!(m1f.c_bar_hi <= m1.c_bar_lo);
    }

    #[test]
    fn criterion_verdicts() {
        let g = VariationGrid::default();
        let f = two_x();
        let b = BasePoint::origin(&f);
        let ok = check_variation_criterion(&f, &b, &full(1), &full(1), 1.0, 1.5, &g).unwrap();
        assert_eq!(ok.status, Status::Holds);
        let bad = check_variation_criterion(&f, &b, &full(1), &full(1), 1.0, 2.5, &g).unwrap();
        assert_eq!(bad.status, Status::Fails);
        assert!((bad.witness.unwrap().lhs - 0.5).abs() < 1e-6);

        let sq = SetValuedMap::square();
        let b = BasePoint::origin(&sq);
        for c in [1e-3, 0.5, 1.0] {
            let v = check_variation_criterion(&sq, &b, &full(1), &up(), 2.0, c, &g).unwrap();
            assert_eq!(v.status, Status::Holds, "c = {c}");
            let v = check_variation_criterion(&sq, &b, &full(1), &down(), 2.0, c, &g).unwrap();
            assert_eq!(v.status, Status::Fails, "c = {c}");
        }
    }

    #[test]
    fn criterion_rejects_nonconvex_cones() {
        let f = SetValuedMap::identity(2);
        let b = BasePoint::origin(&f);
        let l = DirectionSet::finite(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let err = check_variation_criterion(&f, &b, &l, &full(2), 1.0, 0.5, &VariationGrid::default());
        assert!(matches!(err, Err(Error::NonConvexCone(_))));
    }

    #[test]
    fn bad_scales_rejected() {
        let f = two_x();
        let b = BasePoint::origin(&f);
        let s = ProbeSpec { scales: vec![0.1, 0.2], ..Default::default() };
        assert!(variation_membership(&f, &b, &full(1), &full(1), 1.0, &[1.0], &s).is_err());
    }
}
