//! Directional tangent and normal cones of finite unions of polyhedra,
//! directional coderivatives and the coderivative criterion for directional
//! linear openness.

use rayon::prelude::*;

use crate::cones::{DirectionSet, PolyhedralCone};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm};
use crate::lp::{LinearProgram, LpOutcome};
use crate::maps::{BasePoint, SetValuedMap};
use crate::polyhedron::Polyhedron;
use crate::sampling::sphere_points;
use crate::wellposed::{grid::graph_points, NeighborhoodSpec};

const MEMBER_TOL: f64 = 1e-9;
const DELTA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalKind {
    Regular,
    Limiting,
}

/// How nearby points may approach the base point in the limiting cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    /// Any `q → p̄` in `Ω`.
    Unrestricted,
    /// Only `q` with `q − p̄ ∈ cone L × cone M`.
    Directional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalConeRep {
    pub base_point: Vec<f64>,
    /// One cone for `Regular`; a union for `Limiting`.
    pub cones: Vec<PolyhedralCone>,
    pub kind: NormalKind,
    pub l: DirectionSet,
    pub m: DirectionSet,
}

impl NormalConeRep {
    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        self.cones.iter().any(|c| c.contains(w, tol))
    }
}

fn product_cone(l: &DirectionSet, m: &DirectionSet) -> Result<Vec<Vec<f64>>> {
    for d in [l, m] {
        if !d.is_convex() {
            return Err(Error::NonConvexCone(format!("{d:?}")));
        }
    }
    let (n, k) = (l.dim(), m.dim());
    let mut hs: Vec<Vec<f64>> = l.cone().halfspaces().iter().map(|a| linalg::concat(a, &vec![0.0; k])).collect();
    hs.extend(m.cone().halfspaces().iter().map(|b| linalg::concat(&vec![0.0; n], b)));
    Ok(hs)
}

fn check_member(omega: &[Polyhedron], p: &[f64]) -> Result<()> {
    if omega.iter().any(|q| q.contains(p, MEMBER_TOL)) {
        return Ok(());
    }
    let violation = omega.iter().map(|q| q.violation(p)).fold(f64::INFINITY, f64::min);
    Err(Error::PointNotInSet { violation })
}

fn active_tol(p: &[f64]) -> f64 {
    MEMBER_TOL * (1.0 + norm(p))
}

/// `{d : p + τd ∈ P for small τ > 0} ∩ (cone L × cone M)` for every piece `P`
/// containing `p`.
pub fn directional_tangent_cone(
    omega: &[Polyhedron],
    p: &[f64],
    l: &DirectionSet,
    m: &DirectionSet,
) -> Result<Vec<PolyhedralCone>> {
    let dim = l.dim() + m.dim();
    check_dim(dim, p.len())?;
    check_member(omega, p)?;
    let k = product_cone(l, m)?;
    let tol = active_tol(p);
    let mut out = Vec::new();
    for piece in omega.iter().filter(|q| q.contains(p, tol)) {
        check_dim(dim, piece.dim())?;
        let mut hs: Vec<Vec<f64>> =
            piece.active_set(p, tol).into_iter().map(|i| linalg::neg(piece.inequality(i).0)).collect();
        for (e, _) in piece.equalities() {
            hs.push(e.to_vec());
            hs.push(linalg::neg(e));
        }
        hs.extend(k.iter().cloned());
        out.push(PolyhedralCone::from_halfspaces(dim, hs)?);
    }
    Ok(out)
}

/// Polar of the directional tangent cone.
pub fn regular_normal_cone(
    omega: &[Polyhedron],
    p: &[f64],
    l: &DirectionSet,
    m: &DirectionSet,
) -> Result<NormalConeRep> {
    let tangent = directional_tangent_cone(omega, p, l, m)?;
    let dim = p.len();
    let hs: Vec<Vec<f64>> = tangent.iter().flat_map(|c| c.generators().iter().map(|g| linalg::neg(g))).collect();
    let cone = PolyhedralCone::from_halfspaces(dim, hs)?;
    debug_assert!(tangent.iter().all(|t| t
        .generators()
        .iter()
        .all(|d| cone.generators().iter().all(|w| dot(w, d) <= 1e-8 * (1.0 + norm(w) * norm(d))))));
    Ok(NormalConeRep {
        base_point: p.to_vec(),
        cones: vec![cone],
        kind: NormalKind::Regular,
        l: l.clone(),
        m: m.clone(),
    })
}

fn subsets(active: &[usize]) -> Vec<Vec<usize>> {
    let k = active.len().min(16);
    (0..1usize << k).map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).map(|i| active[i]).collect()).collect()
}

/// A point of the relative interior of the face `{a_J z = b_J}` of `piece`
/// within distance about `DELTA` of `p`, if that face is reachable.
fn face_representative(
    piece: &Polyhedron,
    p: &[f64],
    active: &[usize],
    face: &[usize],
    restrict: Option<&[Vec<f64>]>,
) -> Option<Vec<f64>> {
    let dim = p.len();
    if face.len() == active.len() && restrict.is_none() {
        return Some(p.to_vec());
    }
    let mut lp = LinearProgram::new(dim);
    for &i in active {
        let a = piece.inequality(i).0.to_vec();
        let s = norm(&a);
        if face.contains(&i) {
            lp = lp.eq(a, 0.0);
        } else {
            lp = lp.le(a, -s);
        }
    }
    for (e, _) in piece.equalities() {
        lp = lp.eq(e.to_vec(), 0.0);
    }
    for h in restrict.unwrap_or(&[]) {
        lp = lp.le(linalg::neg(h), 0.0);
    }
    let d = match lp.solve() {
        LpOutcome::Optimal { x, .. } => x,
        _ => return None,
    };
    let Some(u) = linalg::normalized(&d) else {
        return Some(p.to_vec());
    };
    let s_min = active
        .iter()
        .filter(|i| !face.contains(i))
        .map(|&i| {
            let a = piece.inequality(i).0;
            -dot(a, &u) / norm(a)
        })
        .fold(f64::INFINITY, f64::min);
    let mut delta = if s_min.is_finite() { DELTA.max(100.0 * active_tol(p) / s_min) } else { DELTA };
    for _ in 0..30 {
        let q = linalg::axpy(p, delta, &u);
        if piece.contains(&q, active_tol(&q) * 1e-3) {
            return Some(q);
        }
        delta *= 0.5;
    }
    None
}

fn cone_subset(a: &PolyhedralCone, b: &PolyhedralCone) -> bool {
    a.generators().iter().all(|g| b.contains(g, 1e-9))
}

/// Union of regular normal cones at representatives of every face of every
/// piece through `p̄`, i.e. the upper limit of regular normal cones at
/// nearby points of `Ω`.
pub fn limiting_normal_cone(
    omega: &[Polyhedron],
    p: &[f64],
    l: &DirectionSet,
    m: &DirectionSet,
) -> Result<NormalConeRep> {
    limiting_normal_cone_with(omega, p, l, m, Approach::Unrestricted)
}

pub fn limiting_normal_cone_with(
    omega: &[Polyhedron],
    p: &[f64],
    l: &DirectionSet,
    m: &DirectionSet,
    approach: Approach,
) -> Result<NormalConeRep> {
    let mut cones = regular_normal_cone(omega, p, l, m)?.cones;
    let k = product_cone(l, m)?;
    let restrict = (approach == Approach::Directional).then_some(k.as_slice());
    let tol = active_tol(p);
    for piece in omega.iter().filter(|q| q.contains(p, tol)) {
        let active = piece.active_set(p, tol);
        for face in subsets(&active) {
            let Some(q) = face_representative(piece, p, &active, &face, restrict) else {
                continue;
            };
            for c in regular_normal_cone(omega, &q, l, m)?.cones {
                if !cones.iter().any(|d| cone_subset(&c, d) && cone_subset(d, &c)) {
                    cones.push(c);
                }
            }
        }
    }
    Ok(NormalConeRep { base_point: p.to_vec(), cones, kind: NormalKind::Limiting, l: l.clone(), m: m.clone() })
}

/// `{x* : (x*, −y*) ∈ N}` as a union of polyhedra (possibly empty).
#[derive(Debug, Clone, PartialEq)]
pub struct CoderivativeSlice {
    pub pieces: Vec<Polyhedron>,
}

impl CoderivativeSlice {
    pub fn is_empty(&self) -> bool {
        self.pieces.iter().all(|p| p.is_empty())
    }

    pub fn contains(&self, x_star: &[f64], tol: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(x_star, tol))
    }
}

fn slice(normal: &NormalConeRep, n: usize, y_star: &[f64]) -> CoderivativeSlice {
    let pieces = normal
        .cones
        .iter()
        .map(|c| {
            c.halfspaces().iter().fold(Polyhedron::universe(n), |acc, h| {
                let (hx, hy) = h.split_at(n);
                acc.ge(hx.to_vec(), dot(hy, y_star))
            })
        })
        .filter(|p| !p.is_empty())
        .collect();
    CoderivativeSlice { pieces }
}

/// Directional coderivative `D*F(x, y)(y*)` of a polyhedral map.
pub fn coderivative(
    f: &SetValuedMap,
    p: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    y_star: &[f64],
    kind: NormalKind,
) -> Result<CoderivativeSlice> {
    check_dim(f.m, y_star.len())?;
    let pieces = f.graph_pieces()?;
    let z = p.stacked();
    let normal = match kind {
        NormalKind::Regular => regular_normal_cone(&pieces, &z, l, m)?,
        NormalKind::Limiting => limiting_normal_cone(&pieces, &z, l, m)?,
    };
    Ok(slice(&normal, f.n, y_star))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSampling {
    /// Radius of the graph neighborhood.
    pub rho: f64,
    pub grid_density: usize,
    /// Size of the `y*` sphere grid (`m ≥ 2`).
    pub ystar_count: usize,
    /// Number of sampled `v ∈ M`.
    pub v_count: usize,
    pub tol: f64,
}

impl Default for CriterionSampling {
    fn default() -> Self {
        Self { rho: 0.25, grid_density: 5, ystar_count: 64, v_count: 64, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_star: Vec<f64>,
    /// Worst element of the coderivative slice (`None` if the slice is empty).
    pub x_star: Option<Vec<f64>>,
    pub v: Vec<f64>,
    /// Minimizer of `⟨x*, u⟩` over `cone L ∩ B̄`.
    pub u: Option<Vec<f64>>,
    /// `c⟨y*, v⟩ − ⟨x*, u⟩`, `+∞` for an empty slice.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub c: f64,
    pub records: Vec<CriterionRecord>,
    pub min_slack: f64,
    pub passed: bool,
}

/// `min_{x* ∈ S} min_{u ∈ C ∩ B̄} ⟨x*, u⟩` rewritten as
/// `−dist(0, S + C°)`; returns the distance and a minimizing `x*`.
fn worst_x_star(s: &Polyhedron, cone_l: &PolyhedralCone) -> Option<(f64, Vec<f64>)> {
    let n = s.dim();
    if cone_l.is_full() {
        let x = s.project(&vec![0.0; n])?;
        return Some((norm(&x), x));
    }
    let polar = cone_l.polar();
    let v = s.vrep();
    if v.vertices.is_empty() {
        return None;
    }
    let mut rays = v.rays.clone();
    rays.extend(polar.generators().iter().cloned());
    let sum = Polyhedron::from_vrep(n, &v.vertices, &rays);
    let z = sum.project(&vec![0.0; n])?;
    let recover = cone_l.generators().iter().fold(s.clone(), |acc, g| acc.ge(g.clone(), dot(g, &z)));
    let x = recover.feasible_point().or_else(|| s.project(&z))?;
    let dist = norm(&cone_l.project(&linalg::neg(&x)));
    Some((dist, x))
}

/// Checks `∀ x* ∈ D*F(x,y)(y*), ∀ v ∈ M, ∃ u ∈ cone L ∩ B̄: ⟨x*, u⟩ ≤ c⟨y*, v⟩`
/// over sampled graph points, `y*` and `v`.
pub fn check_criterion(
    f: &SetValuedMap,
    base: &BasePoint,
    l: &DirectionSet,
    m: &DirectionSet,
    c: f64,
    sampling: &CriterionSampling,
) -> Result<CriterionReport> {
    if !f.is_polyhedral() {
        return Err(Error::NotPolyhedral);
    }
    check_dim(f.n, l.dim())?;
    check_dim(f.m, m.dim())?;
    product_cone(l, m)?;
    let pieces = f.graph_pieces()?;
    let mut spec = NeighborhoodSpec::new(sampling.rho, sampling.rho, 1.0)?;
    spec.grid_density = sampling.grid_density.max(3);
    let points = graph_points(f, base, &spec);
    let y_stars = sphere_points(f.m, sampling.ystar_count);
    let vs = m.sample(sampling.v_count);
    let cone_l = l.cone();

    let per_point: Vec<Vec<CriterionRecord>> = points
        .par_iter()
        .map(|(x, y)| -> Result<Vec<CriterionRecord>> {
            let z = linalg::concat(x, y);
            let normal = limiting_normal_cone(&pieces, &z, l, m)?;
            let mut recs = Vec::with_capacity(y_stars.len());
            for ys in &y_stars {
                let mut cands = vs.clone();
                if let Some(d) = linalg::normalized(&linalg::neg(ys)) {
                    if m.contains(&d, 1e-12) {
                        cands.push(d);
                    }
                }
                let v = cands.iter().min_by(|a, b| dot(ys, a).total_cmp(&dot(ys, b))).expect("M is nonempty").clone();
                let cy = c * dot(ys, &v);
                let mut best: Option<(f64, Vec<f64>)> = None;
                for s in &slice(&normal, f.n, ys).pieces {
                    if let Some((d, xs)) = worst_x_star(s, &cone_l) {
                        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                            best = Some((d, xs));
                        }
                    }
                }
                let rec = match best {
                    None => CriterionRecord {
                        x: x.clone(),
                        y: y.clone(),
                        y_star: ys.clone(),
                        x_star: None,
                        v,
                        u: None,
                        slack: f64::INFINITY,
                    },
                    Some((d, xs)) => {
                        let pu = cone_l.project(&linalg::neg(&xs));
                        let u = linalg::normalized(&pu).unwrap_or_else(|| vec![0.0; f.n]);
                        CriterionRecord {
                            x: x.clone(),
                            y: y.clone(),
                            y_star: ys.clone(),
                            x_star: Some(xs),
                            v,
                            u: Some(u),
                            slack: cy + d,
                        }
                    }
                };
                recs.push(rec);
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    let records: Vec<CriterionRecord> = per_point.into_iter().flatten().collect();
    let min_slack = records.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    Ok(CriterionReport { c, passed: min_slack >= -sampling.tol, records, min_slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::abs_graph;

    fn full(d: usize) -> DirectionSet {
        DirectionSet::full_sphere(d)
    }

    fn upper_halfplane() -> Vec<Polyhedron> {
        vec![Polyhedron::universe(2).ge(vec![0.0, 1.0], 0.0)]
    }

    #[test]
    fn tangent_cone_of_halfplane() {
        let t = directional_tangent_cone(&upper_halfplane(), &[0.3, 0.0], &full(1), &full(1)).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[0].contains(&[-1.0, 0.0], 1e-12));
        assert!(t[0].contains(&[5.0, 1.0], 1e-12));
        assert!(!t[0].contains(&[0.0, -1.0], 1e-12));
        let t = directional_tangent_cone(&upper_halfplane(), &[0.3, 1.0], &full(1), &full(1)).unwrap();
        assert!(t[0].is_full());
    }

    #[test]
    fn tangent_cone_of_linear_graph_is_graph() {
        let f = SetValuedMap::linear(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let t =
            directional_tangent_cone(&f.graph_pieces().unwrap(), &[0.1, 0.2, 0.2, 0.2], &full(2), &full(2)).unwrap();
        assert!(t[0].contains(&[1.0, -3.0, 2.0, -3.0], 1e-9));
        assert!(!t[0].contains(&[1.0, 0.0, 1.0, 0.0], 1e-9));
    }

    #[test]
    fn interior_regular_cone_is_zero() {
        let n = regular_normal_cone(&upper_halfplane(), &[0.0, 1.0], &full(1), &full(1)).unwrap();
        assert!(n.cones[0].is_zero());
        let n = limiting_normal_cone(&upper_halfplane(), &[0.0, 1.0], &full(1), &full(1)).unwrap();
        assert!(n.cones.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn diagonal_normal_cone() {
        let diag = vec![Polyhedron::universe(2).eq(vec![1.0, -1.0], 0.0)];
        let n = regular_normal_cone(&diag, &[0.4, 0.4], &full(1), &full(1)).unwrap();
        assert!(n.contains(&[1.0, -1.0], 1e-12));
        assert!(n.contains(&[-2.0, 2.0], 1e-12));
        assert!(!n.contains(&[1.0, 1.0], 1e-6));
    }

    #[test]
    fn halfplane_with_upward_m() {
        let up = DirectionSet::finite(1, vec![vec![1.0]]).unwrap();
        let n = regular_normal_cone(&upper_halfplane(), &[0.0, 0.0], &full(1), &up).unwrap();
        assert!(n.contains(&[0.0, -1.0], 1e-12));
        assert!(!n.contains(&[0.0, 1.0], 1e-9));
        assert!(!n.contains(&[0.5, -1.0], 1e-9));
    }

    #[test]
    fn abs_graph_limiting_cone_is_three_cones() {
        let pieces = abs_graph().graph_pieces().unwrap();
        let n = limiting_normal_cone(&pieces, &[0.0, 0.0], &full(1), &full(1)).unwrap();
        assert_eq!(n.cones.len(), 3);
        // edge normals of y = x and y = -x, and the vertex cone
        assert!(n.contains(&[1.0, -1.0], 1e-9));
        assert!(n.contains(&[-1.0, -1.0], 1e-9));
        assert!(n.contains(&[0.0, -1.0], 1e-9));
        assert!(!n.contains(&[0.0, 1.0], 1e-9));
        let regular = regular_normal_cone(&pieces, &[0.0, 0.0], &full(1), &full(1)).unwrap();
        assert!(n.cones.contains(&regular.cones[0]));
    }

    #[test]
    fn directional_approach_drops_left_edge() {
        let pieces = abs_graph().graph_pieces().unwrap();
        let right = DirectionSet::finite(1, vec![vec![1.0]]).unwrap();
        let unrestricted = limiting_normal_cone(&pieces, &[0.0, 0.0], &right, &full(1)).unwrap();
        let restricted =
            limiting_normal_cone_with(&pieces, &[0.0, 0.0], &right, &full(1), Approach::Directional).unwrap();
        assert_eq!(restricted.cones.len() + 1, unrestricted.cones.len());
        let left_edge = |n: &NormalConeRep| {
            n.cones.iter().any(|c| c.contains(&[1.0, 1.0], 1e-9) && !c.contains(&[1.0, -1.0], 1e-9))
        };
        assert!(left_edge(&unrestricted));
        assert!(!left_edge(&restricted));
    }

    #[test]
    fn linear_coderivative_is_transpose() {
        let a = vec![vec![2.0, 1.0], vec![0.0, 3.0]];
        let f = SetValuedMap::linear(a).unwrap();
        let p = BasePoint::origin(&f);
        let ys = [0.6, -0.8];
        let want = [2.0 * 0.6, 1.0 * 0.6 + 3.0 * -0.8];
        for kind in [NormalKind::Regular, NormalKind::Limiting] {
            let s = coderivative(&f, &p, &full(2), &full(2), &ys, kind).unwrap();
            assert!(s.contains(&want, 1e-9));
            assert!(!s.contains(&[want[0] + 0.1, want[1]], 1e-6));
        }
        let s = coderivative(&f, &p, &full(2), &full(2), &[0.0, 0.0], NormalKind::Regular).unwrap();
        assert!(s.contains(&[0.0, 0.0], 1e-12));
        assert!(!s.contains(&[0.1, 0.0], 1e-6));
    }

    #[test]
    fn abs_graph_slice_contains_interval() {
        let f = abs_graph();
        let p = BasePoint::origin(&f);
        let s = coderivative(&f, &p, &full(1), &full(1), &[1.0], NormalKind::Limiting).unwrap();
        for x in [-1.0, -0.5, 0.0, 0.7, 1.0] {
            assert!(s.contains(&[x], 1e-9), "{x}");
        }
        assert!(!s.contains(&[1.2], 1e-6));
    }

    #[test]
    fn nonpolyhedral_map_rejected() {
        let f = SetValuedMap::square();
        let p = BasePoint::origin(&f);
        let err = check_criterion(&f, &p, &full(1), &full(1), 1.0, &CriterionSampling::default()).unwrap_err();
        assert!(matches!(err, Error::NotPolyhedral));
    }

    #[test]
    fn nonconvex_cone_rejected() {
        let f = SetValuedMap::identity(2);
        let p = BasePoint::origin(&f);
        let l = DirectionSet::finite(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let err = check_criterion(&f, &p, &l, &full(2), 1.0, &CriterionSampling::default()).unwrap_err();
        assert!(matches!(err, Error::NonConvexCone(_)));
    }

    #[test]
    fn identity_criterion_threshold() {
        let f = SetValuedMap::identity(2);
        let p = BasePoint::origin(&f);
        let s = CriterionSampling { grid_density: 3, ..Default::default() };
        assert!(check_criterion(&f, &p, &full(2), &full(2), 0.9, &s).unwrap().passed);
        let r = check_criterion(&f, &p, &full(2), &full(2), 1.1, &s).unwrap();
        assert!(!r.passed);
        assert!((r.min_slack + 0.1).abs() < 1e-9, "{}", r.min_slack);
        for rec in &r.records {
            let u = rec.u.as_ref().unwrap();
            assert!(norm(u) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn linearized_square_with_upward_m_always_fails() {
        let f = crate::maps::linearize_square(0.1, 4);
        let p = BasePoint::origin(&f);
        let up = DirectionSet::finite(1, vec![vec![1.0]]).unwrap();
        for c in [1e-3, 0.1, 1.0] {
            let r = check_criterion(&f, &p, &full(1), &up, c, &CriterionSampling::default()).unwrap();
            assert!(!r.passed, "c = {c}");
        }
    }

    #[test]
    fn abs_graph_upward_threshold_is_one() {
        let f = abs_graph();
        let p = BasePoint::origin(&f);
        let up = DirectionSet::finite(1, vec![vec![1.0]]).unwrap();
        assert!(check_criterion(&f, &p, &full(1), &up, 0.9, &CriterionSampling::default()).unwrap().passed);
        assert!(!check_criterion(&f, &p, &full(1), &up, 1.1, &CriterionSampling::default()).unwrap().passed);
    }
}
