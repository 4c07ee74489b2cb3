//! Direction sets, polyhedral cones and the directional minimal time function
//! `T_L(x, Ω) = inf { t ≥ 0 : x + t u ∈ Ω for some u ∈ L }`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm};
use crate::polyhedron::{extreme_rays, facets_of_cone, Polyhedron};
use crate::sampling;

pub const DEFAULT_TOL: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-12;

/// Closed convex cone with both descriptions:
/// `cone(generators) = { u : ⟨a, u⟩ ≥ 0 for every a in halfspaces }`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCone {
    dim: usize,
    generators: Vec<Vec<f64>>,
    halfspaces: Vec<Vec<f64>>,
}

impl PolyhedralCone {
    pub fn from_generators(dim: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        for g in &generators {
            check_dim(dim, g.len())?;
            if norm(g) == 0.0 {
                return Err(Error::InconsistentCone("zero generator".into()));
            }
        }
        let halfspaces = facets_of_cone(&generators, dim);
        Ok(Self { dim, generators, halfspaces })
    }

    pub fn from_halfspaces(dim: usize, halfspaces: Vec<Vec<f64>>) -> Result<Self> {
        for a in &halfspaces {
            check_dim(dim, a.len())?;
        }
        let generators = extreme_rays(&halfspaces, dim);
        Ok(Self { dim, generators, halfspaces })
    }

    /// Both descriptions supplied by the caller; they must agree.
    pub fn from_both(dim: usize, generators: Vec<Vec<f64>>, halfspaces: Vec<Vec<f64>>) -> Result<Self> {
        let cone = Self { dim, generators, halfspaces };
        for g in cone.generators.iter().chain(&cone.halfspaces) {
            check_dim(dim, g.len())?;
        }
        let scale = |a: &[f64], g: &[f64]| DEFAULT_TOL * norm(a).max(1.0) * norm(g).max(1.0);
        for g in &cone.generators {
            if let Some(a) = cone.halfspaces.iter().find(|a| dot(a, g) < -scale(a, g)) {
                return Err(Error::InconsistentCone(format!("generator {g:?} violates halfspace {a:?}")));
            }
        }
        let facets = facets_of_cone(&cone.generators, dim);
        for r in extreme_rays(&cone.halfspaces, dim) {
            if let Some(h) = facets.iter().find(|h| dot(h, &r) < -scale(h, &r)) {
                return Err(Error::InconsistentCone(format!("extreme ray {r:?} is not generated (facet {h:?})")));
            }
        }
        Ok(cone)
    }

    /// The whole space.
    pub fn full(dim: usize) -> Self {
        let generators = (0..dim).flat_map(|i| [linalg::unit(dim, i), linalg::neg(&linalg::unit(dim, i))]).collect();
        Self { dim, generators, halfspaces: Vec::new() }
    }

    /// Nonnegative orthant.
    pub fn orthant(dim: usize) -> Self {
        let e: Vec<Vec<f64>> = (0..dim).map(|i| linalg::unit(dim, i)).collect();
        Self { dim, generators: e.clone(), halfspaces: e }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn halfspaces(&self) -> &[Vec<f64>] {
        &self.halfspaces
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.halfspaces.iter().all(|a| norm(a) == 0.0)
    }

    /// `{ w : ⟨w, u⟩ ≤ 0 for all u in the cone }`.
    pub fn polar(&self) -> Self {
        Self {
            dim: self.dim,
            generators: self.halfspaces.iter().map(|a| linalg::neg(a)).collect(),
            halfspaces: self.generators.iter().map(|g| linalg::neg(g)).collect(),
        }
    }

    pub fn negate(&self) -> Self {
        Self {
            dim: self.dim,
            generators: self.generators.iter().map(|g| linalg::neg(g)).collect(),
            halfspaces: self.halfspaces.iter().map(|a| linalg::neg(a)).collect(),
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|a| dot(a, v) >= -tol * norm(a).max(1e-300))
    }

    /// `{ z : z − apex ∈ cone }` as a polyhedron.
    pub fn translated(&self, apex: &[f64]) -> Polyhedron {
        self.halfspaces.iter().filter(|a| norm(a) > 0.0).fold(Polyhedron::universe(self.dim), |p, a| {
            let rhs = dot(a, apex);
            p.ge(a.clone(), rhs)
        })
    }

    pub fn as_polyhedron(&self) -> Polyhedron {
        self.translated(&vec![0.0; self.dim])
    }

    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        if self.contains(w, 0.0) {
            return w.to_vec();
        }
        self.as_polyhedron().project(w).expect("a cone always contains the origin")
    }
}

/// Nonempty closed subset of the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSet {
    FullSphere { dim: usize },
    Finite { dim: usize, dirs: Vec<Vec<f64>> },
    Cap(PolyhedralCone),
}

impl DirectionSet {
    pub fn full_sphere(dim: usize) -> Self {
        DirectionSet::FullSphere { dim }
    }

    pub fn finite(dim: usize, dirs: Vec<Vec<f64>>) -> Result<Self> {
        if dirs.is_empty() {
            return Err(Error::EmptyDirectionSet);
        }
        for (index, d) in dirs.iter().enumerate() {
            check_dim(dim, d.len())?;
            let n = norm(d);
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::NonUnitDirection { index, norm: n });
            }
        }
        Ok(DirectionSet::Finite { dim, dirs })
    }

    /// `cone ∩ sphere`; the zero cone is rejected.
    pub fn cap(cone: PolyhedralCone) -> Result<Self> {
        if cone.is_zero() {
            return Err(Error::EmptyDirectionSet);
        }
        Ok(DirectionSet::Cap(cone))
    }

    /// Single direction `{u}` (normalized).
    pub fn ray(u: &[f64]) -> Result<Self> {
        let u = linalg::normalized(u).ok_or(Error::EmptyDirectionSet)?;
        Self::finite(u.len(), vec![u])
    }

    pub fn dim(&self) -> usize {
        match self {
            DirectionSet::FullSphere { dim } | DirectionSet::Finite { dim, .. } => *dim,
            DirectionSet::Cap(c) => c.dim(),
        }
    }

    /// Whether `cone L` is convex.
    pub fn is_convex(&self) -> bool {
        match self {
            DirectionSet::FullSphere { .. } | DirectionSet::Cap(_) => true,
            DirectionSet::Finite { dim, dirs } => {
                dirs.len() == 1 || (*dim == 1 && dirs.iter().any(|d| d[0] > 0.0) && dirs.iter().any(|d| d[0] < 0.0))
            }
        }
    }

    /// The closed convex cone generated by the set. For nonconvex finite sets
    /// this is the convex hull of `cone L`.
    pub fn cone(&self) -> PolyhedralCone {
        match self {
            DirectionSet::FullSphere { dim } => PolyhedralCone::full(*dim),
            DirectionSet::Cap(c) => c.clone(),
            DirectionSet::Finite { dim, dirs } => {
                PolyhedralCone::from_generators(*dim, dirs.clone()).expect("unit directions")
            }
        }
    }

    /// Whether the unit vector `u` belongs to the set.
    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        if u.len() != self.dim() || (norm(u) - 1.0).abs() > tol.max(UNIT_TOL) {
            return false;
        }
        match self {
            DirectionSet::FullSphere { .. } => true,
            DirectionSet::Finite { dirs, .. } => dirs.iter().any(|d| linalg::dist(d, u) <= tol),
            DirectionSet::Cap(c) => c.contains(u, tol),
        }
    }

    /// Whether `d` lies in `cone L` (including `d = 0`).
    pub fn admits(&self, d: &[f64], tol: f64) -> bool {
        match linalg::normalized(d) {
            None => true,
            Some(u) => self.contains(&u, tol),
        }
    }

    /// Deterministic sample of about `count` directions (finite sets are
    /// returned whole).
    pub fn sample(&self, count: usize) -> Vec<Vec<f64>> {
        match self {
            DirectionSet::FullSphere { dim } => sampling::sphere_points(*dim, count),
            DirectionSet::Finite { dirs, .. } => dirs.clone(),
            DirectionSet::Cap(c) if c.is_full() => sampling::sphere_points(c.dim(), count),
            DirectionSet::Cap(c) => sampling::cone_directions(c.generators(), count),
        }
    }

    /// Some element of the set.
    pub fn any_element(&self) -> Vec<f64> {
        match self {
            DirectionSet::FullSphere { dim } => linalg::unit(*dim, 0),
            DirectionSet::Finite { dirs, .. } => dirs[0].clone(),
            DirectionSet::Cap(c) => linalg::normalized(&c.generators()[0]).expect("nonzero"),
        }
    }
}

/// `{ −u : u ∈ D }`.
pub fn negate(d: &DirectionSet) -> DirectionSet {
    match d {
        DirectionSet::FullSphere { dim } => DirectionSet::FullSphere { dim: *dim },
        DirectionSet::Finite { dim, dirs } => {
            DirectionSet::Finite { dim: *dim, dirs: dirs.iter().map(|u| linalg::neg(u)).collect() }
        }
        DirectionSet::Cap(c) => DirectionSet::Cap(c.negate()),
    }
}

pub fn cone_membership(c: &PolyhedralCone, v: &[f64], tol: f64) -> Result<bool> {
    check_dim(c.dim(), v.len())?;
    Ok(c.contains(v, tol))
}

pub fn project_onto_cone(c: &PolyhedralCone, w: &[f64]) -> Result<Vec<f64>> {
    check_dim(c.dim(), w.len())?;
    Ok(c.project(w))
}

/// `max { ⟨w, u⟩ : u ∈ C, ‖u‖ ≤ 1 }`.
pub fn support_over_cap(c: &PolyhedralCone, w: &[f64]) -> Result<f64> {
    Ok(norm(&project_onto_cone(c, w)?))
}

/// Closed set given as a finite point cloud together with a finite union of
/// convex polyhedra.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub polytopes: Vec<Polyhedron>,
}

impl Region {
    pub fn empty(dim: usize) -> Self {
        Self { dim, points: Vec::new(), polytopes: Vec::new() }
    }

    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Self {
        Self { dim, points, polytopes: Vec::new() }
    }

    pub fn from_polytopes(dim: usize, polytopes: Vec<Polyhedron>) -> Self {
        Self { dim, points: Vec::new(), polytopes }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.polytopes.iter().all(|p| p.is_empty())
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        self.points.iter().any(|p| linalg::dist(p, z) <= tol) || self.polytopes.iter().any(|p| p.contains(z, tol))
    }

    /// Euclidean distance (`+∞` for the empty region).
    pub fn distance(&self, z: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| linalg::dist(p, z))
            .chain(self.polytopes.iter().map(|p| p.distance(z)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest point of the region (`None` when empty).
    pub fn nearest(&self, z: &[f64]) -> Option<Vec<f64>> {
        self.points
            .iter()
            .cloned()
            .chain(self.polytopes.iter().filter_map(|p| p.project(z)))
            .min_by(|a, b| linalg::dist(a, z).total_cmp(&linalg::dist(b, z)))
    }

    pub fn union(mut self, other: Region) -> Region {
        assert_eq!(self.dim, other.dim);
        self.points.extend(other.points);
        self.polytopes.extend(other.polytopes);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalTimeValue {
    pub value: f64,
    pub attaining_direction: Option<Vec<f64>>,
    pub attaining_time: Option<f64>,
}

impl MinimalTimeValue {
    pub fn infinite() -> Self {
        Self { value: f64::INFINITY, attaining_direction: None, attaining_time: None }
    }

    fn finite(t: f64, u: Vec<f64>) -> Self {
        Self { value: t, attaining_direction: Some(u), attaining_time: Some(t) }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    fn better(self, other: Self) -> Self {
        if other.value < self.value {
            other
        } else {
            self
        }
    }
}

pub fn minimal_time(l: &DirectionSet, x: &[f64], omega: &Region) -> Result<MinimalTimeValue> {
    minimal_time_tol(l, x, omega, DEFAULT_TOL)
}

/// `T_L(x, Ω)` with a witness `(u, t)` such that `x + t u ∈ Ω`.
pub fn minimal_time_tol(l: &DirectionSet, x: &[f64], omega: &Region, tol: f64) -> Result<MinimalTimeValue> {
    check_dim(l.dim(), x.len())?;
    check_dim(omega.dim, x.len())?;
    let mut best = MinimalTimeValue::infinite();
    for p in &omega.points {
        check_dim(x.len(), p.len())?;
        best = best.better(time_to_point(l, x, p, tol));
    }
    for poly in &omega.polytopes {
        best = best.better(time_to_polytope(l, x, poly, tol));
    }
    Ok(best)
}

/// `T_L(x, {p})`.
pub fn time_to_point(l: &DirectionSet, x: &[f64], p: &[f64], tol: f64) -> MinimalTimeValue {
    let d = linalg::sub(p, x);
    let n = norm(&d);
    if n <= tol * 1e-3 {
        return MinimalTimeValue::finite(0.0, l.any_element());
    }
    let u = linalg::scale(&d, 1.0 / n);
    if l.contains(&u, tol) {
        MinimalTimeValue::finite(n, u)
    } else {
        MinimalTimeValue::infinite()
    }
}

fn time_to_polytope(l: &DirectionSet, x: &[f64], poly: &Polyhedron, tol: f64) -> MinimalTimeValue {
    let from_nearest = |target: Option<Vec<f64>>| match target {
        None => MinimalTimeValue::infinite(),
        Some(z) => {
            let d = linalg::sub(&z, x);
            let n = norm(&d);
            if n <= tol * 1e-3 {
                MinimalTimeValue::finite(0.0, l.any_element())
            } else {
                MinimalTimeValue::finite(n, linalg::scale(&d, 1.0 / n))
            }
        }
    };
    match l {
        DirectionSet::FullSphere { .. } => from_nearest(poly.project(x)),
        DirectionSet::Cap(c) => {
            if poly.contains(x, tol * 1e-3) {
                return MinimalTimeValue::finite(0.0, l.any_element());
            }
            from_nearest(poly.intersect(&c.translated(x)).project(x))
        }
        DirectionSet::Finite { dirs, .. } => dirs
            .iter()
            .filter_map(|u| ray_entry_time(x, u, poly, tol).map(|t| MinimalTimeValue::finite(t, u.clone())))
            .fold(MinimalTimeValue::infinite(), MinimalTimeValue::better),
    }
}

/// Smallest `t ≥ 0` with `x + t u ∈ P`, if any. The interval of admissible
/// times is computed exactly; `tol` only decides whether it is empty.
pub fn ray_entry_time(x: &[f64], u: &[f64], poly: &Polyhedron, tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut update = |a: &[f64], slack: f64, is_eq: bool| -> bool {
        let au = dot(a, u);
        let s = tol * norm(a).max(1e-300);
        if au.abs() <= 1e-14 * norm(a) {
            return if is_eq { slack.abs() <= s } else { slack >= -s };
        }
        let t = slack / au;
        if is_eq {
            lo = lo.max(t);
            hi = hi.min(t);
        } else if au > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
        true
    };
    for (a, b) in poly.inequalities() {
        if !update(a, b - dot(a, x), false) {
            return None;
        }
    }
    for (a, b) in poly.equalities() {
        if !update(a, b - dot(a, x), true) {
            return None;
        }
    }
    (lo <= hi + tol).then_some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrant() -> PolyhedralCone {
        PolyhedralCone::orthant(2)
    }

    #[test]
    fn negate_examples() {
        assert_eq!(negate(&DirectionSet::full_sphere(2)), DirectionSet::full_sphere(2));
        let f = DirectionSet::finite(2, vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(negate(&f), DirectionSet::finite(2, vec![vec![-1.0, 0.0]]).unwrap());
        let c = DirectionSet::cap(PolyhedralCone::from_generators(2, vec![vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap())
            .unwrap();
        assert_eq!(negate(&negate(&c)), c);
    }

    #[test]
    fn membership_examples() {
        assert!(cone_membership(&quadrant(), &[1.0, 2.0], DEFAULT_TOL).unwrap());
        assert!(!cone_membership(&quadrant(), &[-1.0, 0.0], DEFAULT_TOL).unwrap());
        let c = PolyhedralCone::from_generators(2, vec![vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        // (2,0) = 1·(1,1) + 1·(1,−1)
        assert!(cone_membership(&c, &[2.0, 0.0], DEFAULT_TOL).unwrap());
        assert!(!cone_membership(&c, &[0.0, 1.0], DEFAULT_TOL).unwrap());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_onto_cone(&quadrant(), &[3.0, -2.0]).unwrap(), vec![3.0, 0.0]);
        assert_eq!(project_onto_cone(&quadrant(), &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        let ray = PolyhedralCone::from_generators(2, vec![vec![1.0, 1.0]]).unwrap();
        let p = project_onto_cone(&ray, &[1.0, 0.0]).unwrap();
        assert!(linalg::dist(&p, &[0.5, 0.5]) < 1e-12);
    }

    #[test]
    fn support_examples() {
        let full = PolyhedralCone::full(2);
        assert!((support_over_cap(&full, &[3.0, -4.0]).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(support_over_cap(&quadrant(), &[-1.0, -1.0]).unwrap(), 0.0);
        assert!((support_over_cap(&quadrant(), &[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_dual_description_rejected() {
        let ok =
            PolyhedralCone::from_both(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(ok.is_ok());
        let err = PolyhedralCone::from_both(2, vec![vec![-1.0, 0.0]], vec![vec![1.0, 0.0]]);
        assert!(matches!(err, Err(Error::InconsistentCone(_))));
        let err = PolyhedralCone::from_both(2, vec![vec![1.0, 0.0]], vec![vec![1.0, 0.0]]);
        assert!(matches!(err, Err(Error::InconsistentCone(_))));
    }

    #[test]
    fn direction_set_validation() {
        assert!(matches!(DirectionSet::finite(2, vec![vec![1.0, 1.0]]), Err(Error::NonUnitDirection { index: 0, .. })));
        assert!(matches!(DirectionSet::finite(2, vec![]), Err(Error::EmptyDirectionSet)));
        let zero = PolyhedralCone::from_halfspaces(1, vec![vec![1.0], vec![-1.0]]).unwrap();
        assert!(matches!(DirectionSet::cap(zero), Err(Error::EmptyDirectionSet)));
    }

    #[test]
    fn minimal_time_examples() {
        let l = DirectionSet::full_sphere(2);
        let empty = Region::empty(2);
        assert!(minimal_time(&l, &[0.0, 0.0], &empty).unwrap().value.is_infinite());

        let sq = Region::from_polytopes(2, vec![Polyhedron::boxed(&[0.0, 0.0], &[1.0, 1.0])]);
        assert_eq!(minimal_time(&l, &[0.5, 0.5], &sq).unwrap().value, 0.0);

        let e1 = DirectionSet::finite(2, vec![vec![1.0, 0.0]]).unwrap();
        let p = Region::from_points(2, vec![vec![3.0, 0.0]]);
        let v = minimal_time(&e1, &[0.0, 0.0], &p).unwrap();
        assert_eq!(v.value, 3.0);
        assert_eq!(v.attaining_direction, Some(vec![1.0, 0.0]));
        let q = Region::from_points(2, vec![vec![3.0, 1.0]]);
        let v = minimal_time(&e1, &[0.0, 0.0], &q).unwrap();
        assert!(v.value.is_infinite() && v.attaining_direction.is_none());
    }

    #[test]
    fn minimal_time_cap_and_ray() {
        // box [2,3]×[−1,1], from the origin
        let b = Region::from_polytopes(2, vec![Polyhedron::boxed(&[2.0, -1.0], &[3.0, 1.0])]);
        let e1 = DirectionSet::finite(2, vec![vec![1.0, 0.0]]).unwrap();
        assert!((minimal_time(&e1, &[0.0, 0.0], &b).unwrap().value - 2.0).abs() < 1e-9);
        let up = DirectionSet::finite(2, vec![vec![0.0, 1.0]]).unwrap();
        assert!(minimal_time(&up, &[0.0, 0.0], &b).unwrap().value.is_infinite());
        // upper quadrant cap from (0,−3): nearest admissible point (2,−1)
        let cap = DirectionSet::cap(quadrant()).unwrap();
        let v = minimal_time(&cap, &[0.0, -3.0], &b).unwrap();
        assert!((v.value - 8f64.sqrt()).abs() < 1e-9);
        let u = v.attaining_direction.unwrap();
        let hit = linalg::axpy(&[0.0, -3.0], v.value, &u);
        assert!(b.contains(&hit, 1e-9));
    }
}
