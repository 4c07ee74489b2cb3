//! Closed set-valued mappings `F: Rⁿ ⇉ Rᵐ` and the geometric queries used by
//! the verifiers: values, preimages, graph membership and images of
//! directional balls.

use crate::cones::{self, DirectionSet, Region};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm};
use crate::polyhedron::Polyhedron;

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogMap {
    /// `F(x) = {A x}`; rows of `A`.
    Linear(Vec<Vec<f64>>),
    /// `F(x) = {x²}` on `R`.
    Square,
    /// Inverse of `Square`: `F(y) = {±√y}` for `y ≥ 0`, empty otherwise.
    SquareRoot,
    /// `F(x) = { y ∈ R : y ≥ ⟨a, x⟩ }`.
    Epigraph(Vec<f64>),
    /// Closed staircase on `R` with treads `[kh, (k+1)h] × {kh}` and risers
    /// `{kh} × [(k−1)h, kh]` for `|k| ≤ steps`.
    Staircase { step: f64, steps: usize },
    /// `F(x₁, x₂) = F₁(x₁) × F₂(x₂)`.
    Product(Box<SetValuedMap>, Box<SetValuedMap>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Polyhedral(Vec<Polyhedron>),
    /// Finite graph sample with resolution `h`.
    Sampled {
        points: Vec<Vec<f64>>,
        h: f64,
    },
    Catalog(CatalogMap),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetValuedMap {
    pub n: usize,
    pub m: usize,
    pub kind: MapKind,
}

/// A point `(x̄, ȳ)` of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl BasePoint {
    pub fn new(f: &SetValuedMap, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_dim(f.n, x.len())?;
        check_dim(f.m, y.len())?;
        let tol = match &f.kind {
            MapKind::Sampled { h, .. } => *h,
            _ => 1e-9,
        };
        let p = linalg::concat(&x, &y);
        if !f.graph_contains(&p, tol) {
            let violation = f.values_at(&x).distance(&y);
            return Err(Error::PointNotInSet { violation });
        }
        Ok(Self { x, y })
    }

    pub fn origin(f: &SetValuedMap) -> Self {
        Self { x: vec![0.0; f.n], y: vec![0.0; f.m] }
    }

    pub fn stacked(&self) -> Vec<f64> {
        linalg::concat(&self.x, &self.y)
    }
}

impl SetValuedMap {
    pub fn polyhedral(n: usize, m: usize, pieces: Vec<Polyhedron>) -> Result<Self> {
        for p in &pieces {
            check_dim(n + m, p.dim())?;
        }
        Ok(Self { n, m, kind: MapKind::Polyhedral(pieces) })
    }

    pub fn sampled(n: usize, m: usize, points: Vec<Vec<f64>>, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("sample resolution h = {h}")));
        }
        for p in &points {
            check_dim(n + m, p.len())?;
        }
        Ok(Self { n, m, kind: MapKind::Sampled { points, h } })
    }

    pub fn linear(a: Vec<Vec<f64>>) -> Result<Self> {
        let m = a.len();
        let n = a.first().map_or(0, |r| r.len());
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        for r in &a {
            check_dim(n, r.len())?;
        }
        Ok(Self { n, m, kind: MapKind::Catalog(CatalogMap::Linear(a)) })
    }

    pub fn identity(n: usize) -> Self {
        Self::linear((0..n).map(|i| linalg::unit(n, i)).collect()).expect("n > 0")
    }

    pub fn square() -> Self {
        Self { n: 1, m: 1, kind: MapKind::Catalog(CatalogMap::Square) }
    }

    pub fn square_root() -> Self {
        Self { n: 1, m: 1, kind: MapKind::Catalog(CatalogMap::SquareRoot) }
    }

    pub fn epigraph(a: Vec<f64>) -> Self {
        Self { n: a.len(), m: 1, kind: MapKind::Catalog(CatalogMap::Epigraph(a)) }
    }

    pub fn staircase(step: f64, steps: usize) -> Result<Self> {
        if !(step > 0.0) || steps == 0 {
            return Err(Error::InvalidParameter(format!("staircase step {step}, steps {steps}")));
        }
        Ok(Self { n: 1, m: 1, kind: MapKind::Catalog(CatalogMap::Staircase { step, steps }) })
    }

    pub fn product(f1: SetValuedMap, f2: SetValuedMap) -> Self {
        Self { n: f1.n + f2.n, m: f1.m + f2.m, kind: MapKind::Catalog(CatalogMap::Product(Box::new(f1), Box::new(f2))) }
    }

    /// Whether the graph is a finite union of convex polyhedra.
    pub fn is_polyhedral(&self) -> bool {
        match &self.kind {
            MapKind::Polyhedral(_) => true,
            MapKind::Sampled { .. } => false,
            MapKind::Catalog(c) => match c {
                CatalogMap::Linear(_) | CatalogMap::Epigraph(_) | CatalogMap::Staircase { .. } => true,
                CatalogMap::Square | CatalogMap::SquareRoot => false,
                CatalogMap::Product(a, b) => a.is_polyhedral() && b.is_polyhedral(),
            },
        }
    }

    /// Graph pieces in `R^{n+m}` for polyhedral maps.
    pub fn graph_pieces(&self) -> Result<Vec<Polyhedron>> {
        let (n, m) = (self.n, self.m);
        match &self.kind {
            MapKind::Polyhedral(p) => Ok(p.clone()),
            MapKind::Sampled { .. } => Err(Error::NotPolyhedral),
            MapKind::Catalog(c) => match c {
                CatalogMap::Linear(a) => Ok(vec![(0..m).fold(Polyhedron::universe(n + m), |p, i| {
                    let mut row = a[i].clone();
                    row.extend(linalg::neg(&linalg::unit(m, i)));
                    p.eq(row, 0.0)
                })]),
                CatalogMap::Epigraph(a) => {
                    let mut row = a.clone();
                    row.push(-1.0);
                    Ok(vec![Polyhedron::universe(n + 1).le(row, 0.0)])
                }
                CatalogMap::Staircase { step, steps } => {
                    let h = *step;
                    let k = *steps as i64;
                    let mut out = Vec::new();
                    for j in -k..k {
                        let jh = j as f64 * h;
                        out.push(Polyhedron::segment(&[jh, jh], &[jh + h, jh]));
                        out.push(Polyhedron::segment(&[jh + h, jh], &[jh + h, jh + h]));
                    }
                    Ok(out)
                }
                CatalogMap::Product(f1, f2) => {
                    let (g1, g2) = (f1.graph_pieces()?, f2.graph_pieces()?);
                    // (x1, y1, x2, y2) -> (x1, x2, y1, y2)
                    let (n1, m1, n2, m2) = (f1.n, f1.m, f2.n, f2.m);
                    let perm: Vec<usize> = (0..n1)
                        .chain(n1 + m1..n1 + m1 + n2)
                        .chain(n1..n1 + m1)
                        .chain(n1 + m1 + n2..n1 + m1 + n2 + m2)
                        .collect();
                    Ok(g1
                        .iter()
                        .flat_map(|p| g2.iter().map(|q| p.product(q).permute(&perm)).collect::<Vec<_>>())
                        .collect())
                }
                CatalogMap::Square | CatalogMap::SquareRoot => Err(Error::NotPolyhedral),
            },
        }
    }

    /// Swaps the roles of domain and range.
    pub fn inverse(&self) -> SetValuedMap {
        let (n, m) = (self.n, self.m);
        let kind = match &self.kind {
            MapKind::Polyhedral(p) => MapKind::Polyhedral(p.iter().map(|q| q.swap_blocks(n)).collect()),
            MapKind::Sampled { points, h } => {
                MapKind::Sampled { points: points.iter().map(|p| linalg::concat(&p[n..], &p[..n])).collect(), h: *h }
            }
            MapKind::Catalog(c) => match c {
                CatalogMap::Linear(a) if n == m => match linalg::invert(a) {
                    Some(inv) => MapKind::Catalog(CatalogMap::Linear(inv)),
                    None => MapKind::Polyhedral(self.swapped_pieces()),
                },
                CatalogMap::Square => MapKind::Catalog(CatalogMap::SquareRoot),
                CatalogMap::SquareRoot => MapKind::Catalog(CatalogMap::Square),
                CatalogMap::Product(f1, f2) => {
                    MapKind::Catalog(CatalogMap::Product(Box::new(f1.inverse()), Box::new(f2.inverse())))
                }
                _ => MapKind::Polyhedral(self.swapped_pieces()),
            },
        };
        SetValuedMap { n: m, m: n, kind }
    }

    fn swapped_pieces(&self) -> Vec<Polyhedron> {
        self.graph_pieces().expect("polyhedral catalog entry").iter().map(|q| q.swap_blocks(self.n)).collect()
    }

    /// `F(x)`. Sampled graphs gather the samples whose `x` lies in the
    /// half-width-`h/2` box around the query.
    pub fn values_at(&self, x: &[f64]) -> Region {
        let (n, m) = (self.n, self.m);
        match &self.kind {
            MapKind::Polyhedral(pieces) => {
                Region::from_polytopes(m, pieces.iter().map(|p| p.slice_prefix(x)).filter(|p| !p.is_empty()).collect())
            }
            MapKind::Sampled { points, h } => Region::from_points(
                m,
                points
                    .iter()
                    .filter(|p| p[..n].iter().zip(x).all(|(a, b)| (a - b).abs() <= 0.5 * h * (1.0 + 1e-12)))
                    .map(|p| p[n..].to_vec())
                    .collect(),
            ),
            MapKind::Catalog(c) => match c {
                CatalogMap::Linear(a) => Region::from_points(m, vec![linalg::mat_vec(a, x)]),
                CatalogMap::Square => Region::from_points(1, vec![vec![x[0] * x[0]]]),
                CatalogMap::SquareRoot => {
                    if x[0] < 0.0 {
                        Region::empty(1)
                    } else if x[0] == 0.0 {
                        Region::from_points(1, vec![vec![0.0]])
                    } else {
                        let s = x[0].sqrt();
                        Region::from_points(1, vec![vec![s], vec![-s]])
                    }
                }
                CatalogMap::Epigraph(a) => {
                    Region::from_polytopes(1, vec![Polyhedron::universe(1).ge(vec![1.0], linalg::dot(a, x))])
                }
                CatalogMap::Staircase { .. } => {
                    SetValuedMap { n, m, kind: MapKind::Polyhedral(self.graph_pieces().expect("polyhedral")) }
                        .values_at(x)
                }
                CatalogMap::Product(f1, f2) => region_product(&f1.values_at(&x[..f1.n]), &f2.values_at(&x[f1.n..])),
            },
        }
    }

    /// `F⁻¹(y)`.
    pub fn preimage(&self, y: &[f64]) -> Region {
        self.inverse().values_at(y)
    }

    pub fn graph_contains(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.n + self.m {
            return false;
        }
        match &self.kind {
            MapKind::Sampled { points, h } => points.iter().any(|q| linalg::dist(p, q) <= h + tol),
            MapKind::Polyhedral(pieces) => pieces.iter().any(|q| q.contains(p, tol)),
            _ => self.values_at(&p[..self.n]).contains(&p[self.n..], tol),
        }
    }

    /// `T_L(x, F⁻¹(y'))`; `y'` lies in the image of the open (closed)
    /// directional ball of radius `t` around `x` iff this is `< t` (`≤ t`).
    pub fn ball_preimage_time(&self, l: &DirectionSet, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(cones::minimal_time(l, x, &self.preimage(y))?.value)
    }

    /// `F(B(x,t) ∩ [x + cone L])` (or the closed-ball version). Sampled graphs
    /// are answered exactly over the stored samples; other maps are sampled
    /// at about `density` directions and radii.
    pub fn directional_ball_image(
        &self,
        x: &[f64],
        t: f64,
        l: &DirectionSet,
        closed: bool,
        density: usize,
    ) -> Result<Region> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, l.dim())?;
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius t = {t}")));
        }
        let inside = |r: f64| if closed { r <= t * (1.0 + 1e-12) } else { r < t };
        if let MapKind::Sampled { points, .. } = &self.kind {
            let n = self.n;
            let ys = points
                .iter()
                .filter(|p| {
                    let d = linalg::sub(&p[..n], x);
                    inside(norm(&d)) && l.admits(&d, cones::DEFAULT_TOL)
                })
                .map(|p| p[n..].to_vec())
                .collect();
            return Ok(Region::from_points(self.m, ys));
        }
        let mut out = self.values_at(x);
        let radii = ball_radii(t, density.max(2), closed);
        for u in l.sample(density.max(2)) {
            for &s in &radii {
                let xp = linalg::axpy(x, s, &u);
                out = out.union(self.values_at(&xp));
            }
        }
        Ok(out)
    }
}

/// Radii `t·k/R` for `k = 1..R`, the last one pulled inside for open balls.
pub(crate) fn ball_radii(t: f64, count: usize, closed: bool) -> Vec<f64> {
    (1..=count)
        .map(|k| {
            let s = t * k as f64 / count as f64;
            if k == count && !closed {
                t * (1.0 - 1e-6)
            } else {
                s
            }
        })
        .collect()
}

fn region_product(a: &Region, b: &Region) -> Region {
    let dim = a.dim + b.dim;
    let as_polys = |r: &Region| -> Vec<Polyhedron> {
        r.points.iter().map(|p| Polyhedron::point(p)).chain(r.polytopes.iter().cloned()).collect()
    };
    if a.polytopes.is_empty() && b.polytopes.is_empty() {
        let pts = a.points.iter().flat_map(|p| b.points.iter().map(move |q| linalg::concat(p, q))).collect();
        return Region::from_points(dim, pts);
    }
    let (pa, pb) = (as_polys(a), as_polys(b));
    Region::from_polytopes(dim, pa.iter().flat_map(|p| pb.iter().map(move |q| p.product(q))).collect())
}

/// Piecewise-linear minorant of `x ↦ x²`: the envelope of the tangents at
/// `jh`, `|j| ≤ k`, on `[−(k+½)h, (k+½)h]`. It is flat on `[−h/2, h/2]`.
pub fn linearize_square(h: f64, k: usize) -> SetValuedMap {
    let k = k as i64;
    let pieces = (-k..=k)
        .map(|j| {
            let jh = j as f64 * h;
            let (lo, hi) = (jh - 0.5 * h, jh + 0.5 * h);
            let f = |x: f64| 2.0 * jh * x - jh * jh;
            Polyhedron::segment(&[lo, f(lo)], &[hi, f(hi)])
        })
        .collect();
    SetValuedMap { n: 1, m: 1, kind: MapKind::Polyhedral(pieces) }
}

/// Graph of `x ↦ |x|` as two closed half-lines.
pub fn abs_graph() -> SetValuedMap {
    SetValuedMap {
        n: 1,
        m: 1,
        kind: MapKind::Polyhedral(vec![
            Polyhedron::ray(&[0.0, 0.0], &[1.0, 1.0]),
            Polyhedron::ray(&[0.0, 0.0], &[-1.0, 1.0]),
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_points(r: &Region) -> Vec<f64> {
        let mut v: Vec<f64> = r.points.iter().map(|p| p[0]).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn graph_contains_examples() {
        let id = SetValuedMap::identity(2);
        assert!(id.graph_contains(&[1.0, 2.0, 1.0, 2.0], 1e-12));
        assert!(!id.graph_contains(&[1.0, 2.0, 1.0, 3.0], 1e-12));
        let s = SetValuedMap::sampled(1, 1, vec![vec![0.0, 0.0], vec![0.1, 0.2]], 0.1).unwrap();
        // nearest sample (0,0) at distance 0.05
        assert!(s.graph_contains(&[0.03, 0.04], 0.0));
        assert!(!s.graph_contains(&[0.5, 0.5], 0.0));
    }

    #[test]
    fn inverse_examples() {
        let f = SetValuedMap::linear(vec![vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap();
        match f.inverse().kind {
            MapKind::Catalog(CatalogMap::Linear(inv)) => {
                let expect = [[0.5, -0.5], [0.0, 1.0]];
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((inv[i][j] - expect[i][j]).abs() < 1e-12);
                    }
                }
            }
            k => panic!("unexpected {k:?}"),
        }
        let s = SetValuedMap::sampled(1, 1, vec![vec![1.0, 2.0]], 0.1).unwrap();
        assert_eq!(s.inverse().kind, MapKind::Sampled { points: vec![vec![2.0, 1.0]], h: 0.1 });
        let sq = SetValuedMap::square().inverse();
        assert_eq!(sorted_points(&sq.values_at(&[4.0])), vec![-2.0, 2.0]);
        assert!(sq.values_at(&[-1.0]).is_empty());
        assert_eq!(sq.inverse(), SetValuedMap::square());
    }

    #[test]
    fn ball_image_examples() {
        let id = SetValuedMap::identity(1);
        let plus = DirectionSet::ray(&[1.0]).unwrap();
        let img = id.directional_ball_image(&[0.0], 1.0, &plus, false, 16).unwrap();
        let ys = sorted_points(&img);
        assert_eq!(ys[0], 0.0);
        assert!(ys.iter().all(|&y| (0.0..1.0).contains(&y)));
        assert!(*ys.last().unwrap() > 0.999);

        let full = DirectionSet::full_sphere(1);
        let sq = SetValuedMap::square();
        let t = 0.5;
        let closed = sorted_points(&sq.directional_ball_image(&[0.0], t, &full, true, 16).unwrap());
        assert_eq!(closed[0], 0.0);
        assert_eq!(*closed.last().unwrap(), t * t);
        let open = sorted_points(&sq.directional_ball_image(&[0.0], t, &full, false, 16).unwrap());
        assert!(*open.last().unwrap() < t * t);

        let two = SetValuedMap::linear(vec![vec![2.0]]).unwrap();
        let ys = sorted_points(&two.directional_ball_image(&[0.0], 1.0, &full, false, 16).unwrap());
        assert!(ys[0] > -2.0 && ys[0] < -1.99 && *ys.last().unwrap() < 2.0);
    }

    #[test]
    fn values_at_examples() {
        let a = SetValuedMap::linear(vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(a.values_at(&[1.0, 1.0]).points, vec![vec![3.0]]);
        let epi = SetValuedMap::epigraph(vec![1.0]);
        let v = epi.values_at(&[2.0]);
        assert!(v.contains(&[2.0], 0.0) && v.contains(&[1e6], 0.0) && !v.contains(&[1.9], 1e-12));
        let s = SetValuedMap::sampled(1, 1, vec![vec![0.0, 0.0], vec![1.0, 1.0]], 0.1).unwrap();
        assert!(s.values_at(&[0.5]).is_empty());
        assert_eq!(s.values_at(&[0.04]).points, vec![vec![0.0]]);
    }

    #[test]
    fn staircase_and_product() {
        let st = SetValuedMap::staircase(0.5, 2).unwrap();
        assert!(st.graph_contains(&[0.25, 0.0], 1e-12));
        assert!(st.graph_contains(&[0.5, 0.3], 1e-12));
        assert!(!st.graph_contains(&[0.25, 0.3], 1e-9));
        let p = SetValuedMap::product(SetValuedMap::identity(1), SetValuedMap::epigraph(vec![1.0]));
        assert!(p.graph_contains(&[1.0, 2.0, 1.0, 3.0], 1e-12));
        assert!(!p.graph_contains(&[1.0, 2.0, 1.0, 1.0], 1e-9));
        let pieces = p.graph_pieces().unwrap();
        assert!(pieces[0].contains(&[1.0, 2.0, 1.0, 3.0], 1e-12));
        let inv = p.inverse();
        assert!(inv.graph_contains(&[1.0, 3.0, 1.0, 2.0], 1e-12));
    }

    #[test]
    fn surrogates() {
        let l = linearize_square(0.1, 5);
        assert!(l.graph_contains(&[0.0, 0.0], 1e-12));
        assert!(l.graph_contains(&[0.05, 0.0], 1e-12));
        assert!(l.graph_contains(&[0.1, 0.01], 1e-12));
        let a = abs_graph();
        assert!(a.graph_contains(&[-2.0, 2.0], 1e-12));
        assert!(!a.graph_contains(&[-2.0, -2.0], 1e-9));
    }
}
