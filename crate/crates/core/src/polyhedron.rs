//! Convex polyhedra in H-representation, Euclidean projection onto them, and
//! conversion between inequality and generator descriptions.
//!
//! Projection is an exact primal active-set method for
//! `min ½‖z − w‖²  s.t.  A z ≤ b, E z = e`, started from a simplex phase-1
//! point. Generator/inequality conversion goes through facet enumeration of
//! the homogenized cone, which is adequate at the small dimensions used here.

use crate::linalg::{self, dot, norm};
use crate::lp::{LinearProgram, LpOutcome};

pub(crate) const ACTIVE_TOL: f64 = 1e-10;

/// `{ z : a_i·z ≤ b_i, e_j·z = f_j }`
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    ineq_rows: Vec<Vec<f64>>,
    ineq_rhs: Vec<f64>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
}

/// Generator description: `conv(vertices) + cone(rays)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VRep {
    pub vertices: Vec<Vec<f64>>,
    pub rays: Vec<Vec<f64>>,
}

impl Polyhedron {
    /// The whole space `R^dim`.
    pub fn universe(dim: usize) -> Self {
        Self { dim, ineq_rows: Vec::new(), ineq_rhs: Vec::new(), eq_rows: Vec::new(), eq_rhs: Vec::new() }
    }

    /// Adds `a·z ≤ b`.
    pub fn le(mut self, a: Vec<f64>, b: f64) -> Self {
        assert_eq!(a.len(), self.dim);
        self.ineq_rows.push(a);
        self.ineq_rhs.push(b);
        self
    }

    /// Adds `a·z ≥ b`.
    pub fn ge(self, a: Vec<f64>, b: f64) -> Self {
        self.le(linalg::neg(&a), -b)
    }

    /// Adds `a·z = b`.
    pub fn eq(mut self, a: Vec<f64>, b: f64) -> Self {
        assert_eq!(a.len(), self.dim);
        self.eq_rows.push(a);
        self.eq_rhs.push(b);
        self
    }

    pub fn point(p: &[f64]) -> Self {
        let dim = p.len();
        (0..dim).fold(Self::universe(dim), |acc, i| acc.eq(linalg::unit(dim, i), p[i]))
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Self {
        let dim = lo.len();
        (0..dim).fold(Self::universe(dim), |acc, i| acc.le(linalg::unit(dim, i), hi[i]).ge(linalg::unit(dim, i), lo[i]))
    }

    /// Closed segment `[a, b]`.
    pub fn segment(a: &[f64], b: &[f64]) -> Self {
        let dim = a.len();
        let d = linalg::sub(b, a);
        if norm(&d) == 0.0 {
            return Self::point(a);
        }
        let mut p = Self::universe(dim).le(d.clone(), dot(&d, b)).ge(d.clone(), dot(&d, a));
        for n in linalg::null_space(&[d], dim, 1e-12) {
            let rhs = dot(&n, a);
            p = p.eq(n, rhs);
        }
        p
    }

    /// Closed ray `{a + s d : s ≥ 0}`.
    pub fn ray(a: &[f64], d: &[f64]) -> Self {
        let dim = a.len();
        let mut p = Self::universe(dim).ge(d.to_vec(), dot(d, a));
        for n in linalg::null_space(&[d.to_vec()], dim, 1e-12) {
            let rhs = dot(&n, a);
            p = p.eq(n, rhs);
        }
        p
    }

    /// Convex hull of `vertices` plus the cone of `rays`.
    pub fn from_vrep(dim: usize, vertices: &[Vec<f64>], rays: &[Vec<f64>]) -> Self {
        let gens: Vec<Vec<f64>> = vertices
            .iter()
            .map(|v| {
                let mut g = v.clone();
                g.push(1.0);
                g
            })
            .chain(rays.iter().map(|r| {
                let mut g = r.clone();
                g.push(0.0);
                g
            }))
            .collect();
        let facets = facets_of_cone(&gens, dim + 1);
        let mut p = Self::universe(dim);
        for f in facets {
            let (h, h0) = f.split_at(dim);
            if norm(h) < 1e-12 {
                continue;
            }
            // h·z + h0 ≥ 0
            p = p.le(linalg::neg(h), h0[0]);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.ineq_rows.iter().map(|r| r.as_slice()).zip(self.ineq_rhs.iter().copied())
    }

    pub fn equalities(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.eq_rows.iter().map(|r| r.as_slice()).zip(self.eq_rhs.iter().copied())
    }

    /// Largest constraint violation at `z` (0 when feasible).
    pub fn violation(&self, z: &[f64]) -> f64 {
        let ineq = self.inequalities().map(|(a, b)| (dot(a, z) - b) / norm(a).max(1e-300)).fold(0.0f64, f64::max);
        let eq = self.equalities().map(|(a, b)| (dot(a, z) - b).abs() / norm(a).max(1e-300)).fold(0.0f64, f64::max);
        ineq.max(eq)
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dim && self.violation(z) <= tol
    }

    /// Indices of inequalities active at `z`.
    pub fn active_set(&self, z: &[f64], tol: f64) -> Vec<usize> {
        self.inequalities()
            .enumerate()
            .filter(|(_, (a, b))| (dot(a, z) - b).abs() <= tol * norm(a).max(1.0))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn inequality(&self, i: usize) -> (&[f64], f64) {
        (&self.ineq_rows[i], self.ineq_rhs[i])
    }

    pub fn num_inequalities(&self) -> usize {
        self.ineq_rows.len()
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim);
        let mut p = self.clone();
        p.ineq_rows.extend(other.ineq_rows.iter().cloned());
        p.ineq_rhs.extend(other.ineq_rhs.iter().copied());
        p.eq_rows.extend(other.eq_rows.iter().cloned());
        p.eq_rhs.extend(other.eq_rhs.iter().copied());
        p
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &Polyhedron) -> Polyhedron {
        let (d1, d2) = (self.dim, other.dim);
        let left = |r: &Vec<f64>| linalg::concat(r, &vec![0.0; d2]);
        let right = |r: &Vec<f64>| linalg::concat(&vec![0.0; d1], r);
        Polyhedron {
            dim: d1 + d2,
            ineq_rows: self.ineq_rows.iter().map(left).chain(other.ineq_rows.iter().map(right)).collect(),
            ineq_rhs: self.ineq_rhs.iter().chain(&other.ineq_rhs).copied().collect(),
            eq_rows: self.eq_rows.iter().map(left).chain(other.eq_rows.iter().map(right)).collect(),
            eq_rhs: self.eq_rhs.iter().chain(&other.eq_rhs).copied().collect(),
        }
    }

    /// Applies a coordinate permutation: new coordinate `k` is old `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Polyhedron {
        let map = |r: &Vec<f64>| perm.iter().map(|&j| r[j]).collect::<Vec<_>>();
        Polyhedron {
            dim: self.dim,
            ineq_rows: self.ineq_rows.iter().map(map).collect(),
            ineq_rhs: self.ineq_rhs.clone(),
            eq_rows: self.eq_rows.iter().map(map).collect(),
            eq_rhs: self.eq_rhs.clone(),
        }
    }

    /// For a polyhedron in `R^{n+m}`, swaps the blocks to `R^{m+n}`.
    pub fn swap_blocks(&self, n: usize) -> Polyhedron {
        let m = self.dim - n;
        let perm: Vec<usize> = (n..n + m).chain(0..n).collect();
        self.permute(&perm)
    }

    /// Fixes the first `prefix.len()` coordinates, returning the slice in the
    /// remaining coordinates.
    pub fn slice_prefix(&self, prefix: &[f64]) -> Polyhedron {
        let k = prefix.len();
        let cut = |r: &Vec<f64>, b: f64| (r[k..].to_vec(), b - dot(&r[..k], prefix));
        let mut p = Polyhedron::universe(self.dim - k);
        for (r, b) in self.ineq_rows.iter().zip(&self.ineq_rhs) {
            let (a, rhs) = cut(r, *b);
            if norm(&a) < 1e-14 {
                if rhs < -ACTIVE_TOL {
                    // infeasible constant row
                    p = p.le(vec![0.0; self.dim - k], rhs);
                }
                continue;
            }
            p = p.le(a, rhs);
        }
        for (r, b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            let (a, rhs) = cut(r, *b);
            if norm(&a) < 1e-14 {
                if rhs.abs() > ACTIVE_TOL {
                    p = p.le(vec![0.0; self.dim - k], -1.0);
                }
                continue;
            }
            p = p.eq(a, rhs);
        }
        p
    }

    /// Maps `x ↦ x + shift`.
    pub fn translate(&self, shift: &[f64]) -> Polyhedron {
        let mut p = self.clone();
        for (r, b) in p.ineq_rows.iter().zip(p.ineq_rhs.iter_mut()) {
            *b += dot(r, shift);
        }
        for (r, b) in p.eq_rows.iter().zip(p.eq_rhs.iter_mut()) {
            *b += dot(r, shift);
        }
        p
    }

    fn unique_point(&self) -> Option<Option<Vec<f64>>> {
        if self.eq_rows.is_empty() || linalg::rank(&self.eq_rows, self.dim, 1e-12) < self.dim {
            return None;
        }
        let z = linalg::lstsq(&self.eq_rows, self.dim, &self.eq_rhs);
        let scale = 1.0 + norm(&z);
        Some((self.violation(&z) <= 1e-9 * scale).then_some(z))
    }

    /// Some point of the polyhedron, or `None` if it is empty.
    pub fn feasible_point(&self) -> Option<Vec<f64>> {
        if let Some(u) = self.unique_point() {
            return u;
        }
        let mut lp = LinearProgram::new(self.dim);
        lp.ub_rows = self.ineq_rows.clone();
        lp.ub_rhs = self.ineq_rhs.clone();
        lp.eq_rows = self.eq_rows.clone();
        lp.eq_rhs = self.eq_rhs.clone();
        match lp.solve() {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    /// Euclidean projection of `w`, or `None` if the polyhedron is empty.
    pub fn project(&self, w: &[f64]) -> Option<Vec<f64>> {
        assert_eq!(w.len(), self.dim);
        if let Some(u) = self.unique_point() {
            return u;
        }
        let scale = 1.0 + norm(w);
        if self.violation(w) <= 1e-12 * scale {
            return Some(w.to_vec());
        }
        let start = self.feasible_point()?;
        Some(self.active_set_projection(w, start))
    }

    pub fn distance(&self, w: &[f64]) -> f64 {
        self.project(w).map_or(f64::INFINITY, |p| linalg::dist(&p, w))
    }

    fn active_set_projection(&self, w: &[f64], mut z: Vec<f64>) -> Vec<f64> {
        let dim = self.dim;
        let mut working: Vec<usize> = Vec::new();
        for _ in 0..2000 {
            let scale = 1.0 + norm(w) + norm(&z);
            let rows: Vec<Vec<f64>> =
                self.eq_rows.iter().cloned().chain(working.iter().map(|&i| self.ineq_rows[i].clone())).collect();
            let basis = linalg::row_space(&rows, dim, 1e-12);
            let g = linalg::sub(&z, w);
            let p = linalg::neg(&linalg::sub(&g, &linalg::project_onto_basis(&g, &basis)));
            if norm(&p) <= 1e-13 * scale {
                if working.is_empty() {
                    return z;
                }
                let cols = linalg::transpose(&rows, dim);
                let mult = linalg::lstsq(&cols, rows.len(), &g);
                let ne = self.eq_rows.len();
                let mut worst: Option<(usize, f64)> = None;
                for (k, &i) in working.iter().enumerate() {
                    let lambda = -mult[ne + k];
                    if lambda < -1e-11 * scale && worst.is_none_or(|(_, l)| lambda < l) {
                        worst = Some((i, lambda));
                    }
                }
                match worst {
                    None => return z,
                    Some((i, _)) => working.retain(|&j| j != i),
                }
            } else {
                let mut step = 1.0;
                let mut blocking = None;
                for (i, (a, b)) in self.inequalities().enumerate() {
                    if working.contains(&i) {
                        continue;
                    }
                    let ap = dot(a, &p);
                    if ap > 1e-14 * norm(a) * norm(&p) {
                        let s = ((b - dot(a, &z)) / ap).max(0.0);
                        if s < step {
                            step = s;
                            blocking = Some(i);
                        }
                    }
                }
                z = linalg::axpy(&z, step, &p);
                if let Some(i) = blocking {
                    working.push(i);
                }
            }
        }
        z
    }

    /// Generator description (vertices and extreme rays). An empty polyhedron
    /// has no vertices.
    pub fn vrep(&self) -> VRep {
        let d = self.dim;
        let hom = |r: &Vec<f64>, b: f64| {
            let mut h = linalg::neg(r);
            h.push(b);
            h
        };
        // homogenized cone {(z, s) : -a·z + b s ≥ 0, s ≥ 0, ±(e·z - f s) ≥ 0}
        let mut halfspaces: Vec<Vec<f64>> =
            self.ineq_rows.iter().zip(&self.ineq_rhs).map(|(r, b)| hom(r, *b)).collect();
        halfspaces.push(linalg::unit(d + 1, d));
        for (r, b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            let h = hom(r, *b);
            halfspaces.push(linalg::neg(&h));
            halfspaces.push(h);
        }
        let gens = extreme_rays(&halfspaces, d + 1);
        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        for g in gens {
            let s = g[d];
            if s > 1e-9 * norm(&g) {
                vertices.push(linalg::scale(&g[..d], 1.0 / s));
            } else if let Some(r) = linalg::normalized(&g[..d]) {
                rays.push(r);
            }
        }
        dedup(&mut vertices, 1e-9);
        dedup(&mut rays, 1e-9);
        VRep { vertices, rays }
    }
}

pub(crate) fn dedup(vs: &mut Vec<Vec<f64>>, tol: f64) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs.drain(..) {
        if !out.iter().any(|u| linalg::dist(u, &v) <= tol * (1.0 + norm(&v))) {
            out.push(v);
        }
    }
    *vs = out;
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Inward normals `h` with `cone(gens) = { u : h·u ≥ 0 for all h }`.
/// Lineality and lower-dimensional cones are handled: the orthogonal
/// complement of the span appears as `±c` pairs.
pub(crate) fn facets_of_cone(gens: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut g: Vec<Vec<f64>> = gens.iter().filter_map(|v| linalg::normalized(v)).collect();
    dedup(&mut g, 1e-10);
    let comp = linalg::null_space(&g, dim, 1e-10);
    let k = dim - comp.len();
    let mut out: Vec<Vec<f64>> = comp.iter().flat_map(|c| [c.clone(), linalg::neg(c)]).collect();
    if k == 0 {
        return out;
    }
    let tol = 1e-9;
    let mut facets: Vec<Vec<f64>> = Vec::new();
    combinations(g.len(), k - 1, |subset| {
        let rows: Vec<Vec<f64>> = subset.iter().map(|&i| g[i].clone()).chain(comp.iter().cloned()).collect();
        let ns = linalg::null_space(&rows, dim, 1e-9);
        if ns.len() != 1 {
            return;
        }
        let h = &ns[0];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in &g {
            let s = dot(h, v);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        let cand = if lo >= -tol {
            h.clone()
        } else if hi <= tol {
            linalg::neg(h)
        } else {
            return;
        };
        if !facets.iter().any(|f| linalg::dist(f, &cand) < 1e-8) {
            facets.push(cand);
        }
    });
    out.extend(facets);
    out
}

/// Generators of `{ u : a·u ≥ 0 for all a in halfspaces }`.
pub(crate) fn extreme_rays(halfspaces: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let neg: Vec<Vec<f64>> = halfspaces.iter().map(|a| linalg::neg(a)).collect();
    if neg.iter().all(|a| norm(a) < 1e-14) {
        return (0..dim).flat_map(|i| [linalg::unit(dim, i), linalg::neg(&linalg::unit(dim, i))]).collect();
    }
    let mut rays: Vec<Vec<f64>> = facets_of_cone(&neg, dim).into_iter().map(|h| linalg::neg(&h)).collect();
    dedup(&mut rays, 1e-10);
    rays
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: &[f64], b: &[f64], tol: f64) -> bool {
        linalg::dist(a, b) <= tol
    }

    #[test]
    fn projection_onto_box() {
        let p = Polyhedron::boxed(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(approx(&p.project(&[2.0, 0.5]).unwrap(), &[1.0, 0.5], 1e-12));
        assert!(approx(&p.project(&[-1.0, -3.0]).unwrap(), &[0.0, 0.0], 1e-12));
        assert!(approx(&p.project(&[0.3, 0.4]).unwrap(), &[0.3, 0.4], 1e-15));
    }

    #[test]
    fn projection_onto_triangle_edge() {
        let p = Polyhedron::from_vrep(2, &[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]], &[]);
        // closest point of the hypotenuse x + y = 2 to (2,2) is (1,1)
        assert!(approx(&p.project(&[2.0, 2.0]).unwrap(), &[1.0, 1.0], 1e-10));
    }

    #[test]
    fn projection_with_equalities() {
        // line y = 2x in R^2 (a graph); project (1, 0): t = 1/5 -> (0.2, 0.4)
        let p = Polyhedron::universe(2).eq(vec![2.0, -1.0], 0.0);
        assert!(approx(&p.project(&[1.0, 0.0]).unwrap(), &[0.2, 0.4], 1e-12));
    }

    #[test]
    fn empty_projection_is_none() {
        let p = Polyhedron::universe(1).le(vec![1.0], -1.0).ge(vec![1.0], 1.0);
        assert!(p.project(&[0.0]).is_none());
        assert!(p.is_empty());
    }

    #[test]
    fn vrep_of_square() {
        let p = Polyhedron::boxed(&[0.0, 0.0], &[1.0, 1.0]);
        let v = p.vrep();
        assert_eq!(v.vertices.len(), 4);
        assert!(v.rays.is_empty());
    }

    #[test]
    fn vrep_of_halfline() {
        let p = Polyhedron::universe(1).ge(vec![1.0], 2.0);
        let v = p.vrep();
        assert_eq!(v.vertices, vec![vec![2.0]]);
        assert_eq!(v.rays.len(), 1);
        assert!((v.rays[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn facets_of_orthant() {
        let f = facets_of_cone(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2);
        assert_eq!(f.len(), 2);
        for h in f {
            assert!(h.iter().all(|x| *x >= -1e-12));
        }
    }

    #[test]
    fn rays_of_subspace() {
        // {u : u1 - u2 = 0} written as two halfspaces
        let r = extreme_rays(&[vec![1.0, -1.0], vec![-1.0, 1.0]], 2);
        assert_eq!(r.len(), 2);
        for g in r {
            assert!((g[0] - g[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn slice_and_swap() {
        // graph of y = 2x in R^2
        let g = Polyhedron::universe(2).eq(vec![2.0, -1.0], 0.0);
        let s = g.slice_prefix(&[1.5]);
        assert!(approx(&s.project(&[0.0]).unwrap(), &[3.0], 1e-12));
        let inv = g.swap_blocks(1).slice_prefix(&[3.0]);
        assert!(approx(&inv.project(&[0.0]).unwrap(), &[1.5], 1e-12));
    }
}
