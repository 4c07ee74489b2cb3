//! Sample points of `U`, `V` and of `graph F ∩ (U × V)`.

use super::NeighborhoodSpec;
use crate::linalg;
use crate::maps::{BasePoint, MapKind, SetValuedMap};

/// Cartesian grid of `density` points per axis on the cube around `center`,
/// restricted to the open ball of the given radius. The center is always
/// first.
pub fn ball_grid(center: &[f64], radius: f64, density: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let axis: Vec<f64> = (0..density).map(|k| -1.0 + 2.0 * k as f64 / (density - 1) as f64).collect();
    let mut out = vec![center.to_vec()];
    let mut idx = vec![0usize; dim];
    loop {
        let offset: Vec<f64> = idx.iter().map(|&k| radius * axis[k]).collect();
        let n = linalg::norm(&offset);
        if n > 0.0 && n < radius * (1.0 - 1e-9) {
            out.push(linalg::add(center, &offset));
        }
        let mut i = 0;
        while i < dim {
            idx[i] += 1;
            if idx[i] < density {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == dim {
            break;
        }
    }
    out
}

/// Graph points `(x, y)` with `x ∈ U`, `y ∈ F(x) ∩ V`; the base point first.
pub fn graph_points(f: &SetValuedMap, base: &BasePoint, spec: &NeighborhoodSpec) -> Vec<(Vec<f64>, Vec<f64>)> {
    let in_u = |x: &[f64]| linalg::dist(x, &base.x) < spec.rho_x;
    let in_v = |y: &[f64]| linalg::dist(y, &base.y) < spec.rho_y;
    let mut out = vec![(base.x.clone(), base.y.clone())];
    let push = |out: &mut Vec<(Vec<f64>, Vec<f64>)>, x: &[f64], y: Vec<f64>| {
        if !out.iter().any(|(a, b)| linalg::dist(a, x) <= 1e-12 && linalg::dist(b, &y) <= 1e-12) {
            out.push((x.to_vec(), y));
        }
    };
    if let MapKind::Sampled { points, .. } = &f.kind {
        for p in points {
            let (x, y) = p.split_at(f.n);
            if in_u(x) && in_v(y) {
                push(&mut out, x, y.to_vec());
            }
        }
        return out;
    }
    let y_probe = ball_grid(&base.y, spec.rho_y, y_density(spec.grid_density, f.m));
    for x in ball_grid(&base.x, spec.rho_x, spec.grid_density) {
        let values = f.values_at(&x);
        for y in values.points {
            if in_v(&y) {
                push(&mut out, &x, y);
            }
        }
        for poly in &values.polytopes {
            for q in &y_probe {
                if let Some(y) = poly.project(q) {
                    if in_v(&y) {
                        push(&mut out, &x, y);
                    }
                }
            }
        }
    }
    out
}

/// Density of the `V` grid: full in one dimension, coarser above.
pub fn y_density(density: usize, m: usize) -> usize {
    match m {
        1 => density,
        2 => density.min(9),
        _ => density.min(5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_grid_is_open() {
        let g = ball_grid(&[0.0], 1.0, 21);
        assert_eq!(g.len(), 19);
        assert!(g.iter().all(|p| p[0].abs() < 1.0));
        let g2 = ball_grid(&[1.0, 1.0], 0.5, 5);
        assert_eq!(g2[0], vec![1.0, 1.0]);
        assert!(g2.iter().all(|p| linalg::dist(p, &[1.0, 1.0]) < 0.5));
    }

    #[test]
    fn epigraph_graph_points() {
        let f = SetValuedMap::epigraph(vec![1.0]);
        let spec = NeighborhoodSpec::new(0.2, 0.2, 0.4).unwrap().with_grid_density(5).unwrap();
        let pts = graph_points(&f, &BasePoint::origin(&f), &spec);
        assert!(pts.iter().all(|(x, y)| y[0] >= x[0] - 1e-12));
        assert!(pts.iter().any(|(x, y)| x[0] > 0.0 && (y[0] - x[0]).abs() < 1e-12));
    }
}
