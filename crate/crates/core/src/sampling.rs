//! Deterministic point sets: sphere grids and simplex-grid combinations.

use crate::linalg;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// `count` deterministic unit vectors in `R^dim`.
///
/// * `dim = 1`: `{+1, −1}` regardless of `count`.
/// * `dim = 2`: equispaced angles `2πk/count` (so `e₁` is always included).
/// * `dim = 3`: Fibonacci lattice.
/// * higher: Halton sequence pushed through Box–Muller and normalized.
pub fn sphere_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let count = count.max(1);
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let th = golden * k as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::with_capacity(count);
            let mut i = 1u64;
            while out.len() < count {
                let mut v = Vec::with_capacity(dim);
                for j in (0..dim).step_by(2) {
                    let u1 = radical_inverse(i, PRIMES[j % PRIMES.len()]).max(1e-12);
                    let u2 = radical_inverse(i, PRIMES[(j + 1) % PRIMES.len()]);
                    let r = (-2.0 * u1.ln()).sqrt();
                    let a = std::f64::consts::TAU * u2;
                    v.push(r * a.cos());
                    if j + 1 < dim {
                        v.push(r * a.sin());
                    }
                }
                i += 1;
                if let Some(u) = linalg::normalized(&v) {
                    out.push(u);
                }
            }
            out
        }
    }
}

/// All weight vectors `w ∈ N^k` with `Σ w = n`, in lexicographic order.
pub fn simplex_compositions(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=n).rev() {
            prefix.push(a);
            rec(k - 1, n - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(k, n, &mut Vec::new(), &mut out);
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Normalized nonnegative combinations of `gens` on a simplex grid, with the
/// finest resolution that keeps the number of combinations at most
/// `target` (but always at least the generators themselves).
pub fn cone_directions(gens: &[Vec<f64>], target: usize) -> Vec<Vec<f64>> {
    let k = gens.len();
    if k == 0 {
        return Vec::new();
    }
    let mut res = 1;
    while binomial(res + k, k - 1) <= target {
        res += 1;
    }
    let dim = gens[0].len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for w in simplex_compositions(k, res) {
        let mut v = vec![0.0; dim];
        for (g, &wi) in gens.iter().zip(&w) {
            if wi > 0 {
                v = linalg::axpy(&v, wi as f64, g);
            }
        }
        if let Some(u) = linalg::normalized(&v) {
            if linalg::norm(&v) > 1e-9 * res as f64 {
                out.push(u);
            }
        }
    }
    crate::polyhedron::dedup(&mut out, 1e-12);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_are_unit() {
        for dim in 1..6 {
            for p in sphere_points(dim, 40) {
                assert!((linalg::norm(&p) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(sphere_points(2, 64)[0], vec![1.0, 0.0]);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(simplex_compositions(2, 14).len(), 15);
        assert_eq!(simplex_compositions(3, 2).len(), 6);
    }

    #[test]
    fn cap_of_quadrant_has_fifteen_directions() {
        let d = cone_directions(&[vec![1.0, 0.0], vec![0.0, 1.0]], 15);
        assert_eq!(d.len(), 15);
        assert!(d.iter().all(|u| u[0] >= 0.0 && u[1] >= 0.0));
    }
}
