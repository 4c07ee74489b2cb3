//! Small dense vector helpers. Vectors are plain `Vec<f64>` / `&[f64]`;
//! decompositions go through nalgebra.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

pub fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

pub fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// Lexicographic comparison with `total_cmp` on each coordinate.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn rows_matrix(rows: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    // pad to at least `dim` rows so the SVD returns a full right factor
    let r = rows.len().max(dim);
    DMatrix::from_fn(r, dim, |i, j| rows.get(i).map_or(0.0, |row| row[j]))
}

fn svd_tol(s: &nalgebra::DVector<f64>, tol: f64) -> f64 {
    let smax = s.iter().cloned().fold(0.0, f64::max);
    tol * smax.max(1.0)
}

/// Orthonormal basis of the span of `rows` (as row vectors).
pub fn row_space(rows: &[Vec<f64>], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    if rows.is_empty() || dim == 0 {
        return Vec::new();
    }
    let m = rows_matrix(rows, dim);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let cut = svd_tol(&svd.singular_values, tol);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cut)
        .map(|(i, _)| vt.row(i).iter().cloned().collect())
        .collect()
}

/// Orthonormal basis of `{z : <row, z> = 0 for every row}`.
pub fn null_space(rows: &[Vec<f64>], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return (0..dim).map(|i| unit(dim, i)).collect();
    }
    let m = rows_matrix(rows, dim);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let cut = svd_tol(&svd.singular_values, tol);
    // v_t is dim x dim because the matrix has at least dim rows
    (0..dim).filter(|&i| svd.singular_values[i] <= cut).map(|i| vt.row(i).iter().cloned().collect()).collect()
}

pub fn rank(rows: &[Vec<f64>], dim: usize, tol: f64) -> usize {
    row_space(rows, dim, tol).len()
}

/// Projects `v` onto the span of the orthonormal `basis`.
pub fn project_onto_basis(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for b in basis {
        let c = dot(v, b);
        for (o, bi) in out.iter_mut().zip(b) {
            *o += c * bi;
        }
    }
    out
}

/// Minimum-norm least-squares solution of `A x = b` where `A` has the given rows.
pub fn lstsq(rows: &[Vec<f64>], cols: usize, b: &[f64]) -> Vec<f64> {
    if rows.is_empty() {
        return vec![0.0; cols];
    }
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let rhs = nalgebra::DVector::from_column_slice(b);
    let svd = a.svd(true, true);
    let eps = svd_tol(&svd.singular_values, 1e-12);
    match svd.solve(&rhs, eps) {
        Ok(x) => x.iter().cloned().collect(),
        Err(_) => vec![0.0; cols],
    }
}

pub fn mat_vec(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| dot(r, v)).collect()
}

pub fn transpose(rows: &[Vec<f64>], cols: usize) -> Vec<Vec<f64>> {
    (0..cols).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

pub fn invert(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return None;
    }
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let inv = a.try_inverse()?;
    Some((0..n).map(|i| inv.row(i).iter().cloned().collect()).collect())
}

/// Smallest singular value of a matrix given by rows.
pub fn sigma_min(rows: &[Vec<f64>], cols: usize) -> f64 {
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    a.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_plane() {
        let ns = null_space(&[vec![1.0, 1.0, 0.0]], 3, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(v, &[1.0, 1.0, 0.0]).abs() < 1e-12);
        }
    }

    #[test]
    fn lstsq_min_norm() {
        let x = lstsq(&[vec![1.0, 1.0]], 2, &[2.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_detects_dependence() {
        assert_eq!(rank(&[vec![1.0, 2.0], vec![2.0, 4.0]], 2, 1e-10), 1);
    }
}
