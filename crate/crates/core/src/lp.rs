//! Dense two-phase simplex for the small linear programs that appear in
//! feasibility tests, phase-1 starts and face reachability.
//!
//! Problem form: minimize `c·x` subject to `A_ub x <= b_ub`, `A_eq x = b_eq`,
//! with `x` free. Bland's rule is used throughout, so the method never cycles.

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub dim: usize,
    pub cost: Vec<f64>,
    pub ub_rows: Vec<Vec<f64>>,
    pub ub_rhs: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(dim: usize) -> Self {
        Self { dim, cost: vec![0.0; dim], ..Default::default() }
    }

    pub fn le(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
        self
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn minimize(mut self, cost: Vec<f64>) -> Self {
        self.cost = cost;
        self
    }

    pub fn solve(&self) -> LpOutcome {
        solve(self)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Returns false on unboundedness.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in 0..self.ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let reduced =
                    cost[j] - self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum::<f64>();
                if reduced < -1e-10 {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
        true
    }
}

fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.dim;
    let n_ub = lp.ub_rows.len();
    let m = n_ub + lp.eq_rows.len();
    // columns: x+ (n), x- (n), slacks (n_ub), artificials (m)
    let n_struct = 2 * n + n_ub;
    let ncols = n_struct + m;
    let mut rows = Vec::with_capacity(m);
    let all = lp
        .ub_rows
        .iter()
        .zip(&lp.ub_rhs)
        .map(|(r, b)| (r, *b, true))
        .chain(lp.eq_rows.iter().zip(&lp.eq_rhs).map(|(r, b)| (r, *b, false)));
    for (i, (a, b, is_ub)) in all.enumerate() {
        let mut row = vec![0.0; ncols + 1];
        for j in 0..n {
            row[j] = a[j];
            row[n + j] = -a[j];
        }
        if is_ub {
            row[2 * n + i] = 1.0;
        }
        row[ncols] = b;
        if b < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        row[n_struct + i] = 1.0;
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis: (n_struct..ncols).collect(), ncols };

    let scale = 1.0 + lp.ub_rhs.iter().chain(&lp.eq_rhs).fold(0.0f64, |a, b| a.max(b.abs()));

    // phase 1
    let mut cost1 = vec![0.0; ncols];
    for c in cost1.iter_mut().skip(n_struct) {
        *c = 1.0;
    }
    let allowed_all = vec![true; ncols];
    tab.optimize(&cost1, &allowed_all);
    let infeas: f64 = tab.basis.iter().enumerate().filter(|(_, &b)| b >= n_struct).map(|(i, _)| tab.rhs(i)).sum();
    if infeas > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }
    // drive artificials out of the basis; drop redundant rows
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n_struct {
            let col = (0..n_struct).find(|&j| tab.rows[i][j].abs() > 1e-9);
            match col {
                Some(c) => {
                    tab.pivot(i, c);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // phase 2
    let mut cost2 = vec![0.0; ncols];
    for j in 0..n {
        cost2[j] = lp.cost[j];
        cost2[n + j] = -lp.cost[j];
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < n_struct).collect();
    if !tab.optimize(&cost2, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut full = vec![0.0; ncols];
    for (i, &b) in tab.basis.iter().enumerate() {
        full[b] = tab.rhs(i);
    }
    let x: Vec<f64> = (0..n).map(|j| full[j] - full[n + j]).collect();
    let value = x.iter().zip(&lp.cost).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}
