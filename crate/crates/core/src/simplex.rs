//! Revised simplex for packing-form LPs: maximize `c.x` subject to
//! `Ax <= b`, `x >= 0` with `b >= 0`, so the all-slack basis is feasible and
//! no phase-1 is needed. Dense LU-factored basis with product-form eta
//! updates, Dantzig pricing by default and a Bland fallback once a
//! degeneracy-cycle heuristic triggers.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    Dantzig,
    Bland,
}

/// Column-major sparse LP in packing form.
#[derive(Debug, Clone, Default)]
pub struct SparseLp {
    pub num_rows: usize,
    /// Objective coefficient per structural variable.
    pub objective: Vec<f64>,
    /// Per variable: sorted (row, coeff) pairs.
    pub cols: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Primal values of the structural variables.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals at optimality; `dual . rhs` is the dual objective.
    pub dual: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn dual_objective(&self, lp: &SparseLp) -> f64 {
        self.dual.iter().zip(&lp.rhs).map(|(y, b)| y * b).sum()
    }
}

const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_SWITCH: usize = 200;

struct Eta {
    row: usize,
    col: Vec<f64>,
}

/// Dense LU with partial pivoting of the current basis matrix.
struct Factorization {
    n: usize,
    /// Combined L (unit lower, below diagonal) and U, row-major.
    lu: Vec<f64>,
    /// Row permutation: pivot row chosen at step k.
    perm: Vec<usize>,
}

impl Factorization {
    fn new(n: usize, dense_cols: &[Vec<f64>]) -> Result<Factorization> {
        let mut lu = vec![0.0; n * n];
        for (j, col) in dense_cols.iter().enumerate() {
            for i in 0..n {
                lu[i * n + j] = col[i];
            }
        }
        let mut perm = Vec::with_capacity(n);
        let mut active: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // Partial pivot among remaining rows.
            let (pos, _) = active[k..]
                .iter()
                .enumerate()
                .map(|(p, &r)| (p + k, lu[r * n + k].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| Error::Internal("empty basis".into()))?;
            active.swap(k, pos);
            let prow = active[k];
            let piv = lu[prow * n + k];
            if piv.abs() < 1e-12 {
                return Err(Error::Internal("singular basis matrix".into()));
            }
            perm.push(prow);
            for idx in k + 1..n {
                let r = active[idx];
                let f = lu[r * n + k] / piv;
                lu[r * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[r * n + j] -= f * lu[prow * n + j];
                    }
                }
            }
        }
        Ok(Factorization { n, lu, perm })
    }

    /// Solve B v = rhs in place (rhs indexed by original row).
    fn ftran(&self, v: &mut [f64]) {
        let n = self.n;
        // Forward: L z = P-permuted rhs.
        let mut z = vec![0.0; n];
        for k in 0..n {
            let r = self.perm[k];
            let mut s = v[r];
            for j in 0..k {
                s -= self.lu[r * n + j] * z[j];
            }
            z[k] = s;
        }
        // Backward: U w = z.
        for k in (0..n).rev() {
            let r = self.perm[k];
            let mut s = z[k];
            for j in k + 1..n {
                s -= self.lu[r * n + j] * z[j];
            }
            z[k] = s / self.lu[r * n + k];
        }
        v.copy_from_slice(&z);
    }

    /// Solve B^T v = rhs in place (result indexed by original row).
    fn btran(&self, v: &mut [f64]) {
        let n = self.n;
        // U^T z = rhs.
        let mut z = vec![0.0; n];
        for k in 0..n {
            let r = self.perm[k];
            let mut s = v[k];
            for j in 0..k {
                s -= self.lu[self.perm[j] * n + k] * z[j];
            }
            z[k] = s / self.lu[r * n + k];
        }
        // L^T y = z, then un-permute.
        for k in (0..n).rev() {
            let mut s = z[k];
            for j in k + 1..n {
                s -= self.lu[self.perm[j] * n + k] * z[j];
            }
            z[k] = s;
        }
        let mut out = vec![0.0; n];
        for k in 0..n {
            out[self.perm[k]] = z[k];
        }
        v.copy_from_slice(&out);
    }
}

struct Basis {
    m: usize,
    /// Basic variable per row position.
    vars: Vec<usize>,
    factorization: Factorization,
    etas: Vec<Eta>,
}

impl Basis {
    fn refactor(&mut self, lp: &SparseLp) -> Result<()> {
        let m = self.m;
        let mut dense: Vec<Vec<f64>> = Vec::with_capacity(m);
        for &v in &self.vars {
            let mut col = vec![0.0; m];
            if v < lp.cols.len() {
                for &(r, a) in &lp.cols[v] {
                    col[r] = a;
                }
            } else {
                col[v - lp.cols.len()] = 1.0;
            }
            dense.push(col);
        }
        self.factorization = Factorization::new(m, &dense)?;
        self.etas.clear();
        Ok(())
    }

    fn ftran(&self, v: &mut [f64]) {
        self.factorization.ftran(v);
        for eta in &self.etas {
            let t = v[eta.row] / eta.col[eta.row];
            for i in 0..self.m {
                if i != eta.row {
                    v[i] -= eta.col[i] * t;
                }
            }
            v[eta.row] = t;
        }
    }

    fn btran(&self, v: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.row];
            for i in 0..self.m {
                if i != eta.row {
                    s -= eta.col[i] * v[i];
                }
            }
            v[eta.row] = s / eta.col[eta.row];
        }
        self.factorization.btran(v);
    }
}

/// Solve to an optimal basic feasible solution. Deterministic for a fixed
/// pivot rule; switches to Bland after a long degenerate streak so
/// termination is guaranteed.
pub fn solve(lp: &SparseLp, rule: PivotRule) -> Result<LpSolution> {
    let n = lp.cols.len();
    let m = lp.num_rows;
    debug_assert_eq!(lp.objective.len(), n);
    debug_assert_eq!(lp.rhs.len(), m);
    if m == 0 || n == 0 {
        return Ok(LpSolution {
            x: vec![0.0; n],
            objective: 0.0,
            dual: vec![0.0; m],
            iterations: 0,
        });
    }
    for &b in &lp.rhs {
        if b < 0.0 {
            return Err(Error::Internal("packing LP requires rhs >= 0".into()));
        }
    }

    let mut basis = Basis {
        m,
        vars: (n..n + m).collect(),
        factorization: Factorization::new(m, &identity(m))?,
        etas: Vec::new(),
    };
    let mut x_basic = lp.rhs.clone();
    let mut in_basis = vec![false; n + m];
    for &v in &basis.vars {
        in_basis[v] = true;
    }

    let mut rule = rule;
    let mut degenerate_streak = 0usize;
    let max_iters = 200 * (m + n) + 20_000;
    let mut iterations = 0usize;

    loop {
        if iterations > max_iters {
            return Err(Error::Internal("simplex iteration limit exceeded".into()));
        }

        // Duals: y^T = c_B B^-1.
        let mut y = vec![0.0; m];
        for (pos, &v) in basis.vars.iter().enumerate() {
            y[pos] = if v < n { lp.objective[v] } else { 0.0 };
        }
        // y is indexed by basis position before btran; btran needs it indexed
        // by row of c_B against B^T. Rebuild as c_B in position order.
        basis.btran(&mut y);

        // Pricing.
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..n + m {
            if in_basis[j] {
                continue;
            }
            let d = if j < n {
                let mut ya = 0.0;
                for &(r, a) in &lp.cols[j] {
                    ya += y[r] * a;
                }
                lp.objective[j] - ya
            } else {
                -y[j - n]
            };
            if d > REDUCED_COST_TOL {
                match rule {
                    PivotRule::Bland => {
                        entering = Some((j, d));
                        break;
                    }
                    PivotRule::Dantzig => {
                        if entering.map_or(true, |(_, best)| d > best) {
                            entering = Some((j, d));
                        }
                    }
                }
            }
        }
        let Some((e, _)) = entering else {
            // Optimal.
            let mut x = vec![0.0; n];
            for (pos, &v) in basis.vars.iter().enumerate() {
                if v < n {
                    x[v] = x_basic[pos];
                }
            }
            let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
            return Ok(LpSolution {
                x,
                objective,
                dual: y,
                iterations,
            });
        };

        // Direction w = B^-1 A_e.
        let mut w = vec![0.0; m];
        if e < n {
            for &(r, a) in &lp.cols[e] {
                w[r] = a;
            }
        } else {
            w[e - n] = 1.0;
        }
        basis.ftran(&mut w);

        // Ratio test; ties broken by smallest basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if w[i] > PIVOT_TOL {
                let ratio = x_basic[i] / w[i];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12
                            || (ratio < lr + 1e-12 && basis.vars[i] < basis.vars[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, theta)) = leave else {
            return Err(Error::Internal(
                "unbounded LP; packing rows should prevent this".into(),
            ));
        };
        let theta = theta.max(0.0);

        if theta < 1e-12 {
            degenerate_streak += 1;
            if degenerate_streak >= DEGENERATE_SWITCH {
                rule = PivotRule::Bland;
            }
        } else {
            degenerate_streak = 0;
        }

        for i in 0..m {
            x_basic[i] -= theta * w[i];
            if x_basic[i] < 0.0 {
                x_basic[i] = 0.0;
            }
        }
        x_basic[r] = theta;
        in_basis[basis.vars[r]] = false;
        in_basis[e] = true;
        basis.vars[r] = e;
        basis.etas.push(Eta { row: r, col: w });
        iterations += 1;

        if basis.etas.len() >= REFACTOR_EVERY {
            basis.refactor(lp)?;
            // Recompute basic values from scratch to shed drift.
            let mut xb = lp.rhs.clone();
            basis.ftran(&mut xb);
            for v in &mut xb {
                if *v < 0.0 && *v > -1e-7 {
                    *v = 0.0;
                }
            }
            x_basic = xb;
        }
    }
}

fn identity(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| {
            let mut col = vec![0.0; m];
            col[i] = 1.0;
            col
        })
        .collect()
}
