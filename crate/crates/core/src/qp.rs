//! Dense convex QP: minimize `0.5 x'Px + q'x` subject to `A x <= b`.
//!
//! Strictly convex problems go straight to the Goldfarb-Idnani dual active-set
//! method. When `P` is only semidefinite the solver runs proximal-point outer
//! iterations, each a strictly convex subproblem with `P + sigma I`.
//!
//! Sizes here are tiny (tens of variables), so everything is stored densely
//! in row-major `Vec<f64>`s.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub n: usize,
    pub m: usize,
    /// `n x n`, row-major, symmetrized on construction.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `m x n`, row-major.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl QpProblem {
    pub fn new(n: usize, p: Vec<f64>, q: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if p.len() != n * n {
            return Err(Error::QpDimension("P must be n x n"));
        }
        if q.len() != n {
            return Err(Error::QpDimension("q must have n entries"));
        }
        let m = b.len();
        if a.len() != m * n {
            return Err(Error::QpDimension("A must be m x n"));
        }
        let mut p = p;
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (p[i * n + j] + p[j * n + i]);
                p[i * n + j] = s;
                p[j * n + i] = s;
            }
        }
        Ok(Self { n, m, p, q, a, b })
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut f = 0.0;
        for i in 0..n {
            let mut px = 0.0;
            for j in 0..n {
                px += self.p[i * n + j] * x[j];
            }
            f += x[i] * (0.5 * px + self.q[i]);
        }
        f
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// Worst-case KKT violations at a point, all measured on the caller's data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktReport {
    /// `max(0, max_i (A x - b)_i)`
    pub primal: f64,
    /// `max(0, -min_i lambda_i)`
    pub dual: f64,
    /// `|P x + q + A' lambda|_inf`
    pub stationarity: f64,
    /// `max_i |lambda_i (A x - b)_i|`
    pub complementarity: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.primal
            .max(self.dual)
            .max(self.stationarity)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// Multipliers of `A x <= b`, nonnegative at an optimum.
    pub lambda: Vec<f64>,
    pub status: QpStatus,
    pub kkt: KktReport,
    pub kkt_residual: f64,
    pub iterations: usize,
}

pub fn kkt_report(problem: &QpProblem, x: &[f64], lambda: &[f64]) -> KktReport {
    let n = problem.n;
    let mut grad: Vec<f64> = problem.q.clone();
    for i in 0..n {
        for j in 0..n {
            grad[i] += problem.p[i * n + j] * x[j];
        }
    }
    let mut rep = KktReport::default();
    for i in 0..problem.m {
        let row = problem.row(i);
        let mut ax = 0.0;
        for j in 0..n {
            ax += row[j] * x[j];
            grad[j] += row[j] * lambda[i];
        }
        let r = ax - problem.b[i];
        rep.primal = rep.primal.max(r);
        rep.dual = rep.dual.max(-lambda[i]);
        rep.complementarity = rep.complementarity.max(math::abs(lambda[i] * r));
    }
    rep.stationarity = grad.iter().fold(0.0f64, |acc, g| acc.max(math::abs(*g)));
    rep
}

pub fn solve_qp(problem: &QpProblem, tol: f64, max_iter: usize) -> QpSolution {
    let n = problem.n;
    let finish = |x: Vec<f64>, lambda: Vec<f64>, status: QpStatus, iterations: usize| {
        let kkt = kkt_report(problem, &x, &lambda);
        let kkt_residual = kkt.max();
        let status = if status == QpStatus::Optimal && (kkt_residual.is_nan() || kkt_residual > tol)
        {
            QpStatus::MaxIter
        } else {
            status
        };
        QpSolution {
            x,
            lambda,
            status,
            kkt,
            kkt_residual,
            iterations,
        }
    };

    if let Some(l) = cholesky(&problem.p, n, 1e-12) {
        let out = dual_active_set(problem, &l, &problem.q, max_iter);
        // A nearly singular P can pass the pivot floor and still lose
        // accuracy; those fall through to the proximal iterations.
        if out.status != QpStatus::Optimal || kkt_report(problem, &out.x, &out.lambda).max() <= tol
        {
            return finish(out.x, out.lambda, out.status, out.iterations);
        }
    }

    // Semidefinite: proximal-point iterations on P + sigma I.
    let max_diag = (0..n).fold(1.0f64, |acc, i| acc.max(problem.p[i * n + i]));
    let sigma = 1e-3 * max_diag;
    let mut reg = problem.p.clone();
    for i in 0..n {
        reg[i * n + i] += sigma;
    }
    let l = match cholesky(&reg, n, 0.0) {
        Some(l) => l,
        // Not even PSD; let the caller see a failed solve.
        None => return finish(vec![0.0; n], vec![0.0; problem.m], QpStatus::MaxIter, 0),
    };
    let mut x = vec![0.0; n];
    let mut lambda = vec![0.0; problem.m];
    let mut iterations = 0;
    let mut q_shift = vec![0.0; n];
    // max_iter bounds each inner solve and, separately, the proximal steps
    for _ in 0..max_iter.max(1) {
        for i in 0..n {
            q_shift[i] = problem.q[i] - sigma * x[i];
        }
        let out = dual_active_set(problem, &l, &q_shift, max_iter);
        iterations += out.iterations;
        match out.status {
            QpStatus::Optimal => {}
            other => return finish(out.x, out.lambda, other, iterations),
        }
        x = out.x;
        lambda = out.lambda;
        if kkt_report(problem, &x, &lambda).max() <= tol {
            return finish(x, lambda, QpStatus::Optimal, iterations);
        }
    }
    finish(x, lambda, QpStatus::MaxIter, iterations)
}

/// Lower-triangular `L` with `L L' = P`, or `None` if a pivot drops below
/// `rel_floor * max diag`.
fn cholesky(p: &[f64], n: usize, rel_floor: f64) -> Option<Vec<f64>> {
    let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(math::abs(p[i * n + i])));
    let floor = rel_floor * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = p[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d.is_nan() || d <= floor || d <= 0.0 {
            return None;
        }
        let djj = math::sqrt(d);
        l[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = p[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}

struct DualOutcome {
    x: Vec<f64>,
    lambda: Vec<f64>,
    status: QpStatus,
    iterations: usize,
}

/// Goldfarb-Idnani on `min 0.5 x'(L L')x + c'x` s.t. the problem's inequality
/// rows. Constraints are handled internally as `n_i' x >= d_i` with unit
/// normals `n_i = -a_i / |a_i|`.
///
/// Invariants of the working set: `J = L^-T Q`, and with `N` the active
/// normals, `J' N = [R; 0]` with `R` upper triangular.
fn dual_active_set(problem: &QpProblem, l: &[f64], c: &[f64], max_iter: usize) -> DualOutcome {
    let n = problem.n;
    let m = problem.m;

    // Unit inward normals.
    let mut normals = vec![0.0; m * n];
    let mut rhs = vec![0.0; m];
    let mut scale = vec![0.0; m];
    let mut skip = vec![false; m];
    for i in 0..m {
        let row = problem.row(i);
        let norm = math::sqrt(row.iter().map(|v| v * v).sum());
        if norm == 0.0 {
            if problem.b[i] < 0.0 {
                return DualOutcome {
                    x: vec![0.0; n],
                    lambda: vec![0.0; m],
                    status: QpStatus::Infeasible,
                    iterations: 0,
                };
            }
            skip[i] = true;
            continue;
        }
        scale[i] = norm;
        for j in 0..n {
            normals[i * n + j] = -row[j] / norm;
        }
        rhs[i] = -problem.b[i] / norm;
    }

    // J = L^-T: invert L column by column, store transposed.
    let mut j_mat = vec![0.0; n * n];
    for col in 0..n {
        // solve L y = e_col
        let mut y = vec![0.0; n];
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        // (L^-1)[i][col] = y[i]  =>  J[col][i] = y[i]
        for i in 0..n {
            j_mat[col * n + i] = y[i];
        }
    }

    // Unconstrained minimizer x = -J J' c.
    let mut x = vec![0.0; n];
    {
        let mut jtc = vec![0.0; n];
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += j_mat[i * n + k] * c[i];
            }
            jtc[k] = s;
        }
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += j_mat[i * n + k] * jtc[k];
            }
            x[i] = -s;
        }
    }

    // Active set: constraint ids, multipliers, and R stored column-major
    // (column k has k + 1 meaningful rows).
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut is_active = vec![false; m];

    let mut d = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut iterations = 0;

    let slack = |x: &[f64], i: usize| -> f64 {
        let row = &normals[i * n..(i + 1) * n];
        let mut s = -rhs[i];
        for j in 0..n {
            s += row[j] * x[j];
        }
        s
    };
    let feas_tol = |i: usize| 1e-12 * (1.0 + math::abs(rhs[i]));

    let lambda_out = |active: &[usize], u: &[f64]| {
        let mut lam = vec![0.0; m];
        for (k, &i) in active.iter().enumerate() {
            lam[i] = u[k] / scale[i];
        }
        lam
    };

    'outer: loop {
        // Most violated inactive constraint; first index wins ties.
        let mut p_idx = None;
        let mut worst = 0.0;
        for i in 0..m {
            if skip[i] || is_active[i] {
                continue;
            }
            let s = slack(&x, i);
            if s < -feas_tol(i) && s < worst {
                worst = s;
                p_idx = Some(i);
            }
        }
        let p = match p_idx {
            Some(p) => p,
            None => {
                let lam = lambda_out(&active, &u);
                return DualOutcome {
                    x,
                    lambda: lam,
                    status: QpStatus::Optimal,
                    iterations,
                };
            }
        };
        let mut u_p = 0.0;

        loop {
            iterations += 1;
            if iterations > max_iter {
                let lam = lambda_out(&active, &u);
                return DualOutcome {
                    x,
                    lambda: lam,
                    status: QpStatus::MaxIter,
                    iterations,
                };
            }
            let q_act = active.len();
            let np = &normals[p * n..(p + 1) * n];
            // d = J' n_p
            for k in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += j_mat[i * n + k] * np[i];
                }
                d[k] = s;
            }
            // z = J2 d2
            for i in 0..n {
                let mut s = 0.0;
                for k in q_act..n {
                    s += j_mat[i * n + k] * d[k];
                }
                z[i] = s;
            }
            // r = R^-1 d1 by back substitution
            let mut r = vec![0.0; q_act];
            for k in (0..q_act).rev() {
                let mut s = d[k];
                for jj in (k + 1)..q_act {
                    s -= r_cols[jj][k] * r[jj];
                }
                r[k] = s / r_cols[k][k];
            }

            // Partial (dual) step length.
            let mut t1 = f64::INFINITY;
            let mut drop_k = None;
            for k in 0..q_act {
                if r[k] > 0.0 {
                    let t = u[k] / r[k];
                    if t < t1 {
                        t1 = t;
                        drop_k = Some(k);
                    }
                }
            }
            // Full (primal) step length.
            let d_norm2: f64 = d.iter().map(|v| v * v).sum();
            let zn: f64 = d[q_act..].iter().map(|v| v * v).sum();
            let t2 = if zn > 1e-24 * d_norm2.max(1e-300) {
                -slack(&x, p) / zn
            } else {
                f64::INFINITY
            };

            let t = if t1 < t2 { t1 } else { t2 };
            if t == f64::INFINITY {
                return DualOutcome {
                    x,
                    lambda: lambda_out(&active, &u),
                    status: QpStatus::Infeasible,
                    iterations,
                };
            }

            if t2 == f64::INFINITY {
                // Dual step only, then drop.
                for k in 0..q_act {
                    u[k] -= t * r[k];
                }
                u_p += t;
                let k = drop_k.expect("finite t1 has a blocking constraint");
                drop_constraint(
                    k,
                    &mut active,
                    &mut u,
                    &mut r_cols,
                    &mut j_mat,
                    n,
                    &mut is_active,
                );
                continue;
            }

            for i in 0..n {
                x[i] += t * z[i];
            }
            for k in 0..q_act {
                u[k] -= t * r[k];
            }
            u_p += t;

            if t2 <= t1 {
                // Full step: p joins the active set. Rotate d so that only
                // its first q_act + 1 entries survive.
                for jj in ((q_act + 1)..n).rev() {
                    let a = d[jj - 1];
                    let b = d[jj];
                    if b == 0.0 {
                        continue;
                    }
                    let h = math::hypot(a, b);
                    let (cs, sn) = (a / h, b / h);
                    d[jj - 1] = h;
                    d[jj] = 0.0;
                    for i in 0..n {
                        let t1 = j_mat[i * n + jj - 1];
                        let t2 = j_mat[i * n + jj];
                        j_mat[i * n + jj - 1] = cs * t1 + sn * t2;
                        j_mat[i * n + jj] = -sn * t1 + cs * t2;
                    }
                }
                r_cols.push(d[..=q_act].to_vec());
                active.push(p);
                u.push(u_p);
                is_active[p] = true;
                continue 'outer;
            }

            let k = drop_k.expect("partial step has a blocking constraint");
            drop_constraint(
                k,
                &mut active,
                &mut u,
                &mut r_cols,
                &mut j_mat,
                n,
                &mut is_active,
            );
        }
    }
}

fn drop_constraint(
    k: usize,
    active: &mut Vec<usize>,
    u: &mut Vec<f64>,
    r_cols: &mut Vec<Vec<f64>>,
    j_mat: &mut [f64],
    n: usize,
    is_active: &mut [bool],
) {
    is_active[active[k]] = false;
    active.remove(k);
    u.remove(k);
    r_cols.remove(k);
    let q = r_cols.len();
    // Columns k..q are now upper Hessenberg; restore triangularity.
    for jj in k..q {
        let a = r_cols[jj][jj];
        let b = r_cols[jj][jj + 1];
        let h = math::hypot(a, b);
        if h == 0.0 {
            r_cols[jj].truncate(jj + 1);
            continue;
        }
        let (cs, sn) = (a / h, b / h);
        for col in r_cols.iter_mut().skip(jj) {
            let t1 = col[jj];
            let t2 = col[jj + 1];
            col[jj] = cs * t1 + sn * t2;
            col[jj + 1] = -sn * t1 + cs * t2;
        }
        r_cols[jj].truncate(jj + 1);
        for i in 0..n {
            let t1 = j_mat[i * n + jj];
            let t2 = j_mat[i * n + jj + 1];
            j_mat[i * n + jj] = cs * t1 + sn * t2;
            j_mat[i * n + jj + 1] = -sn * t1 + cs * t2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn active_lower_bound() {
        // min x^2 s.t. x >= 1
        let p = QpProblem::new(1, vec![2.0], vec![0.0], vec![-1.0], vec![-1.0]).unwrap();
        let s = solve_qp(&p, 1e-9, 100);
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.lambda[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_identity() {
        let p = QpProblem::new(
            3,
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            vec![-1.0, 2.0, -3.0],
            vec![],
            vec![],
        )
        .unwrap();
        let s = solve_qp(&p, 1e-9, 100);
        assert_eq!(s.status, QpStatus::Optimal);
        assert_eq!(s.x, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn infeasible_pair() {
        // x <= 0 and x >= 1
        let p = QpProblem::new(1, vec![1.0], vec![0.0], vec![1.0, -1.0], vec![0.0, -1.0]).unwrap();
        assert_eq!(solve_qp(&p, 1e-9, 100).status, QpStatus::Infeasible);
    }

    #[test]
    fn semidefinite_linear_objective() {
        // min x s.t. x >= -2 with P = 0
        let p = QpProblem::new(1, vec![0.0], vec![1.0], vec![-1.0], vec![2.0]).unwrap();
        let s = solve_qp(&p, 1e-8, 1000);
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn dimension_checks() {
        assert!(QpProblem::new(2, vec![1.0], vec![0.0, 0.0], vec![], vec![]).is_err());
        assert!(QpProblem::new(1, vec![1.0], vec![0.0], vec![1.0, 2.0], vec![0.0]).is_err());
    }

    #[test]
    fn degenerate_redundant_constraints() {
        // x + y >= 1 written twice plus x >= 0, y >= 0
        let p = QpProblem::new(
            2,
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0],
            vec![-1.0, -1.0, -1.0, -1.0, -1.0, 0.0, 0.0, -1.0],
            vec![-1.0, -1.0, 0.0, 0.0],
        )
        .unwrap();
        let s = solve_qp(&p, 1e-9, 100);
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
    }
}
