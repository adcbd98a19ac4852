//! Solvers for the zero-sum matrix game `min_q max_z Σ_f q_f M[f][z]`.
//!
//! Rows of the payoff matrix are player actions (the minimizer), columns
//! are outcomes (the maximizer).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::MixedAction;
use crate::numerics::{binomial, renormalize};

/// Mixed action, its guaranteed value, and the primal-dual gap.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    pub q: MixedAction,
    /// `max_z Σ_f q_f M[f][z]`.
    pub value: f64,
    /// `value - min_f Σ_z M[f][z] y_z` for the reported outcome weights `y`.
    pub gap: f64,
    pub outcome_weights: Vec<f64>,
}

pub trait MatrixGameSolver: Send + Sync {
    fn name(&self) -> &str;

    fn solve(&self, payoff: &[Vec<f64>]) -> Result<MatrixGameSolution>;
}

fn check_payoff(payoff: &[Vec<f64>]) -> Result<(usize, usize)> {
    let rows = payoff.len();
    let cols = payoff.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("payoff matrix is empty"));
    }
    if payoff.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("payoff rows have different lengths"));
    }
    if payoff.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("payoff entries must be finite"));
    }
    Ok((rows, cols))
}

/// Evaluates `q` against best responses and `y` against best responses.
fn certify(payoff: &[Vec<f64>], mut q: Vec<f64>, mut y: Vec<f64>) -> Result<MatrixGameSolution> {
    for v in q.iter_mut().chain(y.iter_mut()) {
        *v = v.max(0.0);
    }
    renormalize(&mut q);
    renormalize(&mut y);
    let cols = payoff[0].len();
    let value = (0..cols)
        .map(|z| {
            payoff
                .iter()
                .zip(&q)
                .map(|(row, qf)| qf * row[z])
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = payoff
        .iter()
        .map(|row| row.iter().zip(&y).map(|(m, yz)| m * yz).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(MatrixGameSolution {
        q: MixedAction::from_weights(q)?,
        value,
        gap: (value - lower).max(0.0),
        outcome_weights: y,
    })
}

fn shifted(payoff: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let min = payoff
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    payoff
        .iter()
        .map(|r| r.iter().map(|x| x - min + 1.0).collect())
        .collect()
}

/// Dense simplex method with Bland's rule on
/// `max 1ᵀx  s.t.  M'ᵀx ≤ 1, x ≥ 0` for the positively shifted payoff `M'`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpSolver;

const PIVOT_TOL: f64 = 1e-12;

impl MatrixGameSolver for LpSolver {
    fn name(&self) -> &str {
        "lp"
    }

    fn solve(&self, payoff: &[Vec<f64>]) -> Result<MatrixGameSolution> {
        let (k, m) = check_payoff(payoff)?;
        let mp = shifted(payoff);
        let width = k + m + 1;
        let mut tab = vec![0.0; m * width];
        for z in 0..m {
            for f in 0..k {
                tab[z * width + f] = mp[f][z];
            }
            tab[z * width + k + z] = 1.0;
            tab[z * width + width - 1] = 1.0;
        }
        let mut reduced: Vec<f64> = (0..k + m).map(|j| if j < k { 1.0 } else { 0.0 }).collect();
        let mut basis: Vec<usize> = (k..k + m).collect();
        let max_iter = 50 * (k + m) + 1000;
        let mut iter = 0;
        while let Some(enter) = (0..k + m).find(|&j| reduced[j] > PIVOT_TOL) {
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                let a = tab[i * width + enter];
                if a > PIVOT_TOL {
                    let ratio = tab[i * width + width - 1] / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-15
                                || (ratio <= best_ratio + 1e-15 && basis[i] < basis[l])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let r = leave.ok_or_else(|| Error::invalid("matrix game LP is unbounded"))?;
            let piv = tab[r * width + enter];
            for j in 0..width {
                tab[r * width + j] /= piv;
            }
            for i in 0..m {
                if i == r {
                    continue;
                }
                let factor = tab[i * width + enter];
                if factor != 0.0 {
                    for j in 0..width {
                        tab[i * width + j] -= factor * tab[r * width + j];
                    }
                }
            }
            let factor = reduced[enter];
            for j in 0..k + m {
                reduced[j] -= factor * tab[r * width + j];
            }
            basis[r] = enter;
            iter += 1;
            if iter > max_iter {
                return Err(Error::invalid("simplex method did not terminate"));
            }
        }
        let mut x = vec![0.0; k];
        for (i, &b) in basis.iter().enumerate() {
            if b < k {
                x[b] = tab[i * width + width - 1];
            }
        }
        let y: Vec<f64> = (0..m).map(|z| -reduced[k + z]).collect();
        certify(payoff, x, y)
    }
}

/// Support enumeration over equal-size supports (Shapley–Snow kernels).
#[derive(Debug, Clone, Copy)]
pub struct ExhaustiveSolver {
    /// Maximum number of support pairs examined.
    pub budget: u64,
}

impl Default for ExhaustiveSolver {
    fn default() -> Self {
        Self { budget: 2_000_000 }
    }
}

fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&idx) {
            return;
        }
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

/// Solves `Σ_{i∈rows} w_i A[i][j] = v` for `j ∈ cols`, `Σ w = 1`.
fn equalizer(a: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Option<(Vec<f64>, f64)> {
    let k = rows.len();
    let mut mat = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for (r, &j) in cols.iter().enumerate() {
        for (c, &i) in rows.iter().enumerate() {
            mat[(r, c)] = a[i][j];
        }
        mat[(r, k)] = -1.0;
    }
    for c in 0..k {
        mat[(k, c)] = 1.0;
    }
    rhs[k] = 1.0;
    let sol = mat.lu().solve(&rhs)?;
    if sol.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some((sol.iter().take(k).copied().collect(), sol[k]))
}

impl MatrixGameSolver for ExhaustiveSolver {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn solve(&self, payoff: &[Vec<f64>]) -> Result<MatrixGameSolution> {
        let (k, m) = check_payoff(payoff)?;
        let total: u128 = (1..=k.min(m))
            .map(|s| binomial(k as u64, s as u64).saturating_mul(binomial(m as u64, s as u64)))
            .fold(0u128, |a, b| a.saturating_add(b));
        if total > self.budget as u128 {
            return Err(Error::limit("support pairs", total, self.budget));
        }
        let mp = shifted(payoff);
        let transposed: Vec<Vec<f64>> =
            (0..m).map(|z| (0..k).map(|f| mp[f][z]).collect()).collect();
        let tol = 1e-9;
        let mut found: Option<(Vec<f64>, Vec<f64>)> = None;
        for s in 1..=k.min(m) {
            for_each_subset(k, s, |rows| {
                for_each_subset(m, s, |cols| {
                    let Some((qs, v)) = equalizer(&mp, rows, cols) else {
                        return true;
                    };
                    if qs.iter().any(|&w| w < -tol) {
                        return true;
                    }
                    let Some((ys, w)) = equalizer(&transposed, cols, rows) else {
                        return true;
                    };
                    if ys.iter().any(|&w| w < -tol) || (v - w).abs() > 1e-7 * v.abs().max(1.0) {
                        return true;
                    }
                    let mut q = vec![0.0; k];
                    for (&i, &w) in rows.iter().zip(&qs) {
                        q[i] = w;
                    }
                    let mut y = vec![0.0; m];
                    for (&j, &w) in cols.iter().zip(&ys) {
                        y[j] = w;
                    }
                    let q_ok =
                        (0..m).all(|z| (0..k).map(|f| q[f] * mp[f][z]).sum::<f64>() <= v + tol);
                    let y_ok =
                        (0..k).all(|f| (0..m).map(|z| mp[f][z] * y[z]).sum::<f64>() >= v - tol);
                    if q_ok && y_ok {
                        found = Some((q, y));
                        return false;
                    }
                    true
                });
                found.is_none()
            });
            if found.is_some() {
                break;
            }
        }
        let (q, y) =
            found.ok_or_else(|| Error::invalid("support enumeration found no equilibrium"))?;
        certify(payoff, q, y)
    }
}

/// Hedge for the player against best-responding outcomes; reports the
/// residual gap of the averaged strategies rather than failing.
#[derive(Debug, Clone, Copy)]
pub struct MultiplicativeWeights {
    pub iterations: usize,
}

impl Default for MultiplicativeWeights {
    fn default() -> Self {
        Self { iterations: 20_000 }
    }
}

impl MatrixGameSolver for MultiplicativeWeights {
    fn name(&self) -> &str {
        "mw"
    }

    fn solve(&self, payoff: &[Vec<f64>]) -> Result<MatrixGameSolution> {
        let (k, m) = check_payoff(payoff)?;
        let lo = payoff
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let hi = payoff
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let range = (hi - lo).max(1e-300);
        let iters = self.iterations.max(1);
        let eta = (8.0 * (k as f64).ln().max(1.0) / iters as f64).sqrt() / range;
        let mut log_w = vec![0.0; k];
        let mut q_avg = vec![0.0; k];
        let mut y_count = vec![0.0; m];
        let mut q = vec![0.0; k];
        for _ in 0..iters {
            let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (qf, lw) in q.iter_mut().zip(&log_w) {
                *qf = (lw - top).exp();
            }
            renormalize(&mut q);
            let z = (0..m)
                .map(|z| (z, (0..k).map(|f| q[f] * payoff[f][z]).sum::<f64>()))
                .fold((0, f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                })
                .0;
            for (a, qf) in q_avg.iter_mut().zip(&q) {
                *a += qf;
            }
            y_count[z] += 1.0;
            for (lw, row) in log_w.iter_mut().zip(payoff) {
                *lw -= eta * row[z];
            }
        }
        certify(payoff, q_avg, y_count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solvers() -> Vec<Box<dyn MatrixGameSolver>> {
        vec![
            Box::new(LpSolver),
            Box::new(ExhaustiveSolver::default()),
            Box::new(MultiplicativeWeights::default()),
        ]
    }

    #[test]
    fn matching_pennies() {
        for s in solvers() {
            let sol = s.solve(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
            let tol = if s.name() == "mw" { 1e-2 } else { 1e-12 };
            assert!((sol.value - 0.5).abs() < tol, "{}: {}", s.name(), sol.value);
            assert!((sol.q[0] - 0.5).abs() < tol);
        }
    }

    #[test]
    fn single_action_and_single_outcome() {
        for s in solvers() {
            let sol = s.solve(&[vec![0.3, 0.9, 0.1]]).unwrap();
            assert_eq!(sol.q.weights(), &[1.0]);
            assert!((sol.value - 0.9).abs() < 1e-12);
            let sol = s.solve(&[vec![0.4], vec![0.2], vec![0.7]]).unwrap();
            let tol = if s.name() == "mw" { 1e-2 } else { 1e-12 };
            assert!((sol.value - 0.2).abs() < tol, "{}", s.name());
            if s.name() != "mw" {
                assert_eq!(sol.q.weights(), &[0.0, 1.0, 0.0]);
            }
        }
    }

    #[test]
    fn identical_rows_have_zero_gap() {
        for s in solvers() {
            let sol = s.solve(&[vec![0.2, 0.6], vec![0.2, 0.6]]).unwrap();
            assert!((sol.value - 0.6).abs() < 1e-12);
            assert!(sol.gap < 1e-12);
        }
    }

    #[test]
    fn lp_and_exhaustive_agree_on_rock_paper_scissors() {
        let rps = vec![
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ];
        let a = LpSolver.solve(&rps).unwrap();
        let b = ExhaustiveSolver::default().solve(&rps).unwrap();
        assert!(a.value.abs() < 1e-12 && b.value.abs() < 1e-12);
        assert!(a.gap < 1e-12 && b.gap < 1e-12);
    }

    #[test]
    fn subsets_enumerated() {
        let mut n = 0;
        for_each_subset(5, 2, |_| {
            n += 1;
            true
        });
        assert_eq!(n, 10);
        let mut n = 0;
        for_each_subset(3, 3, |_| {
            n += 1;
            true
        });
        assert_eq!(n, 1);
    }
}
