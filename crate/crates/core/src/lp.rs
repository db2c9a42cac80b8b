//! Two-player zero-sum matrix games solved by linear programming.
//!
//! With payoffs shifted to be at least 1, the column player's problem is
//! `max 1ᵀy s.t. A y ≤ 1, y ≥ 0`, which starts feasible at the slack basis.
//! The game value is `1 / 1ᵀy`, the column strategy is `y` normalized, and
//! the row strategy is read off the duals of the row constraints. The
//! orientation is chosen so the tableau has `min(rows, cols)` constraints.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    /// Value to the (maximizing) row player.
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

impl GameSolution {
    /// `min_j (pᵀA)_j`: what the row strategy guarantees.
    pub fn row_guarantee(&self, payoff: &[Vec<f64>]) -> f64 {
        let cols = payoff.first().map_or(0, Vec::len);
        (0..cols)
            .map(|j| payoff.iter().zip(&self.row_strategy).map(|(r, p)| p * r[j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_i (A q)_i`: what the column strategy concedes.
    pub fn col_guarantee(&self, payoff: &[Vec<f64>]) -> f64 {
        payoff
            .iter()
            .map(|r| r.iter().zip(&self.col_strategy).map(|(a, q)| a * q).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Solve the game where the row player maximizes `p^T A q`.
pub fn solve_matrix_game(payoff: &[Vec<f64>]) -> Result<GameSolution> {
    let rows = payoff.len();
    if rows == 0 {
        return Err(Error::input("payoff matrix has no rows"));
    }
    let cols = payoff[0].len();
    if cols == 0 || payoff.iter().any(|r| r.len() != cols) {
        return Err(Error::input("payoff matrix is empty or ragged"));
    }
    if payoff.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::input("payoff matrix has non-finite entries"));
    }
    let sol = if rows <= cols {
        solve_oriented(payoff)?
    } else {
        let flipped: Vec<Vec<f64>> = (0..cols)
            .map(|j| payoff.iter().map(|r| -r[j]).collect())
            .collect();
        let s = solve_oriented(&flipped)?;
        GameSolution {
            value: -s.value,
            row_strategy: s.col_strategy,
            col_strategy: s.row_strategy,
        }
    };
    let lo = sol.row_guarantee(payoff);
    let hi = sol.col_guarantee(payoff);
    let scale = payoff.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    if hi - lo > 1e-7 * scale {
        return Err(Error::Internal(format!(
            "matrix game certificate gap {} (bounds {lo}, {hi})",
            hi - lo
        )));
    }
    Ok(sol)
}

fn solve_oriented(a: &[Vec<f64>]) -> Result<GameSolution> {
    let m = a.len();
    let n = a[0].len();
    let min = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let width = n + m + 1;
    // Rows 0..m constraints, row m objective (reduced costs, maximize).
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..n {
            t[i * width + j] = a[i][j] + shift;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = 1.0;
    }
    for j in 0..n {
        t[m * width + j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut degenerate_run = 0usize;
    let max_iters = 50 * (m + n) + 1000;
    for _ in 0..max_iters {
        let obj = &t[m * width..m * width + width - 1];
        let entering = if degenerate_run > 50 {
            obj.iter().position(|&c| c < -COST_EPS)
        } else {
            let mut best: Option<usize> = None;
            for (j, &c) in obj.iter().enumerate() {
                if c < -COST_EPS && best.is_none_or(|b| c < obj[b]) {
                    best = Some(j);
                }
            }
            best
        };
        let Some(e) = entering else {
            return Ok(extract(&t, &basis, m, n, width, shift));
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = t[i * width + e];
            if coef > PIVOT_EPS {
                let ratio = t[i * width + width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some((l, r)) => ratio < r - 1e-14 || (ratio <= r + 1e-14 && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((l, ratio)) = leave else {
            return Err(Error::Internal("matrix game LP unbounded".into()));
        };
        if ratio <= 1e-14 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        pivot(&mut t, width, m, l, e);
        basis[l] = e;
    }
    Err(Error::Internal("simplex iteration limit reached".into()))
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for j in 0..width {
        t[row * width + j] /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f != 0.0 {
            for (x, pr) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            t[i * width + col] = 0.0;
        }
    }
}

fn extract(t: &[f64], basis: &[usize], m: usize, n: usize, width: usize, shift: f64) -> GameSolution {
    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i * width + width - 1].max(0.0);
        }
    }
    let x: Vec<f64> = (0..m).map(|i| t[m * width + n + i].max(0.0)).collect();
    let sy: f64 = y.iter().sum();
    let sx: f64 = x.iter().sum();
    GameSolution {
        value: 1.0 / sy - shift,
        row_strategy: x.iter().map(|v| v / sx).collect(),
        col_strategy: y.iter().map(|v| v / sy).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rock_paper_scissors() {
        let a = vec![
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ];
        let s = solve_matrix_game(&a).unwrap();
        assert!(s.value.abs() < 1e-9);
        for p in s.row_strategy.iter().chain(&s.col_strategy) {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn skewed_game_value() {
        // Value 1/12 (maximizer's mixed strategy 1/3, 1/4, 5/12).
        let a = vec![
            vec![0.0, 2.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ];
        let s = solve_matrix_game(&a).unwrap();
        assert!((s.value - 1.0 / 12.0).abs() < 1e-9);
    }

    #[test]
    fn saddle_point_and_tall_matrix() {
        let a = vec![vec![3.0, 5.0], vec![1.0, 0.5], vec![2.0, 4.0], vec![0.0, 0.0]];
        let s = solve_matrix_game(&a).unwrap();
        assert!((s.value - 3.0).abs() < 1e-9);
        assert!((s.row_strategy[0] - 1.0).abs() < 1e-9);
        assert!((s.col_strategy[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_entry() {
        let s = solve_matrix_game(&[vec![2.5]]).unwrap();
        assert!((s.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_matrix_game(&[]).is_err());
        assert!(solve_matrix_game(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(solve_matrix_game(&[vec![f64::NAN]]).is_err());
    }
}
