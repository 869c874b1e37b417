use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Ordinary least squares fit with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Intercept first, then one coefficient per feature.
    pub coefficients: Vec<f64>,
    pub feature_names: Vec<String>,
    pub residual_standard_error: f64,
    pub n_obs: usize,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.coefficients[0]
            + self.coefficients[1..]
                .iter()
                .zip(row)
                .map(|(b, x)| b * x)
                .sum::<f64>()
    }
}

// Relative pivot size below which a column is treated as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Solves the normal equations `X'X b = X'y` for the design `[1 | rows]`.
///
/// Columns are scaled to unit norm before elimination so the rank test is
/// independent of feature units.
pub fn ols_fit<S: AsRef<str>>(
    rows: &[Vec<f64>],
    target: &[f64],
    feature_names: &[S],
) -> Result<LinearModel> {
    let n = target.len();
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            context: "ols rows",
            expected: n,
            actual: rows.len(),
        });
    }
    let k = feature_names.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            context: "ols feature width",
            expected: k,
            actual: bad.len(),
        });
    }
    let p = k + 1;
    if n <= p {
        return Err(invalid(
            "n_obs",
            format!("{n} observations cannot fit {p} coefficients with a residual"),
        ));
    }
    let column = |i: usize, j: usize| if j == 0 { 1.0 } else { rows[i][j - 1] };
    let scale: Vec<f64> = (0..p)
        .map(|j| {
            let s = (0..n).map(|i| column(i, j).powi(2)).sum::<f64>().sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();

    // Augmented [X'X | X'y] on scaled columns.
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..n {
        for r in 0..p {
            let xr = column(i, r) / scale[r];
            for c in 0..p {
                a[r][c] += xr * column(i, c) / scale[c];
            }
            a[r][p] += xr * target[i];
        }
    }
    let max_diag = (0..p).map(|j| a[j][j].abs()).fold(0.0, f64::max);
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty");
        if a[pivot][col].abs() <= RANK_TOLERANCE * max_diag {
            return Err(Error::Singular {
                rank: col,
                columns: p,
            });
        }
        a.swap(col, pivot);
        for r in col + 1..p {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                for c in col..=p {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }
    let mut beta = vec![0.0; p];
    for r in (0..p).rev() {
        let tail: f64 = (r + 1..p).map(|c| a[r][c] * beta[c]).sum();
        beta[r] = (a[r][p] - tail) / a[r][r];
    }
    let coefficients: Vec<f64> = beta.iter().zip(&scale).map(|(b, s)| b / s).collect();
    let mut model = LinearModel {
        coefficients,
        feature_names: feature_names.iter().map(|s| s.as_ref().to_string()).collect(),
        residual_standard_error: 0.0,
        n_obs: n,
    };
    let rss: f64 = rows
        .iter()
        .zip(target)
        .map(|(r, y)| (y - model.predict_row(r)).powi(2))
        .sum();
    model.residual_standard_error = (rss / (n - p) as f64).sqrt();
    Ok(model)
}

pub fn ols_predict(model: &LinearModel, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = model.coefficients.len() - 1;
    rows.iter()
        .map(|r| {
            if r.len() != k {
                Err(Error::DimensionMismatch {
                    context: "ols_predict width",
                    expected: k,
                    actual: r.len(),
                })
            } else {
                Ok(model.predict_row(r))
            }
        })
        .collect()
}
