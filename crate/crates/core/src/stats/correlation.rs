use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "pearson",
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::Size(format!(
            "pearson needs at least 3 pairs, got {}",
            x.len()
        )));
    }
    let mx = super::mean(x);
    let my = super::mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // A constant column can leave rounding noise in sxx, so test it directly.
    if sxx == 0.0 || x.iter().all(|v| *v == x[0]) {
        return Err(Error::ZeroVariance("pearson x"));
    }
    if syy == 0.0 || y.iter().all(|v| *v == y[0]) {
        return Err(Error::ZeroVariance("pearson y"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    /// Two-sided, from `t = rho sqrt((n-2)/(1-rho^2))` on `n - 2` dof.
    pub p_value: f64,
}

/// 1-based ranks with ties sharing their average rank.
pub(crate) fn midranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "spearman",
            expected: x.len(),
            actual: y.len(),
        });
    }
    let n = x.len();
    if n < 4 {
        return Err(Error::Size(format!("spearman needs at least 4 pairs, got {n}")));
    }
    let rho = pearson(&midranks(x), &midranks(y))?;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive dof");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Spearman { rho, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &up).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &down).unwrap() + 1.0).abs() < 1e-15);

        // sum dx dy = 3.5, sum dx^2 = 8.75, sum dy^2 = 5
        let r = pearson(&[1.0, 2.0, 3.0, 5.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        let want = 3.5 / (8.75f64 * 5.0).sqrt();
        assert!((r - want).abs() < 1e-15, "{r} vs {want}");

        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance(_))
        ));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    /// Classic `1 - 6 sum d^2 / (n (n^2 - 1))`, valid without ties.
    fn rank_difference_rho(x: &[f64], y: &[f64]) -> f64 {
        let rank = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|a| 1.0 + v.iter().filter(|b| *b < a).count() as f64)
                .collect()
        };
        let (rx, ry) = (rank(x), rank(y));
        let n = x.len() as f64;
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
        1.0 - 6.0 * d2 / (n * (n * n - 1.0))
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman(&x, &[2.0, 4.0, 8.0, 9.0, 30.0]).unwrap().rho, 1.0);
        assert_eq!(spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap().rho, -1.0);
        let s = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(rank_difference_rho(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]), 0.8);
        assert!((s.rho - 0.8).abs() < 1e-15);
        assert!(s.p_value > 0.0 && s.p_value < 1.0);
        assert!(spearman(&[1.0; 5], &x).is_err());
        assert!(spearman(&x[..3], &x[..3]).is_err());
    }

    #[test]
    fn spearman_p_value_reference() {
        // n = 10, rho = 0.6: t = 0.6 sqrt(8 / 0.64) = 2.1213..., p = 0.06669...
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y = [2.0, 0.0, 1.0, 6.0, 3.0, 9.0, 4.0, 5.0, 8.0, 7.0];
        let s = spearman(&x, &y).unwrap();
        assert!((s.rho - rank_difference_rho(&x, &y)).abs() < 1e-12);
        let t = s.rho * (8.0 / (1.0 - s.rho * s.rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, 8.0).unwrap();
        assert!((s.p_value - 2.0 * (1.0 - dist.cdf(t))).abs() < 1e-12);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_monotone_maps(
            pairs in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 4..40)
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(base) = spearman(&x, &y) {
                let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
                let cy: Vec<f64> = y.iter().map(|v| v.powi(3)).collect();
                let moved = spearman(&ex, &cy).unwrap();
                prop_assert!((base.rho - moved.rho).abs() < 1e-12);
            }
        }
    }
}
