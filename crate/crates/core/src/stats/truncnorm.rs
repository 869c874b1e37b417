//! Truncated normal distribution: maximum-likelihood fit and CDF.

use serde::{Deserialize, Serialize};

use super::normal::log_phi_diff;
use crate::error::{invalid, Error, Result};

/// Smallest scale a fit may report. Zero-variance samples are pinned here.
pub const SIGMA_FLOOR: f64 = 1e-9;

const MAX_ITERATIONS: usize = 4000;
const RESTARTS: usize = 3;

/// Normal `N(mu, sigma^2)` restricted and renormalised to `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    pub converged: bool,
}

impl TruncatedNormalFit {
    pub fn new(mu: f64, sigma: f64, lower: f64, upper: f64) -> Result<Self> {
        let fit = Self {
            mu,
            sigma,
            lower,
            upper,
            converged: true,
        };
        fit.validate()?;
        Ok(fit)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid("sigma", format!("must be > 0, got {}", self.sigma)));
        }
        if !(self.upper > self.lower) || !self.mu.is_finite() {
            return Err(invalid("bounds", "need finite mu and upper > lower"));
        }
        Ok(())
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }

    /// `ln CDF(x)`; `-inf` at or below the lower bound.
    pub fn log_cdf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return f64::NEG_INFINITY;
        }
        if x >= self.upper {
            return 0.0;
        }
        let za = self.z(self.lower);
        let num = log_phi_diff(za, self.z(x));
        let den = log_phi_diff(za, self.z(self.upper));
        (num - den).min(0.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.log_cdf(x).exp().clamp(0.0, 1.0)
    }

    /// Density on `[lower, upper]`, zero outside.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lower || x > self.upper {
            return 0.0;
        }
        let z = self.z(x);
        let log_norm = log_phi_diff(self.z(self.lower), self.z(self.upper));
        (-0.5 * z * z - log_norm - self.sigma.ln()).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    /// Mean of the truncated distribution (not `mu`).
    pub fn mean(&self) -> f64 {
        let (a, b) = (self.z(self.lower), self.z(self.upper));
        let log_norm = log_phi_diff(a, b);
        let dens = |z: f64| (-0.5 * z * z - log_norm).exp() / (2.0 * std::f64::consts::PI).sqrt();
        self.mu + self.sigma * (dens(a) - dens(b))
    }
}

/// CDF of `fit` at `x`, clamped to `[0, 1]`.
pub fn truncnorm_cdf(x: f64, fit: &TruncatedNormalFit) -> Result<f64> {
    fit.validate()?;
    Ok(fit.cdf(x))
}

/// Negative log-likelihood (up to a constant) from sufficient statistics.
struct Likelihood {
    n: f64,
    mean: f64,
    centered_ss: f64,
    lower: f64,
    upper: f64,
    mu_range: (f64, f64),
    log_sigma_range: (f64, f64),
}

impl Likelihood {
    fn eval(&self, p: [f64; 2]) -> f64 {
        let (mu, ls) = (p[0], p[1]);
        if !(self.mu_range.0..=self.mu_range.1).contains(&mu)
            || !(self.log_sigma_range.0..=self.log_sigma_range.1).contains(&ls)
        {
            return f64::INFINITY;
        }
        let sigma = ls.exp();
        let ss = self.centered_ss + self.n * (self.mean - mu).powi(2);
        let norm = log_phi_diff((self.lower - mu) / sigma, (self.upper - mu) / sigma);
        let v = self.n * ls + ss / (2.0 * sigma * sigma) + self.n * norm;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Fits `(mu, sigma)` by maximum likelihood with a bounded Nelder-Mead
/// search over `(mu, ln sigma)`, started at the sample mean and sd.
pub fn fit_truncated_normal(samples: &[f64], lower: f64, upper: f64) -> Result<TruncatedNormalFit> {
    if !(upper > lower) {
        return Err(invalid("bounds", "upper must exceed lower"));
    }
    if samples.len() < 2 {
        return Err(Error::Size(format!(
            "need at least 2 samples to fit, got {}",
            samples.len()
        )));
    }
    if let Some(&bad) = samples
        .iter()
        .find(|v| !v.is_finite() || **v < lower || **v > upper)
    {
        return Err(Error::OutOfBounds {
            lower,
            upper,
            value: bad,
        });
    }
    let n = samples.len() as f64;
    let mean = super::mean(samples);
    let centered_ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
    if samples.iter().all(|&v| v == samples[0]) {
        return Ok(TruncatedNormalFit {
            mu: samples[0],
            sigma: SIGMA_FLOOR,
            lower,
            upper,
            converged: false,
        });
    }
    let width = upper - lower;
    let lik = Likelihood {
        n,
        mean,
        centered_ss,
        lower,
        upper,
        mu_range: (lower - 10.0 * width, upper + 10.0 * width),
        log_sigma_range: (SIGMA_FLOOR.ln(), (10.0 * width).ln()),
    };
    let sd = (centered_ss / (n - 1.0)).sqrt().max(SIGMA_FLOOR);
    let mut best = [mean, sd.ln()];
    let mut converged = false;
    for _ in 0..RESTARTS {
        let steps = [0.2 * best[1].exp() + 1e-12, 0.2];
        let (point, done) = nelder_mead(|p| lik.eval(p), best, steps);
        let improved = lik.eval(point) < lik.eval(best) - 1e-12 * lik.eval(best).abs();
        best = point;
        converged = done;
        if !improved && done {
            break;
        }
    }
    Ok(TruncatedNormalFit {
        mu: best[0],
        sigma: best[1].exp().max(SIGMA_FLOOR),
        lower,
        upper,
        converged,
    })
}

/// Minimises `f` over two variables. Returns the best vertex and whether
/// the tolerance was met before the iteration budget ran out.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], steps: [f64; 2]) -> ([f64; 2], bool) {
    let mut simplex = [
        start,
        [start[0] + steps[0], start[1]],
        [start[0], start[1] + steps[1]],
    ];
    let mut values = simplex.map(&f);
    let add = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..MAX_ITERATIONS {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let spread = (values[2] - values[0]).abs();
        let size = simplex[1..]
            .iter()
            .map(|p| (p[0] - simplex[0][0]).abs().max((p[1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        if values[2].is_finite() && spread <= 1e-13 * (1.0 + values[0].abs()) && size < 1e-10 {
            return (simplex[0], true);
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let reflected = add(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = add(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] {
                add(centroid, reflected, 0.5)
            } else {
                add(centroid, simplex[2], 0.5)
            };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = add(simplex[0], simplex[k], 0.5);
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    (simplex[best], false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// Draws from `N(mu, sigma)` and keeps values inside the bounds.
    fn rejection_sample(mu: f64, sigma: f64, lo: f64, hi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = crate::seed::rng(seed);
        let normal = Normal::new(mu, sigma).unwrap();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let v: f64 = normal.sample(&mut rng);
            if (lo..=hi).contains(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Composite Simpson rule on the unnormalised density.
    fn quadrature_cdf(x: f64, mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
        let dens = |t: f64| (-0.5 * ((t - mu) / sigma).powi(2)).exp();
        let simpson = |a: f64, b: f64| {
            let n = 200_000;
            let h = (b - a) / n as f64;
            let mut s = dens(a) + dens(b);
            for i in 1..n {
                s += dens(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        simpson(lo, x) / simpson(lo, hi)
    }

    #[test]
    fn cdf_boundaries_and_symmetry() {
        let fit = TruncatedNormalFit::new(0.5, 0.3, 0.0, 1.0).unwrap();
        assert_eq!(fit.cdf(0.0), 0.0);
        assert_eq!(fit.cdf(1.0), 1.0);
        assert_eq!(fit.cdf(-3.0), 0.0);
        assert_eq!(fit.cdf(3.0), 1.0);
        assert!((fit.cdf(0.5) - 0.5).abs() < 1e-15);
        assert!(truncnorm_cdf(0.5, &TruncatedNormalFit { sigma: 0.0, ..fit }).is_err());
    }

    #[test]
    fn cdf_matches_quadrature() {
        let fit = TruncatedNormalFit::new(0.2, 0.05, 0.0, 1.0).unwrap();
        let want = quadrature_cdf(0.01, 0.2, 0.05, 0.0, 1.0);
        let got = fit.cdf(0.01);
        assert!((got - want).abs() < 1e-12 * want.max(1e-300) + 1e-15, "{got} vs {want}");
        for &x in &[0.1, 0.2, 0.33, 0.9] {
            let want = quadrature_cdf(x, 0.2, 0.05, 0.0, 1.0);
            assert!((fit.cdf(x) - want).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn log_cdf_far_tail_is_finite() {
        let fit = TruncatedNormalFit::new(1.2, 0.02, 0.0, 2.0).unwrap();
        let l = fit.log_cdf(0.01);
        assert!(l.is_finite() && l < -1000.0, "{l}");
        assert_eq!(fit.cdf(0.01), 0.0);
    }

    #[test]
    fn fit_recovers_known_parameters() {
        let s = rejection_sample(0.3, 0.1, 0.0, 1.0, 100_000, 11);
        let fit = fit_truncated_normal(&s, 0.0, 1.0).unwrap();
        assert!(fit.converged);
        assert!((0.29..=0.31).contains(&fit.mu), "{fit:?}");
        assert!((0.097..=0.103).contains(&fit.sigma), "{fit:?}");
    }

    #[test]
    fn fit_recovers_heavily_truncated_parameters() {
        // Mode outside the interval: the naive moments are far off.
        let s = rejection_sample(-0.2, 0.3, 0.0, 1.0, 50_000, 3);
        let fit = fit_truncated_normal(&s, 0.0, 1.0).unwrap();
        assert!((fit.mu + 0.2).abs() < 0.05, "{fit:?}");
        assert!((fit.sigma - 0.3).abs() < 0.02, "{fit:?}");
    }

    #[test]
    fn symmetric_samples_center() {
        let s: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let fit = fit_truncated_normal(&s, 0.0, 1.0).unwrap();
        assert!((fit.mu - 0.5).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn degenerate_samples() {
        let fit = fit_truncated_normal(&[0.4; 10], 0.0, 2.0).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.sigma, SIGMA_FLOOR);
        assert_eq!(fit.cdf(0.39), 0.0);
        assert_eq!(fit.cdf(0.41), 1.0);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_truncated_normal(&[0.5], 0.0, 1.0), Err(Error::Size(_))));
        assert!(matches!(
            fit_truncated_normal(&[0.5, 1.5], 0.0, 1.0),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(fit_truncated_normal(&[0.5, 0.6], 1.0, 0.0).is_err());
    }

    #[test]
    fn estimation_error_shrinks_with_sample_size() {
        let mut mean_err = Vec::new();
        for &n in &[100, 1_000, 10_000, 100_000] {
            let mut err = 0.0;
            for seed in 0..5u64 {
                let s = rejection_sample(0.3, 0.1, 0.0, 1.0, n, 1000 + seed);
                let fit = fit_truncated_normal(&s, 0.0, 1.0).unwrap();
                err += (fit.mu - 0.3).abs() + (fit.sigma - 0.1).abs();
            }
            mean_err.push(err / 5.0);
        }
        assert!(mean_err.windows(2).all(|w| w[1] < w[0]), "{mean_err:?}");
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        let fit = TruncatedNormalFit::new(0.6, 0.4, 0.0, 2.0).unwrap();
        let n = 20_000;
        let h = 1.0 / n as f64;
        let area: f64 = (0..n).map(|i| fit.pdf((i as f64 + 0.5) * h) * h).sum();
        assert!((area - fit.cdf(1.0)).abs() < 1e-8);
        let mut rng = crate::seed::rng(1);
        let s: Vec<f64> = (0..2000).map(|_| rng.gen_range(0.0..2.0)).collect();
        assert!(fit_truncated_normal(&s, 0.0, 2.0).is_ok());
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(mu in -1.0f64..3.0, sigma in 0.01f64..2.0, a in 0.0f64..2.0, b in 0.0f64..2.0) {
            let fit = TruncatedNormalFit::new(mu, sigma, 0.0, 2.0).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(fit.cdf(lo) <= fit.cdf(hi));
            prop_assert!((0.0..=1.0).contains(&fit.cdf(a)));
        }

        #[test]
        fn symmetric_bounds_give_half(mu in -5.0f64..5.0, sigma in 0.01f64..5.0, w in 0.01f64..5.0) {
            let fit = TruncatedNormalFit::new(mu, sigma, mu - w, mu + w).unwrap();
            prop_assert!((fit.cdf(mu) - 0.5).abs() < 1e-12);
        }
    }
}
