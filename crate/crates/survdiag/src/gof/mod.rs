//! Goodness-of-fit tests applied to residual samples: Shapiro-Wilk,
//! one-sample Kolmogorov-Smirnov against a fixed target, and a
//! Lilliefors-style Monte Carlo corrected KS for estimated parameters.

mod ks;
mod shapiro;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::normal_cdf;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

pub use ks::{ks_p_value, ks_statistic, EXACT_N_LIMIT};
pub use shapiro::{shapiro_wilk, MAX_N as SW_MAX_N, MIN_N as SW_MIN_N};

pub const DEFAULT_LCKS_REPLICATES: usize = 1000;
pub const MIN_LCKS_REPLICATES: usize = 500;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofResult {
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    /// Only set for Monte Carlo corrected tests.
    pub mc_replicates: Option<usize>,
}

/// Reference distribution for the KS-type tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KsTarget {
    StandardNormal,
    UnitExponential,
}

impl KsTarget {
    pub fn name(self) -> &'static str {
        match self {
            KsTarget::StandardNormal => "normal",
            KsTarget::UnitExponential => "exponential",
        }
    }

    fn cdf(self, x: f64) -> f64 {
        match self {
            KsTarget::StandardNormal => normal_cdf(x),
            KsTarget::UnitExponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
        }
    }
}

/// Shapiro-Wilk normality test.
pub fn sw_test(x: &[f64]) -> Result<GofResult> {
    let (w, p) = shapiro_wilk(x)?;
    Ok(GofResult {
        method: "shapiro-wilk".into(),
        statistic: w,
        p_value: p,
        n: x.len(),
        mc_replicates: None,
    })
}

/// KS test against the fully specified `target` (no parameters estimated).
pub fn ks_test(x: &[f64], target: KsTarget) -> Result<GofResult> {
    let d = ks_statistic(x, |v| target.cdf(v))?;
    Ok(GofResult {
        method: format!("ks-{}", target.name()),
        statistic: d,
        p_value: ks_p_value(x.len(), d),
        n: x.len(),
        mc_replicates: None,
    })
}

/// Parameters fitted to the data before a KS comparison, together with the
/// location-scale / scale map needed to reduce to the fixed target.
#[derive(Debug, Clone, Copy)]
struct FittedTarget {
    loc: f64,
    scale: f64,
}

fn estimate(x: &[f64], target: KsTarget) -> Result<FittedTarget> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    match target {
        KsTarget::StandardNormal => {
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            if var <= 0.0 || !var.is_finite() {
                return Err(Error::DegenerateSample("zero variance in LCKS sample".into()));
            }
            Ok(FittedTarget { loc: mean, scale: var.sqrt() })
        }
        KsTarget::UnitExponential => {
            if mean <= 0.0 || !mean.is_finite() {
                return Err(Error::DegenerateSample(
                    "non-positive mean in exponential LCKS sample".into(),
                ));
            }
            Ok(FittedTarget { loc: 0.0, scale: mean })
        }
    }
}

fn fitted_statistic(x: &[f64], target: KsTarget) -> Result<f64> {
    let fit = estimate(x, target)?;
    ks_statistic(x, |v| target.cdf((v - fit.loc) / fit.scale))
}

fn sample_target(target: KsTarget, rng: &mut ChaCha8Rng) -> f64 {
    match target {
        KsTarget::StandardNormal => {
            crate::dist::sample_logtime_error(crate::dist::DistFamily::Lognormal, rng)
        }
        // 1 - gen::<f64>() lies in (0, 1], keeping the log finite.
        KsTarget::UnitExponential => -(1.0 - rng.gen::<f64>()).ln(),
    }
}

/// Lilliefors-corrected KS test: parameters of `target` are estimated from
/// `x`, and the null distribution of D is rebuilt by Monte Carlo with the
/// same estimation step applied to every replicate.
pub fn lcks_test(x: &[f64], target: KsTarget, replicates: usize, seed: u64) -> Result<GofResult> {
    if x.len() < 4 {
        return Err(Error::Domain(format!("LCKS needs at least 4 observations, got {}", x.len())));
    }
    if replicates < MIN_LCKS_REPLICATES {
        return Err(Error::Domain(format!(
            "LCKS needs at least {MIN_LCKS_REPLICATES} Monte Carlo replicates, got {replicates}"
        )));
    }
    let n = x.len();
    let observed = fitted_statistic(x, target)?;
    // (exceedances, completed replicates); failed replicates are dropped and
    // only the completed count enters the denominator.
    let (exceed, kept) = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, b as u64));
            let sample: Vec<f64> = (0..n).map(|_| sample_target(target, &mut rng)).collect();
            match fitted_statistic(&sample, target) {
                Ok(d) => (usize::from(d >= observed), 1_usize),
                Err(_) => (0, 0),
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if kept == 0 {
        return Err(Error::Domain("all LCKS Monte Carlo replicates failed".into()));
    }
    Ok(GofResult {
        method: format!("lcks-{}", target.name()),
        statistic: observed,
        p_value: exceed as f64 / kept as f64,
        n,
        mc_replicates: Some(kept),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_draws(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| crate::dist::sample_logtime_error(crate::dist::DistFamily::Lognormal, &mut rng))
            .collect()
    }

    #[test]
    fn ks_detects_shifted_normal() {
        let x: Vec<f64> = normal_draws(300, 5).iter().map(|v| v + 1.0).collect();
        let r = ks_test(&x, KsTarget::StandardNormal).unwrap();
        assert!(r.p_value < 1e-6);
        // ...but LCKS, which re-centres, does not.
        let lc = lcks_test(&x, KsTarget::StandardNormal, 500, 9).unwrap();
        assert!(lc.p_value > 0.05, "p = {}", lc.p_value);
    }

    #[test]
    fn ks_accepts_true_normal() {
        let x = normal_draws(300, 6);
        let r = ks_test(&x, KsTarget::StandardNormal).unwrap();
        assert!(r.p_value > 0.01, "p = {}", r.p_value);
    }

    #[test]
    fn exponential_target_cdf_values() {
        assert_eq!(KsTarget::UnitExponential.cdf(-1.0), 0.0);
        assert!((KsTarget::UnitExponential.cdf(1.0) - (1.0 - (-1.0_f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn lcks_is_deterministic_given_seed() {
        let x = normal_draws(80, 11);
        let a = lcks_test(&x, KsTarget::StandardNormal, 500, 42).unwrap();
        let b = lcks_test(&x, KsTarget::StandardNormal, 500, 42).unwrap();
        assert_eq!(a.p_value, b.p_value);
        assert_eq!(a.statistic, b.statistic);
        let c = lcks_test(&x, KsTarget::StandardNormal, 500, 43).unwrap();
        // Same statistic, almost surely a different Monte Carlo p-value.
        assert_eq!(a.statistic, c.statistic);
    }

    #[test]
    fn lcks_rejects_too_few_replicates() {
        let x = normal_draws(50, 1);
        assert!(lcks_test(&x, KsTarget::StandardNormal, 100, 1).is_err());
    }

    #[test]
    fn naive_ks_with_estimated_params_is_conservative_lcks_is_not() {
        // Classic Lilliefors phenomenon: plugging estimated parameters into
        // the standard KS p-value is strongly conservative, while the Monte
        // Carlo corrected version keeps roughly nominal size.
        let reps = 200;
        let n = 60;
        let mut naive_rej = 0;
        let mut lcks_rej = 0;
        for r in 0..reps {
            let x = normal_draws(n, 1000 + r);
            let fit = estimate(&x, KsTarget::StandardNormal).unwrap();
            let std: Vec<f64> = x.iter().map(|v| (v - fit.loc) / fit.scale).collect();
            if ks_test(&std, KsTarget::StandardNormal).unwrap().p_value < 0.05 {
                naive_rej += 1;
            }
            if lcks_test(&x, KsTarget::StandardNormal, 500, 7_000 + r).unwrap().p_value < 0.05 {
                lcks_rej += 1;
            }
        }
        let naive = naive_rej as f64 / reps as f64;
        let corrected = lcks_rej as f64 / reps as f64;
        assert!(naive < 0.02, "naive rate {naive}");
        assert!((0.01..=0.12).contains(&corrected), "corrected rate {corrected}");
    }

    #[test]
    fn lcks_exponential_self_calibrates() {
        let reps = 100;
        let mut rej = 0;
        for r in 0..reps {
            let mut rng = ChaCha8Rng::seed_from_u64(300 + r);
            let x: Vec<f64> = (0..50).map(|_| -(1.0 - rng.gen::<f64>()).ln() * 3.0).collect();
            if lcks_test(&x, KsTarget::UnitExponential, 500, 40_000 + r).unwrap().p_value < 0.05 {
                rej += 1;
            }
        }
        let rate = rej as f64 / reps as f64;
        assert!((0.0..=0.13).contains(&rate), "rate {rate}");
    }
}
