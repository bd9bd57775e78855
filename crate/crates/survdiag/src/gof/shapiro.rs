//! Shapiro-Wilk W test, Royston's extension of AS R94 (valid for
//! 3 <= n <= 5000) with Blom normal scores for the coefficient vector.

use crate::dist::{normal_cdf, normal_quantile};
use crate::error::{Error, Result};

pub const MIN_N: usize = 3;
pub const MAX_N: usize = 5000;

fn poly(coefs: &[f64], x: f64) -> f64 {
    // coefs in ascending order
    coefs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Returns (W, p-value) for the null hypothesis of normality.
pub fn shapiro_wilk(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(Error::Domain(format!(
            "Shapiro-Wilk requires {MIN_N} <= n <= {MAX_N}, got {n}"
        )));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let range = sorted[n - 1] - sorted[0];
    if range <= 0.0 || !range.is_finite() {
        return Err(Error::DegenerateSample("sample has zero range".into()));
    }

    // Blom scores m_i = Phi^-1((i - 3/8) / (n + 1/4)).
    let nf = n as f64;
    let m: Vec<f64> = (1..=n)
        .map(|i| normal_quantile((i as f64 - 0.375) / (nf + 0.25)).unwrap())
        .collect();
    let ssumm2: f64 = m.iter().map(|v| v * v).sum();
    let rsn = 1.0 / nf.sqrt();

    let mut a = vec![0.0; n];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
        a[2] = -a[0];
    } else {
        let norm = ssumm2.sqrt();
        let a_n = poly(&[0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056], rsn)
            + m[n - 1] / norm;
        if n > 5 {
            let a_n1 = poly(&[0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633], rsn)
                + m[n - 2] / norm;
            let phi = (ssumm2 - 2.0 * m[n - 1].powi(2) - 2.0 * m[n - 2].powi(2))
                / (1.0 - 2.0 * a_n.powi(2) - 2.0 * a_n1.powi(2));
            a[n - 1] = a_n;
            a[n - 2] = a_n1;
            a[0] = -a_n;
            a[1] = -a_n1;
            for i in 2..n - 2 {
                a[i] = m[i] / phi.sqrt();
            }
        } else {
            let phi = (ssumm2 - 2.0 * m[n - 1].powi(2)) / (1.0 - 2.0 * a_n.powi(2));
            a[n - 1] = a_n;
            a[0] = -a_n;
            for i in 1..n - 1 {
                a[i] = m[i] / phi.sqrt();
            }
        }
    }

    let mean = sorted.iter().sum::<f64>() / nf;
    let ssq: f64 = sorted.iter().map(|v| (v - mean).powi(2)).sum();
    let num: f64 = a.iter().zip(&sorted).map(|(ai, xi)| ai * xi).sum::<f64>().powi(2);
    let w = (num / ssq).min(1.0);

    // Normalizing transformation of W to an upper-tail p-value.
    let p = if n == 3 {
        let pw = 6.0 / std::f64::consts::PI
            * ((w.sqrt()).asin() - (0.75_f64.sqrt()).asin());
        pw.clamp(0.0, 1.0)
    } else if n <= 11 {
        let g = -2.273 + 0.459 * nf;
        let mu = poly(&[0.5440, -0.39978, 0.025054, -6.714e-4], nf);
        let sigma = poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf).exp();
        let arg = g - (1.0 - w).ln();
        if arg <= 0.0 {
            0.0
        } else {
            let z = (-arg.ln() - mu) / sigma;
            1.0 - normal_cdf(z)
        }
    } else {
        let u = nf.ln();
        let mu = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], u);
        let sigma = poly(&[-0.4803, -0.082676, 0.0030302], u).exp();
        let z = ((1.0 - w).ln() - mu) / sigma;
        1.0 - normal_cdf(z)
    };
    Ok((w, p))
}
