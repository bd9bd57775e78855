//! Cox proportional hazards fitting via the Breslow-tie partial likelihood,
//! with the Breslow baseline cumulative hazard.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SurvivalRecord};
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

pub const GRAD_TOL: f64 = 1e-7;
pub const MAX_ITER: usize = 100;
/// Coefficient magnitude treated as monotone-likelihood divergence.
const BETA_BLOWUP: f64 = 30.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoxFit {
    /// Coefficients (no intercept in a Cox model).
    pub beta: Vec<f64>,
    /// Breslow baseline cumulative hazard as sorted (time, H0) pairs, one
    /// per distinct event time.
    pub baseline: Vec<(f64, f64)>,
    pub log_partial_lik: f64,
    pub covariance: SquareMatrix,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Set when the optimizer detected a diverging coefficient path.
    pub diagnostic: Option<String>,
    pub covariate_names: Vec<String>,
}

impl CoxFit {
    pub fn std_err(&self, i: usize) -> f64 {
        self.covariance.get(i, i).max(0.0).sqrt()
    }

    /// Baseline cumulative hazard at t (right-continuous step function;
    /// beyond the last event time the last value is used).
    pub fn cum_hazard(&self, t: f64) -> f64 {
        let mut h = 0.0;
        for &(time, h0) in &self.baseline {
            if time <= t {
                h = h0;
            } else {
                break;
            }
        }
        h
    }

    /// S_i(t) = exp(-H0(t) * exp(x_i' beta)).
    pub fn predict_surv(&self, record: &SurvivalRecord) -> Result<f64> {
        if record.covariates.len() != self.beta.len() {
            return Err(Error::Domain(format!(
                "record has {} covariates, fit expects {}",
                record.covariates.len(),
                self.beta.len()
            )));
        }
        let lp: f64 = self.beta.iter().zip(&record.covariates).map(|(b, x)| b * x).sum();
        Ok((-self.cum_hazard(record.time) * lp.exp()).exp())
    }
}

/// Rows sorted by ascending time with events grouped at distinct times.
struct Sorted {
    times: Vec<f64>,
    status: Vec<u8>,
    x: Vec<Vec<f64>>,
}

fn sort_rows(d: &Dataset) -> Sorted {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d.records()[a].time.partial_cmp(&d.records()[b].time).unwrap());
    Sorted {
        times: idx.iter().map(|&i| d.records()[i].time).collect(),
        status: idx.iter().map(|&i| d.records()[i].status).collect(),
        x: idx.iter().map(|&i| d.records()[i].covariates.clone()).collect(),
    }
}

/// Log partial likelihood, gradient, and negative Hessian in one sweep from
/// the largest time down, accumulating risk-set sums.
fn partial_lik(s: &Sorted, beta: &[f64]) -> (f64, Vec<f64>, SquareMatrix) {
    let n = s.times.len();
    let p = beta.len();
    let mut ll = 0.0;
    let mut grad = vec![0.0; p];
    let mut neg_hess = SquareMatrix::zeros(p);

    let mut s0 = 0.0_f64;
    let mut s1 = vec![0.0; p];
    let mut s2 = SquareMatrix::zeros(p);

    let mut i = n;
    while i > 0 {
        // Extend the risk set by all rows tied at this time.
        let t = s.times[i - 1];
        let mut j = i;
        while j > 0 && s.times[j - 1] == t {
            let row = &s.x[j - 1];
            let lp: f64 = beta.iter().zip(row).map(|(b, x)| b * x).sum();
            let w = lp.exp();
            s0 += w;
            for a in 0..p {
                s1[a] += w * row[a];
                for b in 0..p {
                    s2.data[a * p + b] += w * row[a] * row[b];
                }
            }
            j -= 1;
        }
        // Event contribution at this distinct time.
        let mut d_k = 0.0;
        for k in j..i {
            if s.status[k] == 1 {
                d_k += 1.0;
                let row = &s.x[k];
                let lp: f64 = beta.iter().zip(row).map(|(b, x)| b * x).sum();
                ll += lp;
                for a in 0..p {
                    grad[a] += row[a];
                }
            }
        }
        if d_k > 0.0 {
            ll -= d_k * s0.ln();
            for a in 0..p {
                grad[a] -= d_k * s1[a] / s0;
                for b in 0..p {
                    neg_hess.data[a * p + b] +=
                        d_k * (s2.data[a * p + b] / s0 - (s1[a] / s0) * (s1[b] / s0));
                }
            }
        }
        i = j;
    }
    (ll, grad, neg_hess)
}

/// Breslow baseline cumulative hazard at beta.
fn breslow_baseline(s: &Sorted, beta: &[f64]) -> Vec<(f64, f64)> {
    let n = s.times.len();
    // Risk-set denominator at each distinct time, built from the back.
    let weights: Vec<f64> = s
        .x
        .iter()
        .map(|row| beta.iter().zip(row).map(|(b, x)| b * x).sum::<f64>().exp())
        .collect();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + weights[i];
    }
    let mut baseline = Vec::new();
    let mut h = 0.0;
    let mut i = 0;
    while i < n {
        let t = s.times[i];
        let mut j = i;
        let mut d_k = 0.0;
        while j < n && s.times[j] == t {
            if s.status[j] == 1 {
                d_k += 1.0;
            }
            j += 1;
        }
        if d_k > 0.0 {
            h += d_k / suffix[i];
            baseline.push((t, h));
        }
        i = j;
    }
    baseline
}

pub fn fit_cox(d: &Dataset) -> Result<CoxFit> {
    if !d.records().iter().any(|r| r.status == 1) {
        return Err(Error::Domain("Cox fit requires at least one event".into()));
    }
    let s = sort_rows(d);
    let p = d.dim();
    let n = d.len();

    // Zero-variance columns carry no partial-likelihood information.
    let mut variable = vec![false; p];
    for j in 0..p {
        let first = s.x[0][j];
        variable[j] = s.x.iter().any(|row| row[j] != first);
    }
    let all_constant = p == 0 || variable.iter().all(|v| !v);
    if !all_constant && variable.iter().any(|v| !v) {
        return Err(Error::SingularDesign(
            "covariate with zero variance in a Cox design".into(),
        ));
    }

    let mut beta = vec![0.0; p];
    let mut converged = all_constant;
    let mut iterations = 0;
    let mut diagnostic = None;
    let (mut ll, mut grad, mut neg_hess) = partial_lik(&s, &beta);

    if !all_constant {
        for iter in 1..=MAX_ITER {
            iterations = iter;
            if grad.iter().all(|g| g.abs() < GRAD_TOL) {
                converged = true;
                break;
            }
            let scale =
                neg_hess.data.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
            let mut step = None;
            let mut lambda = 0.0;
            for _ in 0..30 {
                let mut m = neg_hess.clone();
                if lambda > 0.0 {
                    m.add_ridge(lambda);
                }
                if let Some(st) = m.solve_spd(&grad) {
                    step = Some(st);
                    break;
                }
                lambda = if lambda == 0.0 { 1e-10 * scale } else { lambda * 10.0 };
            }
            let step = match step {
                Some(st) => st,
                None => {
                    return Err(Error::SingularDesign(
                        "partial-likelihood information matrix is singular".into(),
                    ))
                }
            };

            let slope: f64 = grad.iter().zip(&step).map(|(g, st)| g * st).sum();
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..50 {
                let cand: Vec<f64> =
                    beta.iter().zip(&step).map(|(b, st)| b + t * st).collect();
                let (ll_new, g_new, h_new) = partial_lik(&s, &cand);
                if ll_new.is_finite() && ll_new >= ll + 1e-4 * t * slope {
                    beta = cand;
                    ll = ll_new;
                    grad = g_new;
                    neg_hess = h_new;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
            if beta.iter().any(|b| b.abs() > BETA_BLOWUP) {
                diagnostic = Some(
                    "coefficient path diverging (monotone partial likelihood)".into(),
                );
                converged = false;
                break;
            }
        }
        // A monotone partial likelihood flattens out, so the gradient can
        // pass tolerance at an absurd coefficient before |beta| reaches the
        // blow-up bound; treat huge coefficients as divergence regardless.
        if diagnostic.is_none() && beta.iter().any(|b| b.abs() > BETA_BLOWUP / 2.0) {
            diagnostic =
                Some("coefficient path diverging (monotone partial likelihood)".into());
            converged = false;
        }
        if diagnostic.is_none() {
            converged = grad.iter().all(|g| g.abs() < GRAD_TOL);
            if !converged && n > 0 {
                diagnostic = Some(format!(
                    "gradient sup-norm {:.3e} above tolerance after {} iterations",
                    grad.iter().fold(0.0_f64, |a, g| a.max(g.abs())),
                    iterations
                ));
            }
        }
    }

    let grad_norm = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    let covariance = if p > 0 && converged {
        neg_hess.inverse_spd().unwrap_or_else(|| SquareMatrix::zeros(p))
    } else {
        SquareMatrix::zeros(p)
    };
    let baseline = breslow_baseline(&s, &beta);

    Ok(CoxFit {
        beta,
        baseline,
        log_partial_lik: ll,
        covariance,
        converged,
        iterations,
        grad_norm,
        diagnostic,
        covariate_names: d.covariate_names().to_vec(),
    })
}
