//! Maximum-likelihood fitting of parametric AFT models with right-censored
//! data.
//!
//! The censored log-likelihood sum(d_i * log f(t_i) + (1 - d_i) * log S(t_i))
//! is maximized over (beta, log sigma) by Newton steps with backtracking line
//! search; the Hessian comes from central finite differences of the analytic
//! gradient, with a ridge fallback when it is not negative definite.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SurvivalRecord};
use crate::dist::{self, DistFamily};
use crate::error::{Error, Result};
use crate::linalg::{design_full_rank, least_squares, SquareMatrix};

/// Relative gradient tolerance: converged when the gradient sup-norm falls
/// below GRAD_TOL * (1 + |loglik|).
pub const GRAD_TOL: f64 = 1e-7;
pub const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AftFit {
    pub family: DistFamily,
    /// Coefficients with the intercept first.
    pub beta: Vec<f64>,
    pub log_sigma: f64,
    pub loglik: f64,
    /// Covariance over (beta, log_sigma); beta only for fixed-scale families.
    pub covariance: SquareMatrix,
    pub aic: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Gradient sup-norm at the returned parameters, stored for audit.
    pub grad_norm: f64,
    pub covariate_names: Vec<String>,
}

impl AftFit {
    pub fn sigma(&self) -> f64 {
        self.log_sigma.exp()
    }

    pub fn n_params(&self) -> usize {
        self.beta.len() + usize::from(self.family.free_scale())
    }

    /// Standard error of the i-th parameter ((beta..., log_sigma) order).
    pub fn std_err(&self, i: usize) -> f64 {
        self.covariance.get(i, i).max(0.0).sqrt()
    }

    pub fn linear_predictor(&self, covariates: &[f64]) -> f64 {
        self.beta[0]
            + self.beta[1..].iter().zip(covariates).map(|(b, x)| b * x).sum::<f64>()
    }

    /// Predicted survival probability at the record's observed time.
    pub fn predict_surv(&self, record: &SurvivalRecord) -> Result<f64> {
        if record.covariates.len() + 1 != self.beta.len() {
            return Err(Error::Domain(format!(
                "record has {} covariates, fit expects {}",
                record.covariates.len(),
                self.beta.len() - 1
            )));
        }
        dist::surv_logtime(
            self.family,
            record.time,
            self.linear_predictor(&record.covariates),
            self.sigma(),
        )
    }
}

/// Design matrix with intercept column, log-times, and status flags.
struct Prepared {
    x: Vec<Vec<f64>>,
    log_t: Vec<f64>,
    status: Vec<u8>,
}

fn prepare(d: &Dataset) -> Prepared {
    let x = d
        .records()
        .iter()
        .map(|r| {
            let mut row = Vec::with_capacity(r.covariates.len() + 1);
            row.push(1.0);
            row.extend_from_slice(&r.covariates);
            row
        })
        .collect();
    Prepared {
        x,
        log_t: d.records().iter().map(|r| r.time.ln()).collect(),
        status: d.statuses(),
    }
}

/// theta = (beta..., log_sigma) for free-scale families, (beta...) otherwise.
fn loglik(p: &Prepared, family: DistFamily, theta: &[f64]) -> f64 {
    let (beta, log_sigma) = split(family, theta);
    let sigma = log_sigma.exp();
    let mut ll = 0.0;
    for i in 0..p.x.len() {
        let mu: f64 = p.x[i].iter().zip(beta).map(|(x, b)| x * b).sum();
        let z = (p.log_t[i] - mu) / sigma;
        if p.status[i] == 1 {
            ll += dist::error_log_pdf(family, z) - log_sigma - p.log_t[i];
        } else {
            ll += dist::error_log_surv(family, z);
        }
    }
    ll
}

fn gradient(p: &Prepared, family: DistFamily, theta: &[f64]) -> Vec<f64> {
    let (beta, log_sigma) = split(family, theta);
    let sigma = log_sigma.exp();
    let np = theta.len();
    let mut g = vec![0.0; np];
    for i in 0..p.x.len() {
        let mu: f64 = p.x[i].iter().zip(beta).map(|(x, b)| x * b).sum();
        let z = (p.log_t[i] - mu) / sigma;
        let w = if p.status[i] == 1 {
            dist::error_dlog_pdf(family, z)
        } else {
            dist::error_dlog_surv(family, z)
        };
        for j in 0..beta.len() {
            g[j] += w * (-p.x[i][j] / sigma);
        }
        if family.free_scale() {
            g[np - 1] += -w * z - f64::from(p.status[i]);
        }
    }
    g
}

fn split(family: DistFamily, theta: &[f64]) -> (&[f64], f64) {
    if family.free_scale() {
        (&theta[..theta.len() - 1], theta[theta.len() - 1])
    } else {
        (theta, 0.0)
    }
}

/// Central finite differences of the analytic gradient.
fn fd_hessian(p: &Prepared, family: DistFamily, theta: &[f64]) -> SquareMatrix {
    let np = theta.len();
    let mut h = SquareMatrix::zeros(np);
    for j in 0..np {
        let step = 1e-5 * theta[j].abs().max(1.0);
        let mut up = theta.to_vec();
        up[j] += step;
        let mut dn = theta.to_vec();
        dn[j] -= step;
        let gu = gradient(p, family, &up);
        let gd = gradient(p, family, &dn);
        for i in 0..np {
            h.set(i, j, (gu[i] - gd[i]) / (2.0 * step));
        }
    }
    // Symmetrize.
    for i in 0..np {
        for j in 0..i {
            let avg = 0.5 * (h.get(i, j) + h.get(j, i));
            h.set(i, j, avg);
            h.set(j, i, avg);
        }
    }
    h
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Starting values: least squares of log t on covariates over events only,
/// log sigma from the residual standard deviation.
fn initial_theta(p: &Prepared, family: DistFamily) -> Result<Vec<f64>> {
    let events: Vec<usize> = (0..p.x.len()).filter(|&i| p.status[i] == 1).collect();
    let np = p.x[0].len();
    let (beta, resid_sd) = if events.len() > np {
        let xe: Vec<Vec<f64>> = events.iter().map(|&i| p.x[i].clone()).collect();
        let ye: Vec<f64> = events.iter().map(|&i| p.log_t[i]).collect();
        match least_squares(&xe, &ye) {
            Ok(beta) => {
                let ss: f64 = xe
                    .iter()
                    .zip(&ye)
                    .map(|(row, y)| {
                        let fit: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
                        (y - fit).powi(2)
                    })
                    .sum();
                let sd = (ss / events.len() as f64).sqrt().max(1e-3);
                (beta, sd)
            }
            Err(_) => (vec![0.0; np], 1.0),
        }
    } else {
        // Too few events for a regression start: intercept at mean log time.
        let mut beta = vec![0.0; np];
        beta[0] = p.log_t.iter().sum::<f64>() / p.log_t.len() as f64;
        (beta, 1.0)
    };
    let mut theta = beta;
    if family.free_scale() {
        theta.push(resid_sd.ln());
    }
    Ok(theta)
}

pub fn fit_aft(d: &Dataset, family: DistFamily) -> Result<AftFit> {
    let p = prepare(d);
    if !design_full_rank(&p.x) {
        return Err(Error::SingularDesign(
            "intercept + covariate design is rank deficient".into(),
        ));
    }
    let mut theta = initial_theta(&p, family)?;
    let np = theta.len();
    let mut ll = loglik(&p, family, &theta);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=MAX_ITER {
        iterations = iter;
        let g = gradient(&p, family, &theta);
        if sup_norm(&g) < GRAD_TOL * (1.0 + ll.abs()) {
            converged = true;
            break;
        }
        let neg_h = fd_hessian(&p, family, &theta).scaled(-1.0);
        // Ridge until positive definite, then solve for the Newton step.
        let scale = neg_h.data.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
        let mut step = None;
        let mut lambda = 0.0;
        for _ in 0..30 {
            let mut m = neg_h.clone();
            if lambda > 0.0 {
                m.add_ridge(lambda);
            }
            if let Some(s) = m.solve_spd(&g) {
                step = Some(s);
                break;
            }
            lambda = if lambda == 0.0 { 1e-10 * scale } else { lambda * 10.0 };
        }
        let step = match step {
            Some(s) => s,
            None => break,
        };

        // Backtracking line search on the log-likelihood.
        let slope: f64 = g.iter().zip(&step).map(|(gi, si)| gi * si).sum();
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..50 {
            let cand: Vec<f64> =
                theta.iter().zip(&step).map(|(th, s)| th + t * s).collect();
            let ll_new = loglik(&p, family, &cand);
            if ll_new.is_finite() && ll_new >= ll + 1e-4 * t * slope {
                theta = cand;
                ll = ll_new;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }

    let g = gradient(&p, family, &theta);
    let grad_norm = sup_norm(&g);
    if grad_norm < GRAD_TOL * (1.0 + ll.abs()) {
        converged = true;
    }

    let neg_h = fd_hessian(&p, family, &theta).scaled(-1.0);
    let covariance = neg_h.inverse_spd().unwrap_or_else(|| SquareMatrix::zeros(np));

    let (beta, log_sigma) = {
        let (b, ls) = split(family, &theta);
        (b.to_vec(), ls)
    };
    let k = beta.len() + usize::from(family.free_scale());
    Ok(AftFit {
        family,
        aic: -2.0 * ll + 2.0 * k as f64,
        beta,
        log_sigma,
        loglik: ll,
        covariance,
        converged,
        iterations,
        grad_norm,
        covariate_names: d.covariate_names().to_vec(),
    })
}
