//! Residuals for censored failure-time regression: survival-probability
//! based (USP, MSP, RSP and their normal transforms), Cox-Snell and its
//! modification, martingale, and deviance residuals, plus leave-one-out
//! cross-validated variants.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::aft::{self, AftFit};
use crate::coxph::CoxFit;
use crate::data::{Dataset, SurvivalRecord};
use crate::dist::{normal_quantile, DistFamily};
use crate::error::{Error, Result};
use crate::rng::uniform_open_closed;

/// Default shrinkage for MSP/NMSP: eta = 1/e, i.e. Delta = 1 on the
/// Cox-Snell scale.
pub const DEFAULT_ETA: f64 = 0.367_879_441_171_442_33;

/// Probabilities are clamped this far away from {0,1} before a normal
/// quantile transform; affected rows are flagged.
pub const PROB_CLAMP: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Usp,
    Msp,
    Cs,
    #[clap(name = "cs-mod")]
    CsModified,
    Martingale,
    Deviance,
    Nmsp,
    Rsp,
    Nrsp,
}

impl ResidualKind {
    pub fn name(&self) -> &'static str {
        match self {
            ResidualKind::Usp => "usp",
            ResidualKind::Msp => "msp",
            ResidualKind::Cs => "cs",
            ResidualKind::CsModified => "cs_modified",
            ResidualKind::Martingale => "martingale",
            ResidualKind::Deviance => "deviance",
            ResidualKind::Nmsp => "nmsp",
            ResidualKind::Rsp => "rsp",
            ResidualKind::Nrsp => "nrsp",
        }
    }

    pub fn uses_eta(&self) -> bool {
        matches!(self, ResidualKind::Msp | ResidualKind::CsModified | ResidualKind::Nmsp)
    }

    pub fn uses_seed(&self) -> bool {
        matches!(self, ResidualKind::Rsp | ResidualKind::Nrsp)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "usp" => Ok(ResidualKind::Usp),
            "msp" => Ok(ResidualKind::Msp),
            "cs" => Ok(ResidualKind::Cs),
            "cs_modified" | "cs-mod" => Ok(ResidualKind::CsModified),
            "martingale" => Ok(ResidualKind::Martingale),
            "deviance" => Ok(ResidualKind::Deviance),
            "nmsp" => Ok(ResidualKind::Nmsp),
            "rsp" => Ok(ResidualKind::Rsp),
            "nrsp" => Ok(ResidualKind::Nrsp),
            other => Err(Error::Domain(format!("unknown residual kind '{other}'"))),
        }
    }
}

/// One residual kind evaluated over a dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualSet {
    pub kind: ResidualKind,
    pub values: Vec<f64>,
    pub times: Vec<f64>,
    pub status: Vec<u8>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub model_id: String,
    /// Rows clamped at a probability boundary or dropped by a failed
    /// held-out fit (value NaN in the latter case).
    pub flags: Vec<bool>,
}

impl ResidualSet {
    /// Values of unflagged rows, the input accepted by the GOF tests.
    pub fn clean_values(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.flags)
            .filter(|(v, _)| v.is_finite())
            .map(|(v, _)| *v)
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# kind={}", self.kind.name())?;
        if let Some(eta) = self.eta {
            writeln!(w, "# eta={eta:.9}")?;
        }
        if let Some(seed) = self.seed {
            writeln!(w, "# seed={seed}")?;
        }
        writeln!(w, "# model={}", self.model_id)?;
        writeln!(w, "row,time,status,value,flag")?;
        for i in 0..self.values.len() {
            writeln!(
                w,
                "{},{:.17e},{},{:.17e},{}",
                i,
                self.times[i],
                self.status[i],
                self.values[i],
                u8::from(self.flags[i])
            )?;
        }
        Ok(())
    }

    /// Parses a file previously produced by `write_csv`.
    pub fn read_csv<R: std::io::BufRead>(r: R) -> Result<Self> {
        let mut kind = None;
        let mut eta = None;
        let mut seed = None;
        let mut model_id = String::from("unknown");
        let mut header_seen = false;
        let (mut values, mut times, mut status, mut flags) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                if let Some((k, v)) = meta.split_once('=') {
                    match k.trim() {
                        "kind" => kind = Some(ResidualKind::parse(v.trim())?),
                        "eta" => eta = v.trim().parse::<f64>().ok(),
                        "seed" => seed = v.trim().parse::<u64>().ok(),
                        "model" => model_id = v.trim().to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if line != "row,time,status,value,flag" {
                    return Err(Error::Schema(format!(
                        "expected residual CSV header, got '{line}'"
                    )));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Row {
                    row: lineno,
                    message: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let bad = |message: String| Error::Row { row: lineno, message };
            times.push(
                fields[1].parse::<f64>().map_err(|e| bad(format!("time: {e}")))?,
            );
            status.push(
                fields[2].parse::<u8>().map_err(|e| bad(format!("status: {e}")))?,
            );
            values.push(
                fields[3].parse::<f64>().map_err(|e| bad(format!("value: {e}")))?,
            );
            flags.push(fields[4].trim() == "1");
        }
        let kind = kind
            .ok_or_else(|| Error::Schema("missing '# kind=' metadata line".into()))?;
        if values.is_empty() {
            return Err(Error::Schema("residual CSV contains no data rows".into()));
        }
        Ok(ResidualSet { kind, values, times, status, eta, seed, model_id, flags })
    }
}

/// Anything that can assign a survival probability to a record.
pub trait SurvivalModel: Sync {
    fn survival(&self, record: &SurvivalRecord) -> Result<f64>;
    fn model_id(&self) -> String;
}

impl SurvivalModel for AftFit {
    fn survival(&self, record: &SurvivalRecord) -> Result<f64> {
        self.predict_surv(record)
    }

    fn model_id(&self) -> String {
        format!("aft:{}", self.family.name())
    }
}

impl SurvivalModel for CoxFit {
    fn survival(&self, record: &SurvivalRecord) -> Result<f64> {
        self.predict_surv(record)
    }

    fn model_id(&self) -> String {
        "coxph".into()
    }
}

fn require_kind(set: &ResidualSet, kind: ResidualKind, op: &str) -> Result<()> {
    if set.kind != kind {
        return Err(Error::Domain(format!(
            "{op} expects {} input, got {}",
            kind.name(),
            set.kind.name()
        )));
    }
    Ok(())
}

/// Unmodified survival probabilities S_i(T_i), censored or not.
pub fn usp(model: &dyn SurvivalModel, d: &Dataset) -> Result<ResidualSet> {
    let mut values = Vec::with_capacity(d.len());
    for (i, r) in d.records().iter().enumerate() {
        let s = model.survival(r)?;
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::ModelInconsistency(format!(
                "survival evaluator returned {s} outside (0,1] at row {i}"
            )));
        }
        values.push(s);
    }
    Ok(ResidualSet {
        kind: ResidualKind::Usp,
        flags: vec![false; d.len()],
        values,
        times: d.times(),
        status: d.statuses(),
        eta: None,
        seed: None,
        model_id: model.model_id(),
    })
}

/// Shrinks censored USPs by a fixed factor eta.
pub fn msp(usp: &ResidualSet, eta: f64) -> Result<ResidualSet> {
    require_kind(usp, ResidualKind::Usp, "msp")?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must be in (0,1), got {eta}")));
    }
    let values = usp
        .values
        .iter()
        .zip(&usp.status)
        .map(|(v, &s)| if s == 1 { *v } else { eta * v })
        .collect();
    Ok(ResidualSet {
        kind: ResidualKind::Msp,
        values,
        eta: Some(eta),
        ..usp.clone()
    })
}

/// Cox-Snell residuals -log S_i(T_i).
pub fn cox_snell(usp: &ResidualSet) -> Result<ResidualSet> {
    require_kind(usp, ResidualKind::Usp, "cox_snell")?;
    let mut flags = usp.flags.clone();
    let values: Vec<f64> = usp.values.iter().map(|v| -v.ln()).collect();
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            flags[i] = true;
        }
    }
    Ok(ResidualSet { kind: ResidualKind::Cs, values, flags, ..usp.clone() })
}

/// Cox-Snell residuals with Delta added on censored rows only.
pub fn cs_modified(usp: &ResidualSet, delta: f64) -> Result<ResidualSet> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let cs = cox_snell(usp)?;
    let values = cs
        .values
        .iter()
        .zip(&cs.status)
        .map(|(v, &s)| if s == 1 { *v } else { v + delta })
        .collect();
    Ok(ResidualSet {
        kind: ResidualKind::CsModified,
        values,
        eta: Some((-delta).exp()),
        ..cs
    })
}

/// Martingale residuals d_i - cs_i.
pub fn martingale(cs: &ResidualSet) -> Result<ResidualSet> {
    require_kind(cs, ResidualKind::Cs, "martingale")?;
    let values = cs
        .values
        .iter()
        .zip(&cs.status)
        .map(|(v, &s)| f64::from(s) - v)
        .collect();
    Ok(ResidualSet { kind: ResidualKind::Martingale, values, ..cs.clone() })
}

/// Deviance residuals: sign(M) * sqrt(-2 * [M + d * log(d - M)]).
pub fn deviance(mart: &ResidualSet) -> Result<ResidualSet> {
    require_kind(mart, ResidualKind::Martingale, "deviance")?;
    let mut values = Vec::with_capacity(mart.values.len());
    for (i, (&m, &s)) in mart.values.iter().zip(&mart.status).enumerate() {
        let d = f64::from(s);
        let log_term = if s == 1 {
            let cs = d - m;
            if cs <= 0.0 {
                return Err(Error::Domain(format!(
                    "event row {i} has d - M = {cs} <= 0; not a valid martingale residual"
                )));
            }
            cs.ln()
        } else {
            0.0
        };
        let inner = -2.0 * (m + d * log_term);
        values.push(m.signum() * inner.max(0.0).sqrt());
    }
    Ok(ResidualSet { kind: ResidualKind::Deviance, values, ..mart.clone() })
}

/// Randomized survival probabilities: events keep their USP; each censored
/// row gets U_i * USP with U_i ~ uniform(0,1] keyed by (seed, row index).
pub fn rsp(usp: &ResidualSet, seed: u64) -> Result<ResidualSet> {
    require_kind(usp, ResidualKind::Usp, "rsp")?;
    let values = usp
        .values
        .iter()
        .zip(&usp.status)
        .enumerate()
        .map(|(i, (v, &s))| {
            if s == 1 {
                *v
            } else {
                uniform_open_closed(seed, i as u64) * v
            }
        })
        .collect();
    Ok(ResidualSet { kind: ResidualKind::Rsp, values, seed: Some(seed), ..usp.clone() })
}

fn quantile_transform(
    input: &ResidualSet,
    expected: ResidualKind,
    out_kind: ResidualKind,
) -> Result<ResidualSet> {
    require_kind(input, expected, out_kind.name())?;
    let mut flags = input.flags.clone();
    let mut values = Vec::with_capacity(input.values.len());
    for (i, &v) in input.values.iter().enumerate() {
        let clamped = v.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        if clamped != v {
            flags[i] = true;
        }
        values.push(normal_quantile(clamped)?);
    }
    Ok(ResidualSet { kind: out_kind, values, flags, ..input.clone() })
}

/// Normal quantile transform of RSPs.
pub fn nrsp(rsp: &ResidualSet) -> Result<ResidualSet> {
    quantile_transform(rsp, ResidualKind::Rsp, ResidualKind::Nrsp)
}

/// Normal quantile transform of MSPs (the non-random competitor).
pub fn nmsp(msp: &ResidualSet) -> Result<ResidualSet> {
    quantile_transform(msp, ResidualKind::Msp, ResidualKind::Nmsp)
}

/// Computes any residual kind from a fitted survival model.
pub fn compute(
    model: &dyn SurvivalModel,
    d: &Dataset,
    kind: ResidualKind,
    eta: f64,
    seed: u64,
) -> Result<ResidualSet> {
    let base = usp(model, d)?;
    match kind {
        ResidualKind::Usp => Ok(base),
        ResidualKind::Msp => msp(&base, eta),
        ResidualKind::Cs => cox_snell(&base),
        ResidualKind::CsModified => cs_modified(&base, -eta.ln()),
        ResidualKind::Martingale => martingale(&cox_snell(&base)?),
        ResidualKind::Deviance => deviance(&martingale(&cox_snell(&base)?)?),
        ResidualKind::Nmsp => nmsp(&msp(&base, eta)?),
        ResidualKind::Rsp => rsp(&base, seed),
        ResidualKind::Nrsp => nrsp(&rsp(&base, seed)?),
    }
}

/// Leave-one-out residuals: each row's residual comes from a model fitted
/// without that row. AFT families only; a non-convergent held-out fit
/// flags the row and leaves its value NaN.
pub fn residuals_cv(
    d: &Dataset,
    family: DistFamily,
    kind: ResidualKind,
    eta: f64,
    seed: u64,
) -> Result<ResidualSet> {
    let n = d.len();
    if n < d.dim() + 3 {
        return Err(Error::Domain(format!(
            "leave-one-out needs n >= dim + 3 (n = {n}, dim = {})",
            d.dim()
        )));
    }
    let mut values = vec![f64::NAN; n];
    let mut flags = vec![false; n];
    for i in 0..n {
        let reduced = match d.without_row(i) {
            Ok(r) => r,
            Err(_) => {
                flags[i] = true;
                continue;
            }
        };
        let fit = match aft::fit_aft(&reduced, family) {
            Ok(f) if f.converged => f,
            _ => {
                flags[i] = true;
                continue;
            }
        };
        let record = &d.records()[i];
        let s = fit.predict_surv(record)?;
        let s = s.clamp(PROB_CLAMP, 1.0);
        let status = record.status;
        let value = match kind {
            ResidualKind::Usp => s,
            ResidualKind::Msp => {
                if status == 1 {
                    s
                } else {
                    eta * s
                }
            }
            ResidualKind::Cs => -s.ln(),
            ResidualKind::CsModified => {
                -s.ln() + if status == 1 { 0.0 } else { -eta.ln() }
            }
            ResidualKind::Martingale => f64::from(status) + s.ln(),
            ResidualKind::Deviance => {
                let m = f64::from(status) + s.ln();
                let dlog = if status == 1 { (-s.ln()).ln() } else { 0.0 };
                let inner = -2.0 * (m + f64::from(status) * dlog);
                m.signum() * inner.max(0.0).sqrt()
            }
            ResidualKind::Nmsp => {
                let p = if status == 1 { s } else { eta * s };
                normal_quantile(p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))?
            }
            ResidualKind::Rsp => {
                if status == 1 {
                    s
                } else {
                    uniform_open_closed(seed, i as u64) * s
                }
            }
            ResidualKind::Nrsp => {
                let p = if status == 1 {
                    s
                } else {
                    uniform_open_closed(seed, i as u64) * s
                };
                normal_quantile(p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))?
            }
        };
        values[i] = value;
    }
    Ok(ResidualSet {
        kind,
        values,
        times: d.times(),
        status: d.statuses(),
        eta: kind.uses_eta().then_some(eta),
        seed: kind.uses_seed().then_some(seed),
        model_id: format!("aft:{}:loo", family.name()),
        flags,
    })
}
