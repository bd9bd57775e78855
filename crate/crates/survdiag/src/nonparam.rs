//! Kaplan-Meier survival estimation and the cumulative hazard transform
//! used in the classical Cox-Snell residual diagnostic plot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residuals::{ResidualKind, ResidualSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmStep {
    pub time: f64,
    pub survival: f64,
    pub n_risk: usize,
    pub n_event: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmCurve {
    /// One step per distinct event time, sorted ascending.
    pub points: Vec<KmStep>,
    pub censor_marks: Vec<f64>,
    pub n: usize,
}

impl KmCurve {
    /// Product-limit estimate at t; 1 before the first event, last value
    /// beyond the final step (within observed support).
    pub fn survival_at(&self, t: f64) -> f64 {
        let mut s = 1.0;
        for step in &self.points {
            if step.time <= t {
                s = step.survival;
            } else {
                break;
            }
        }
        s
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,S,n_risk,n_event")?;
        for p in &self.points {
            writeln!(w, "{:.17e},{:.17e},{},{}", p.time, p.survival, p.n_risk, p.n_event)?;
        }
        Ok(())
    }
}

/// Product-limit estimator with ties aggregated at each distinct event time.
pub fn kaplan_meier(times: &[f64], status: &[u8]) -> Result<KmCurve> {
    if times.is_empty() {
        return Err(Error::Domain("kaplan_meier on empty input".into()));
    }
    if times.len() != status.len() {
        return Err(Error::Domain(format!(
            "times/status length mismatch: {} vs {}",
            times.len(),
            status.len()
        )));
    }
    let mut idx: Vec<usize> = (0..times.len()).collect();
    idx.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap());

    let n = times.len();
    let mut points = Vec::new();
    let mut censor_marks = Vec::new();
    let mut s = 1.0;
    let mut at_risk = n;
    let mut i = 0;
    while i < n {
        let t = times[idx[i]];
        let mut events = 0;
        let mut removed = 0;
        while i < n && times[idx[i]] == t {
            if status[idx[i]] == 1 {
                events += 1;
            } else {
                censor_marks.push(t);
            }
            removed += 1;
            i += 1;
        }
        if events > 0 {
            s *= 1.0 - events as f64 / at_risk as f64;
            points.push(KmStep { time: t, survival: s, n_risk: at_risk, n_event: events });
        }
        at_risk -= removed;
    }
    Ok(KmCurve { points, censor_marks, n })
}

/// A cumulative hazard curve point; `truncated` marks the step where the KM
/// estimate hit zero and H is no longer finite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CumHazPoint {
    pub residual: f64,
    pub cum_hazard: f64,
    pub truncated: bool,
}

/// Cumulative hazard H(r) = -log KM(r) of Cox-Snell residuals, treating the
/// residuals of censored rows as censored observations.
pub fn cumhaz_of_cs(cs: &ResidualSet) -> Result<Vec<CumHazPoint>> {
    if cs.kind != ResidualKind::Cs {
        return Err(Error::Domain(format!(
            "cumhaz_of_cs expects cs residuals, got {}",
            cs.kind.name()
        )));
    }
    let km = kaplan_meier(&cs.values, &cs.status)?;
    let mut out = Vec::with_capacity(km.points.len());
    for p in &km.points {
        if p.survival > 0.0 {
            out.push(CumHazPoint {
                residual: p.time,
                cum_hazard: -p.survival.ln(),
                truncated: false,
            });
        } else {
            out.push(CumHazPoint { residual: p.time, cum_hazard: f64::INFINITY, truncated: true });
        }
    }
    Ok(out)
}
