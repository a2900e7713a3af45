use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    c0_profile, levelset_min_for_state, stationary_band, theta_profile, InitialData,
    LEVELSET_SAMPLES,
};
use crate::error::{Error, Result};
use crate::potential::{c_min, force_constant, Dimension};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stationary,
    GlobalSmooth,
    FiniteTimeBlowup,
    /// The level `C₀(r)` is not constant, so no global classical solution
    /// exists; the breakdown mode is not identified.
    InconsistentWithGlobal,
    /// The data fail the structural consistency checks.
    Inconsistent,
    /// `min f` (or the stationary test) lands inside the tolerance band
    /// around the threshold.
    Marginal,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Stationary | Verdict::GlobalSmooth => 0,
            Verdict::FiniteTimeBlowup | Verdict::InconsistentWithGlobal | Verdict::Marginal => 2,
            Verdict::Inconsistent => 1,
        }
    }

    pub fn is_global(self) -> bool {
        matches!(self, Verdict::Stationary | Verdict::GlobalSmooth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Bound on the relative spread `(max - min)/|mean|` of `C₀(r)`.
    pub c0_spread: f64,
    /// `|C₀ - C_min| <= stationary · max(1, |C_min|)` means stationary.
    pub stationary: f64,
    /// Bounds on `|u₀|/r` and the relative force residual for stationary data.
    pub stationary_residual: f64,
    /// `|min f|` below this is reported as marginal.
    pub marginal: f64,
    pub levelset_samples: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            c0_spread: 1e-6,
            stationary: 1e-8,
            stationary_residual: 1e-6,
            marginal: 1e-9,
            levelset_samples: LEVELSET_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub d: u32,
    #[serde(rename = "C0_mean")]
    pub c0_mean: f64,
    /// Relative spread `(max - min)/|mean|` of `C₀(r)` over the nodes.
    #[serde(rename = "C0_max_deviation")]
    pub c0_max_deviation: f64,
    pub levelset_min_f: Option<f64>,
    pub offending_radius: Option<f64>,
    #[serde(rename = "C_min")]
    pub c_min: f64,
    pub max_branch_mismatch: Option<f64>,
    pub message: String,
}

impl ConditionReport {
    fn inconsistent(d: u32, message: String) -> Self {
        let c = Dimension::new(d).map(c_min).unwrap_or(f64::NAN);
        Self {
            verdict: Verdict::Inconsistent,
            d,
            c0_mean: f64::NAN,
            c0_max_deviation: f64::NAN,
            levelset_min_f: None,
            offending_radius: None,
            c_min: c,
            max_branch_mismatch: None,
            message,
        }
    }
}

/// Build the data from node samples and classify; structural failures
/// become an `Inconsistent` report instead of an error.
pub fn classify_samples(
    d: Dimension,
    r: Vec<f64>,
    p0: Vec<f64>,
    u0: Vec<f64>,
    opts: &ClassifyOptions,
) -> ConditionReport {
    match InitialData::from_samples(d, r, p0, u0).and_then(|data| classify(&data, opts)) {
        Ok(report) => report,
        Err(e) => ConditionReport::inconsistent(d.get(), e.to_string()),
    }
}

/// Global-existence test: constant level `C₀`, then either stationary
/// data at `C_min` or positivity of `f` on every level curve.
pub fn classify(data: &InitialData, opts: &ClassifyOptions) -> Result<ConditionReport> {
    let d = data.dimension();
    let floor = c_min(d);
    let c0 = c0_profile(data)?;
    let vals = c0.values();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let (lo, hi) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let spread = (hi - lo) / mean.abs();
    let mut report = ConditionReport {
        verdict: Verdict::Inconsistent,
        d: d.get(),
        c0_mean: mean,
        c0_max_deviation: spread,
        levelset_min_f: None,
        offending_radius: None,
        c_min: floor,
        max_branch_mismatch: None,
        message: String::new(),
    };
    if !(spread <= opts.c0_spread) {
        report.verdict = Verdict::InconsistentWithGlobal;
        report.message = format!(
            "condition 1 violated: relative spread of C0 is {spread:.3e} (tolerance {:.1e})",
            opts.c0_spread
        );
        return Ok(report);
    }

    if (mean - floor).abs() <= opts.stationary * floor.abs().max(1.0) {
        let kappa = force_constant(d);
        let df = d.as_f64();
        let worst = data
            .nodes()
            .iter()
            .zip(data.u0().values())
            .zip(data.m0().values())
            .map(|((&r, &u), &m)| {
                let force = (kappa * m * r.powf(1.0 - df) - r).abs() / r;
                (u.abs() / r).max(force)
            })
            .fold(0.0, f64::max);
        if worst <= opts.stationary_residual {
            report.verdict = Verdict::Stationary;
            report.message = "stationary solution: u0 = 0 and force balance at every node".into();
        } else {
            report.verdict = Verdict::Marginal;
            report.message = format!(
                "C0 equals C_min within tolerance but the data are not stationary (residual {worst:.3e})"
            );
        }
        return Ok(report);
    }
    if mean < floor - stationary_band(floor) {
        return Err(Error::Inconsistent(format!(
            "mean level {mean} lies below C_min = {floor}"
        )));
    }

    let theta = theta_profile(data)?;
    report.max_branch_mismatch = Some(theta.max_branch_mismatch);
    let u_scale = data.u0().max_abs();
    let n = data.nodes().len();
    let minima: Result<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let state = data.node_state(i);
            levelset_min_for_state(&state, u_scale, opts.levelset_samples)
                .map(|m| (state.r, m.value))
        })
        .collect();
    let (r_worst, min_f) = minima?
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("profiles have at least two nodes");
    report.levelset_min_f = Some(min_f);
    if min_f.abs() < opts.marginal {
        report.verdict = Verdict::Marginal;
        report.offending_radius = Some(r_worst);
        report.message = format!("min f = {min_f:.3e} is inside the marginal band");
    } else if min_f > 0.0 {
        report.verdict = Verdict::GlobalSmooth;
        report.message = format!("f stays positive on every level curve (min {min_f:.6e})");
    } else {
        report.verdict = Verdict::FiniteTimeBlowup;
        report.offending_radius = Some(r_worst);
        report.message = format!("f reaches {min_f:.6e} on the level curve of r = {r_worst:.6e}");
    }
    Ok(report)
}
