//! Period function `T(E)` of a one-dimensional well and its derivative.
//!
//! All public entry points take the *unshifted* energy `E`; internally the
//! well is shifted so that its minimum value is zero.
//!
//! The period integral `T(E) = 2∫ dx / sqrt(2(E - V(x)))` over
//! `[x₁(E), x₂(E)]` is evaluated with `x = x₁ + (x₂ - x₁) sin²θ`. Writing
//! `E - V(x) = Q(x)(x - x₁)(x₂ - x)` turns it into
//! `T = 4 ∫₀^{π/2} dθ / sqrt(2 Q(x(θ)))`, whose integrand is smooth when
//! both turning points are simple.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, QuadratureOptions};
use crate::numerics::roots::brent;
use crate::potential::{
    c_min, Dimension, EffectivePotential, NormalizedPotential, Potential, PotentialSpec,
};

/// Below this excess energy the orbit is treated as the equilibrium point.
pub const DEGENERATE_ENERGY: f64 = 1e-9;

/// Default relative tolerance of the period quadrature.
pub const DEFAULT_PERIOD_TOL: f64 = 1e-10;

// Fraction of the orbit width (or of the distance to a singular lower
// limit) below which `Q` is taken from a Taylor expansion at the turning
// point instead of the ratio, which loses digits there.
const ENDPOINT_TAYLOR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    pub x1: f64,
    pub x2: f64,
}

impl TurningPoints {
    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }
}

fn shifted_energy<P: Potential + ?Sized>(energy: f64, pot: &P) -> f64 {
    energy - pot.min_value()
}

/// Solve `V(x) = E` on both sides of the minimum.
pub fn turning_points<P: Potential + ?Sized>(energy: f64, pot: &P) -> Result<TurningPoints> {
    let e_s = shifted_energy(energy, pot);
    turning_points_shifted(e_s, pot).map_err(|e| match e {
        Error::DegenerateOrbit { .. } => Error::DegenerateOrbit {
            energy,
            e_min: pot.min_value(),
        },
        other => other,
    })
}

pub(crate) fn turning_points_shifted<P: Potential + ?Sized>(
    e_s: f64,
    pot: &P,
) -> Result<TurningPoints> {
    if !(e_s > 0.0) || !e_s.is_finite() {
        return Err(Error::DegenerateOrbit {
            energy: e_s,
            e_min: 0.0,
        });
    }
    let x0 = pot.minimizer();
    let scale = pot.length_scale();
    let g = |x: f64| pot.excess(x) - e_s;

    // Geometric expansion away from the minimum, factor 2 per probe.
    let mut left = None;
    let mut inner = x0;
    for k in 1..2100 {
        let probe = match pot.lower_limit() {
            Some(lo) => lo + (x0 - lo) * 0.5f64.powi(k),
            None => x0 - scale * (2f64.powi(k) - 1.0),
        };
        if probe == inner {
            break;
        }
        if g(probe) > 0.0 {
            left = Some((probe, inner));
            break;
        }
        inner = probe;
    }
    let mut right = None;
    let mut inner = x0;
    for k in 1..1100 {
        let probe = x0 + scale * (2f64.powi(k) - 1.0);
        if !probe.is_finite() {
            break;
        }
        if g(probe) > 0.0 {
            right = Some((inner, probe));
            break;
        }
        inner = probe;
    }
    let (la, lb) =
        left.ok_or_else(|| Error::Root(format!("no left turning point for excess energy {e_s}")))?;
    let (ra, rb) = right
        .ok_or_else(|| Error::Root(format!("no right turning point for excess energy {e_s}")))?;
    let x1 = brent(g, la, lb, 1e-15, f64::MIN_POSITIVE)?;
    let x2 = brent(g, ra, rb, 1e-15, f64::MIN_POSITIVE)?;
    Ok(TurningPoints { x1, x2 })
}

/// `Q(x) = (E_s - V(x)) / ((x - x₁)(x₂ - x))` at `x(θ)`, given
/// `s = sin²θ`, `c = cos²θ`.
fn q_factor<P: Potential + ?Sized>(pot: &P, e_s: f64, tp: TurningPoints, s: f64, c: f64) -> f64 {
    let width = tp.width();
    let left_gap = width * s;
    let right_gap = width * c;
    let left_reach = match pot.lower_limit() {
        Some(lo) => width.min(tp.x1 - lo),
        None => width,
    };
    if left_gap < ENDPOINT_TAYLOR_FRACTION * left_reach {
        let x = tp.x1;
        let t = left_gap;
        let slope =
            pot.d1(x) + t * (pot.d2(x) / 2.0 + t * (pot.d3(x) / 6.0 + t * pot.d4(x) / 24.0));
        return -slope / right_gap;
    }
    if right_gap < ENDPOINT_TAYLOR_FRACTION * width {
        let x = tp.x2;
        let t = right_gap;
        let slope =
            pot.d1(x) - t * (pot.d2(x) / 2.0 - t * (pot.d3(x) / 6.0 - t * pot.d4(x) / 24.0));
        return slope / left_gap;
    }
    let x = if s <= 0.5 {
        tp.x1 + left_gap
    } else {
        tp.x2 - right_gap
    };
    (e_s - pot.excess(x)) / (left_gap * right_gap)
}

/// Period at energy `E` with the default tolerance.
pub fn period<P: Potential + ?Sized>(energy: f64, pot: &P) -> Result<f64> {
    period_with_tol(energy, pot, DEFAULT_PERIOD_TOL)
}

/// Period shared by every characteristic on the normalized level `c`;
/// the orbit period depends on mass and energy only through `c`.
pub fn period_at_level(d: Dimension, c: f64) -> Result<f64> {
    period(c, &EffectivePotential::new(PotentialSpec::unit_mass(d)))
}

pub fn period_with_tol<P: Potential + ?Sized>(energy: f64, pot: &P, rel_tol: f64) -> Result<f64> {
    let e_s = shifted_energy(energy, pot);
    if e_s < -DEGENERATE_ENERGY {
        return Err(Error::Domain(format!(
            "energy {energy} is below the well minimum {}",
            pot.min_value()
        )));
    }
    if e_s < DEGENERATE_ENERGY {
        return Ok(pot.small_oscillation_period());
    }
    let tp = turning_points_shifted(e_s, pot)?;
    let mut bad = None;
    let res = integrate(
        |theta| {
            let (sn, cs) = theta.sin_cos();
            let q = q_factor(pot, e_s, tp, sn * sn, cs * cs);
            if !(q > 0.0) || !q.is_finite() {
                bad.get_or_insert(theta);
                return 0.0;
            }
            4.0 / (2.0 * q).sqrt()
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        QuadratureOptions::with_rel_tol(rel_tol),
    )?;
    if let Some(theta) = bad {
        return Err(Error::Singular {
            x: tp.x1 + tp.width() * theta.sin().powi(2),
            reason: "non-positive energy gap inside the orbit",
        });
    }
    Ok(res.value)
}

/// `H(x) = ((V')² - 2 V V'') / (V')³` on the shifted potential.
pub fn h_function<P: Potential + ?Sized>(x: f64, pot: &P) -> Result<f64> {
    let v1 = pot.d1(x);
    if v1.abs() < 1e-14 {
        return Err(Error::Singular {
            x,
            reason: "V' vanishes at the well minimum",
        });
    }
    Ok(h_unchecked(x, v1, pot))
}

fn h_unchecked<P: Potential + ?Sized>(x: f64, v1: f64, pot: &P) -> f64 {
    (v1 * v1 - 2.0 * pot.excess(x) * pot.d2(x)) / (v1 * v1 * v1)
}

/// `T'(E) = (√2 E_s^{-3/2}) ∫₀^{E_s} (1 - y/E_s)^{-1/2} (H(x₂(y)) - H(x₁(y))) dy / 2`,
/// evaluated with `y = E_s sin²φ`.
pub fn period_derivative<P: Potential + ?Sized>(energy: f64, pot: &P) -> Result<f64> {
    period_derivative_with_tol(energy, pot, DEFAULT_PERIOD_TOL)
}

pub fn period_derivative_with_tol<P: Potential + ?Sized>(
    energy: f64,
    pot: &P,
    rel_tol: f64,
) -> Result<f64> {
    let e_s = shifted_energy(energy, pot);
    if !(e_s > 0.0) {
        return Err(Error::DegenerateOrbit {
            energy,
            e_min: pot.min_value(),
        });
    }
    // T' vanishes identically for d = 4, so the error target needs an
    // absolute floor at the rounding level of the H difference.
    let floor = match turning_points_shifted(0.5 * e_s, pot) {
        Ok(tp) => {
            let (v1a, v1b) = (pot.d1(tp.x1), pot.d1(tp.x2));
            let scale = h_unchecked(tp.x1, v1a, pot).abs() + h_unchecked(tp.x2, v1b, pot).abs();
            1e2 * f64::EPSILON * scale
        }
        Err(_) => 0.0,
    };
    let mut failure = None;
    let res = integrate(
        |phi| {
            let sn = phi.sin();
            let y = e_s * sn * sn;
            if y <= 0.0 {
                return 0.0;
            }
            match turning_points_shifted(y, pot) {
                Ok(tp) => {
                    let (v1a, v1b) = (pot.d1(tp.x1), pot.d1(tp.x2));
                    if v1a.abs() < 1e-14 || v1b.abs() < 1e-14 {
                        // y at rounding level: integrand ~ sqrt(y) there
                        return 0.0;
                    }
                    (h_unchecked(tp.x2, v1b, pot) - h_unchecked(tp.x1, v1a, pot)) * sn
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        QuadratureOptions {
            rel_tol,
            abs_tol: floor.max(1e-15),
            max_intervals: 500,
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(std::f64::consts::SQRT_2 / e_s.sqrt() * res.value)
}

/// Small-energy slope constant `c_V = -V''V''''/4 + 5(V''')²/12` at the
/// minimum, evaluated from the potential's derivatives.
pub fn c_v_of<P: Potential + ?Sized>(pot: &P) -> f64 {
    let x0 = pot.minimizer();
    let (v2, v3, v4) = (pot.d2(x0), pot.d3(x0), pot.d4(x0));
    -0.25 * v2 * v4 + 5.0 / 12.0 * v3 * v3
}

/// `d²(d-1)(d-4)/6`.
pub fn c_v_closed_form(d: Dimension) -> f64 {
    let d = d.as_f64();
    d * d * (d - 1.0) * (d - 4.0) / 6.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvReport {
    pub d: u32,
    pub evaluated: f64,
    pub closed_form: f64,
}

/// `c_V` of the normalized well `V_d`, with its closed form alongside.
pub fn c_v(d: Dimension) -> CvReport {
    CvReport {
        d: d.get(),
        evaluated: c_v_of(&NormalizedPotential::new(d)),
        closed_form: c_v_closed_form(d),
    }
}

/// Leading-order slope `π c_V / V''(X₀)^{7/2}` of `T` near the minimum.
pub fn small_energy_slope<P: Potential + ?Sized>(pot: &P) -> f64 {
    std::f64::consts::PI * c_v_of(pot) / pot.d2(pot.minimizer()).powf(3.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodTable {
    pub d: u32,
    pub m: f64,
    pub tolerance: f64,
    pub rows: Vec<(f64, f64)>,
}

impl PeriodTable {
    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.0)
    }
    pub fn periods(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.1)
    }
}

/// Tabulate `T` on an increasing energy grid (evaluated in parallel).
pub fn period_table(energies: &[f64], spec: PotentialSpec, rel_tol: f64) -> Result<PeriodTable> {
    if energies.is_empty() {
        return Err(Error::Domain("empty energy grid".into()));
    }
    if energies.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "energy grid must be strictly increasing".into(),
        ));
    }
    let pot = EffectivePotential::new(spec);
    let periods: Result<Vec<f64>> = energies
        .par_iter()
        .map(|&e| period_with_tol(e, &pot, rel_tol))
        .collect();
    Ok(PeriodTable {
        d: spec.d.get(),
        m: spec.m,
        tolerance: rel_tol,
        rows: energies.iter().copied().zip(periods?).collect(),
    })
}

/// `n` offsets log-spaced on `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstancyReport {
    pub d: u32,
    pub tau_d: f64,
    pub sup_deviation: f64,
    pub offsets: Vec<f64>,
    pub periods: Vec<f64>,
}

/// `sup_E |T(E) - τ_d|` for unit mass over 200 energies with
/// `E - e_min` log-spaced in `[1e-4, 1e2]`.
pub fn constancy_report(d: Dimension) -> Result<ConstancyReport> {
    constancy_report_on(d, &log_spaced(1e-4, 1e2, 200))
}

pub fn constancy_report_on(d: Dimension, offsets: &[f64]) -> Result<ConstancyReport> {
    let spec = PotentialSpec::unit_mass(d);
    let base = c_min(d);
    let energies: Vec<f64> = offsets.iter().map(|o| base + o).collect();
    let table = period_table(&energies, spec, DEFAULT_PERIOD_TOL)?;
    let tau = crate::potential::tau_d(d);
    let periods: Vec<f64> = table.periods().collect();
    let sup = periods.iter().map(|t| (t - tau).abs()).fold(0.0, f64::max);
    Ok(ConstancyReport {
        d: d.get(),
        tau_d: tau,
        sup_deviation: sup,
        offsets: offsets.to_vec(),
        periods,
    })
}
