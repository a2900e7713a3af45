//! Newtonian repulsion with quadratic confinement in radial coordinates.
//!
//! The Newtonian kernel uses the normalization `N(r) = c_d r^{2-d}` with
//! `c_d = 1/|S^{d-1}|` for `d >= 3` and `N(r) = -ln(r)/(2π)` for `d = 2`.
//! Note that `c_d` is *not* the Green's-function constant
//! `1/((d-2)|S^{d-1}|)`; the radial force is `∂_r N = -c_d (d-2) r^{1-d}`.
//!
//! Every confined effective potential `V_eff(r) = m N(r) + r²/2` is a
//! rescaled copy of the normalized well
//! `V_d(x) = (x^{2-d} - 1)/(d-2) + (x² - 1)/2` (with `-ln x` for `d = 2`):
//! `V_eff(r) = e_min + r*² V_d(r / r*)`. Excess energies above the
//! minimum are evaluated through that identity, with a power series near
//! `x = 1`, so they keep full relative precision close to the bottom of
//! the well.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension, `d >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {d}")));
        }
        Ok(Self(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub fn is_planar(self) -> bool {
        self.0 == 2
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Self::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Γ(d/2) for integer `d >= 1`, by the half-integer recurrence.
fn gamma_half(d: u32) -> f64 {
    let (mut g, mut arg) = if d.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while arg < d as f64 / 2.0 - 0.25 {
        g *= arg;
        arg += 1.0;
    }
    g
}

/// Surface area of the unit sphere `S^{d-1}`: `2π^{d/2}/Γ(d/2)`.
pub fn sphere_area(d: Dimension) -> f64 {
    2.0 * PI.powf(d.as_f64() / 2.0) / gamma_half(d.get())
}

/// `c_d = 1/|S^{d-1}|`.
pub fn c_d(d: Dimension) -> f64 {
    1.0 / sphere_area(d)
}

/// Coefficient `κ` of the radial force, `∂_r N(r) = -κ r^{1-d}`.
pub fn force_constant(d: Dimension) -> f64 {
    if d.is_planar() {
        1.0 / (2.0 * PI)
    } else {
        c_d(d) * (d.as_f64() - 2.0)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "radius must be positive and finite, got {r}"
        )))
    }
}

/// Newtonian potential `N(r)` for unit mass.
pub fn newtonian(r: f64, d: Dimension) -> Result<f64> {
    check_radius(r)?;
    Ok(newtonian_unchecked(r, d))
}

/// `∂_r N(r)`.
pub fn newtonian_d1(r: f64, d: Dimension) -> Result<f64> {
    check_radius(r)?;
    Ok(newtonian_d1_unchecked(r, d))
}

/// `∂_rr N(r)`.
pub fn newtonian_d2(r: f64, d: Dimension) -> Result<f64> {
    check_radius(r)?;
    Ok(newtonian_d2_unchecked(r, d))
}

pub(crate) fn newtonian_unchecked(r: f64, d: Dimension) -> f64 {
    if d.is_planar() {
        -r.ln() / (2.0 * PI)
    } else {
        c_d(d) * r.powf(2.0 - d.as_f64())
    }
}

pub(crate) fn newtonian_d1_unchecked(r: f64, d: Dimension) -> f64 {
    -force_constant(d) * r.powf(1.0 - d.as_f64())
}

pub(crate) fn newtonian_d2_unchecked(r: f64, d: Dimension) -> f64 {
    force_constant(d) * (d.as_f64() - 1.0) * r.powf(-d.as_f64())
}

/// Dimension and enclosed mass of one characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub d: Dimension,
    pub m: f64,
}

impl PotentialSpec {
    pub fn new(d: u32, m: f64) -> Result<Self> {
        let d = Dimension::new(d)?;
        Self::with_dimension(d, m)
    }

    pub fn with_dimension(d: Dimension, m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!("mass must be positive, got {m}")));
        }
        Ok(Self { d, m })
    }

    pub fn unit_mass(d: Dimension) -> Self {
        Self { d, m: 1.0 }
    }
}

/// Unique minimizer of `m N(r) + r²/2`: `r*^d = κ m`.
pub fn equilibrium_radius(spec: PotentialSpec) -> f64 {
    (force_constant(spec.d) * spec.m).powf(1.0 / spec.d.as_f64())
}

/// Minimum of the effective potential, `V_eff(r*)`.
pub fn e_min(spec: PotentialSpec) -> f64 {
    let r = equilibrium_radius(spec);
    spec.m * newtonian_unchecked(r, spec.d) + 0.5 * r * r
}

/// `C_min = min_r (N(r) + r²/2)`, the unit-mass minimum.
pub fn c_min(d: Dimension) -> f64 {
    e_min(PotentialSpec::unit_mass(d))
}

/// Small-oscillation period `2π / sqrt(V_eff''(r*))`, evaluated at unit
/// mass (it does not depend on `m`).
pub fn tau_d(d: Dimension) -> f64 {
    tau_at_mass(PotentialSpec::unit_mass(d))
}

pub(crate) fn tau_at_mass(spec: PotentialSpec) -> f64 {
    let r = equilibrium_radius(spec);
    let curvature = spec.m * newtonian_d2_unchecked(r, spec.d) + 1.0;
    2.0 * PI / curvature.sqrt()
}

/// Map an energy at mass `m` to the unit-mass energy with the same
/// period: `m^{-2/d} E` for `d >= 3`, `E/m + ln(m)/(4π)` for `d = 2`.
pub fn normalize_energy(energy: f64, spec: PotentialSpec) -> Result<f64> {
    let floor = e_min(spec);
    if energy < floor - 1e-9 * floor.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "energy {energy} is below the minimum {floor} of the effective potential"
        )));
    }
    Ok(normalize_energy_unchecked(energy, spec))
}

pub(crate) fn normalize_energy_unchecked(energy: f64, spec: PotentialSpec) -> f64 {
    if spec.d.is_planar() {
        energy / spec.m + spec.m.ln() / (4.0 * PI)
    } else {
        spec.m.powf(-2.0 / spec.d.as_f64()) * energy
    }
}

/// Inverse of [`normalize_energy`]: the energy at mass `m` whose
/// normalized value is `normalized`.
pub fn denormalize_energy(normalized: f64, spec: PotentialSpec) -> f64 {
    if spec.d.is_planar() {
        spec.m * (normalized - spec.m.ln() / (4.0 * PI))
    } else {
        spec.m.powf(2.0 / spec.d.as_f64()) * normalized
    }
}

/// A one-dimensional potential well with a single nondegenerate minimum.
///
/// `excess` is `V(x) - V(X₀)`; the period and derivative formulas work on
/// this shifted potential so that the well bottom sits at zero.
pub trait Potential: Sync {
    fn dimension_label(&self) -> String;
    /// Location `X₀` of the minimum.
    fn minimizer(&self) -> f64;
    /// `V(X₀)`.
    fn min_value(&self) -> f64;
    fn excess(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn d3(&self, x: f64) -> f64;
    fn d4(&self, x: f64) -> f64;
    /// Left end of the domain; `None` for the whole line.
    fn lower_limit(&self) -> Option<f64> {
        Some(0.0)
    }
    /// Length used to seed the bracket expansion for turning points.
    fn length_scale(&self) -> f64 {
        self.minimizer().abs().max(f64::MIN_POSITIVE)
    }
    /// Small-oscillation period `2π / sqrt(V''(X₀))`.
    fn small_oscillation_period(&self) -> f64 {
        2.0 * PI / self.d2(self.minimizer()).sqrt()
    }
}

/// The normalized well `V_d` with `X₀ = 1`, `V_d(1) = V_d'(1) = 0`,
/// `V_d''(1) = d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPotential {
    pub d: Dimension,
}

impl NormalizedPotential {
    pub fn new(d: Dimension) -> Self {
        Self { d }
    }

    /// Direct evaluation of `V_d(x)` without the near-minimum series.
    pub fn value(&self, x: f64) -> f64 {
        let d = self.d.as_f64();
        let core = if self.d.is_planar() {
            -x.ln()
        } else {
            (x.powf(2.0 - d) - 1.0) / (d - 2.0)
        };
        core + 0.5 * (x * x - 1.0)
    }
}

/// `V_d(1 + δ)`, accurate to a few ulps relative even for tiny `δ`.
fn normalized_excess(d: Dimension, x: f64) -> f64 {
    let delta = x - 1.0;
    if delta.abs() < 0.05 {
        // (x^{-k} - 1 + kδ)/k = Σ_{j>=2} a_j δ^j, k = d - 2 (limit -ln(1+δ) + δ at k = 0)
        let k = d.as_f64() - 2.0;
        let mut a = 0.5 * (k + 1.0);
        let mut pow = delta * delta;
        let mut sum = 0.5 * pow;
        for j in 2..60 {
            let term = a * pow;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            a *= -(k + j as f64) / (j as f64 + 1.0);
            pow *= delta;
        }
        sum
    } else {
        NormalizedPotential { d }.value(x)
    }
}

fn normalized_d1(d: Dimension, x: f64) -> f64 {
    // x - x^{1-d}, written to avoid cancellation near x = 1; away from
    // it x - 1 would lose tiny x entirely
    let delta = x - 1.0;
    if delta.abs() < 0.5 {
        delta - ((1.0 - d.as_f64()) * delta.ln_1p()).exp_m1()
    } else {
        x - x.powf(1.0 - d.as_f64())
    }
}

fn normalized_d2(d: Dimension, x: f64) -> f64 {
    let d = d.as_f64();
    1.0 + (d - 1.0) * x.powf(-d)
}

fn normalized_d3(d: Dimension, x: f64) -> f64 {
    let d = d.as_f64();
    -d * (d - 1.0) * x.powf(-d - 1.0)
}

fn normalized_d4(d: Dimension, x: f64) -> f64 {
    let d = d.as_f64();
    d * (d + 1.0) * (d - 1.0) * x.powf(-d - 2.0)
}

impl Potential for NormalizedPotential {
    fn dimension_label(&self) -> String {
        format!("V_{} (normalized)", self.d)
    }
    fn minimizer(&self) -> f64 {
        1.0
    }
    fn min_value(&self) -> f64 {
        0.0
    }
    fn excess(&self, x: f64) -> f64 {
        normalized_excess(self.d, x)
    }
    fn d1(&self, x: f64) -> f64 {
        normalized_d1(self.d, x)
    }
    fn d2(&self, x: f64) -> f64 {
        normalized_d2(self.d, x)
    }
    fn d3(&self, x: f64) -> f64 {
        normalized_d3(self.d, x)
    }
    fn d4(&self, x: f64) -> f64 {
        normalized_d4(self.d, x)
    }
}

/// `V_eff(r) = m N(r) + r²/2` for one characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePotential {
    pub spec: PotentialSpec,
    r_star: f64,
    e_min: f64,
}

impl EffectivePotential {
    pub fn new(spec: PotentialSpec) -> Self {
        Self {
            spec,
            r_star: equilibrium_radius(spec),
            e_min: e_min(spec),
        }
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    /// Unshifted value `m N(r) + r²/2`.
    pub fn value(&self, r: f64) -> f64 {
        self.spec.m * newtonian_unchecked(r, self.spec.d) + 0.5 * r * r
    }

    /// Radial force `-V_eff'(r) = -m ∂_r N(r) - r`.
    pub fn force(&self, r: f64) -> f64 {
        -self.spec.m * newtonian_d1_unchecked(r, self.spec.d) - r
    }

    /// Particle energy `u²/2 + V_eff(r)`.
    pub fn energy(&self, r: f64, u: f64) -> f64 {
        0.5 * u * u + self.value(r)
    }
}

impl Potential for EffectivePotential {
    fn dimension_label(&self) -> String {
        format!("V_eff (d = {}, m = {})", self.spec.d, self.spec.m)
    }
    fn minimizer(&self) -> f64 {
        self.r_star
    }
    fn min_value(&self) -> f64 {
        self.e_min
    }
    fn excess(&self, r: f64) -> f64 {
        self.r_star * self.r_star * normalized_excess(self.spec.d, r / self.r_star)
    }
    fn d1(&self, r: f64) -> f64 {
        self.r_star * normalized_d1(self.spec.d, r / self.r_star)
    }
    fn d2(&self, r: f64) -> f64 {
        normalized_d2(self.spec.d, r / self.r_star)
    }
    fn d3(&self, r: f64) -> f64 {
        normalized_d3(self.spec.d, r / self.r_star) / self.r_star
    }
    fn d4(&self, r: f64) -> f64 {
        normalized_d4(self.spec.d, r / self.r_star) / (self.r_star * self.r_star)
    }
}
