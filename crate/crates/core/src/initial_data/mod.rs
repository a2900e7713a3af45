//! Radial initial data `(P₀, u₀, R₀)`, the profiles derived from it and the
//! per-characteristic quantities entering the global-existence test.

mod classify;
mod generators;

pub use classify::{classify, classify_samples, ClassifyOptions, ConditionReport, Verdict};
pub use generators::{
    fixture_suite, log_grid, make_compliant, make_stationary, Fixture, FixtureKind, MassShape,
    DEFAULT_GRID_NODES,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quadrature::gauss7;
use crate::numerics::roots::golden_section_min;
use crate::period::turning_points_shifted;
use crate::potential::{
    c_min, force_constant, newtonian_d1_unchecked, newtonian_unchecked, normalize_energy_unchecked,
    Dimension, EffectivePotential, Potential, PotentialSpec,
};
use crate::profile::RadialProfile;

/// Relative size below which a θ denominator counts as zero.
pub const BRANCH_EPS: f64 = 1e-8;

/// The branch-agreement diagnostic is only taken where neither the force
/// denominator nor the second branch's numerator has cancelled below this
/// fraction of its terms; otherwise float agreement is not expected.
pub const AGREEMENT_CONDITIONING: f64 = 1e-6;

/// Samples of the level curve before golden-section refinement.
pub const LEVELSET_SAMPLES: usize = 401;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialData {
    d: Dimension,
    p0: RadialProfile,
    q0: RadialProfile,
    u0: RadialProfile,
    m0: RadialProfile,
}

/// `q₀ = r^{1-d} P₀`, which tends to a positive constant at the origin.
/// Densities are interpolated in this form.
fn reduced_density(p0: &RadialProfile, d: Dimension) -> Result<RadialProfile> {
    if let Some(i) = p0.values().iter().position(|&p| p < 0.0) {
        return Err(Error::Inconsistent(format!(
            "P0 is negative at r = {}",
            p0.nodes()[i]
        )));
    }
    let first = p0.values()[0];
    if !(first > 0.0) {
        return Err(Error::Inconsistent(format!(
            "r^(1-d) P0 must have a positive limit at 0, but P0 = {first} at the first node"
        )));
    }
    let k = d.as_f64() - 1.0;
    let (q, dq): (Vec<f64>, Vec<f64>) = p0
        .nodes()
        .iter()
        .zip(p0.values().iter().zip(p0.slopes()))
        .map(|(&r, (&p, &s))| {
            let w = r.powf(-k);
            (p * w, w * (s - k * p / r))
        })
        .unzip();
    RadialProfile::with_slopes(p0.nodes().to_vec(), q, dq)
}

fn mass_from_reduced(q0: &RadialProfile, d: Dimension) -> Result<RadialProfile> {
    let df = d.as_f64();
    let r = q0.nodes();
    let mut acc = q0.values()[0] * r[0].powf(df) / df;
    let mut values = Vec::with_capacity(r.len());
    values.push(acc);
    for w in r.windows(2) {
        acc += gauss7(|x| x.powf(df - 1.0) * q0.eval(x), w[0], w[1]);
        values.push(acc);
    }
    let slopes = r
        .iter()
        .zip(q0.values())
        .map(|(&x, &q)| q * x.powf(df - 1.0))
        .collect();
    RadialProfile::with_slopes(r.to_vec(), values, slopes)
}

/// Enclosed mass `m₀(r) = ∫₀^r P₀`. The density is interpolated as
/// `r^{d-1} q₀(r)` with `q₀` cubic Hermite, continued as the constant
/// `q₀(r₀)` below the first node, and integrated with 7-point Gauss per
/// interval. Node slopes of the result are the `P₀` values.
pub fn derive_mass(p0: &RadialProfile, d: Dimension) -> Result<RadialProfile> {
    mass_from_reduced(&reduced_density(p0, d)?, d)
}

impl InitialData {
    pub fn new(d: Dimension, p0: RadialProfile, u0: RadialProfile) -> Result<Self> {
        if p0.nodes() != u0.nodes() {
            return Err(Error::Inconsistent(
                "P0 and u0 are tabulated on different grids".into(),
            ));
        }
        let q0 = reduced_density(&p0, d)?;
        let m0 = mass_from_reduced(&q0, d)?;
        if let Some(w) = m0.values().windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Inconsistent(format!(
                "enclosed mass decreases at r = {}",
                m0.nodes()[w + 1]
            )));
        }
        let r0 = u0.first_node();
        let lip = u0.slopes().iter().fold(0.0f64, |a, s| a.max(s.abs()));
        let u_first = u0.values()[0].abs();
        if u_first > 1.01 * lip * r0 {
            return Err(Error::Inconsistent(format!(
                "u0 does not extrapolate to 0 at the origin: |u0({r0})| = {u_first} exceeds max|u0'| r"
            )));
        }
        Ok(Self { d, p0, q0, u0, m0 })
    }

    /// Build from node values; slopes are estimated.
    pub fn from_samples(d: Dimension, r: Vec<f64>, p0: Vec<f64>, u0: Vec<f64>) -> Result<Self> {
        let p0 = RadialProfile::from_samples(r.clone(), p0)?;
        let u0 = RadialProfile::from_samples(r, u0)?;
        Self::new(d, p0, u0)
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    pub fn p0(&self) -> &RadialProfile {
        &self.p0
    }

    pub fn u0(&self) -> &RadialProfile {
        &self.u0
    }

    pub fn m0(&self) -> &RadialProfile {
        &self.m0
    }

    pub fn nodes(&self) -> &[f64] {
        self.p0.nodes()
    }

    /// `R₀`, the last grid node.
    pub fn support_radius(&self) -> f64 {
        self.p0.last_node()
    }

    /// Copy with `u₀` multiplied by `factor`.
    pub fn with_scaled_velocity(&self, factor: f64) -> Self {
        Self {
            d: self.d,
            p0: self.p0.clone(),
            q0: self.q0.clone(),
            u0: self.u0.scaled(factor),
            m0: self.m0.clone(),
        }
    }

    fn below_first(&self, r: f64) -> Option<f64> {
        let first = self.p0.first_node();
        (r < first).then(|| r / first)
    }

    pub fn p0_at(&self, r: f64) -> f64 {
        let q = match self.below_first(r) {
            Some(_) => self.q0.values()[0],
            None => self.q0.eval(r),
        };
        q * r.powf(self.d.as_f64() - 1.0)
    }

    pub fn mass_at(&self, r: f64) -> f64 {
        if let Some(q) = self.below_first(r) {
            return self.m0.values()[0] * q.powf(self.d.as_f64());
        }
        let nodes = self.nodes();
        let i = nodes.partition_point(|&x| x <= r).clamp(1, nodes.len()) - 1;
        if nodes[i] == r {
            return self.m0.values()[i];
        }
        let k = self.d.as_f64() - 1.0;
        self.m0.values()[i] + gauss7(|x| x.powf(k) * self.q0.eval(x), nodes[i], r)
    }

    pub fn u0_at(&self, r: f64) -> f64 {
        match self.below_first(r) {
            Some(q) => self.u0.values()[0] * q,
            None => self.u0.eval(r),
        }
    }

    pub fn u0_slope_at(&self, r: f64) -> f64 {
        match self.below_first(r) {
            Some(_) => self.u0.values()[0] / self.u0.first_node(),
            None => self.u0.derivative(r),
        }
    }

    /// Everything a single characteristic starting at `r` needs.
    pub fn characteristic_at(&self, r: f64) -> NodeState {
        NodeState {
            d: self.d,
            r,
            p: self.p0_at(r),
            u: self.u0_at(r),
            w: self.u0_slope_at(r),
            m: self.mass_at(r),
        }
    }

    fn node_state(&self, i: usize) -> NodeState {
        NodeState {
            d: self.d,
            r: self.nodes()[i],
            p: self.p0.values()[i],
            u: self.u0.values()[i],
            w: self.u0.slopes()[i],
            m: self.m0.values()[i],
        }
    }
}

/// Initial `(r, u, P, w = ∂_r u)` and enclosed mass of one characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeState {
    pub d: Dimension,
    pub r: f64,
    pub p: f64,
    pub u: f64,
    pub w: f64,
    pub m: f64,
}

impl NodeState {
    pub fn spec(&self) -> Result<PotentialSpec> {
        PotentialSpec::with_dimension(self.d, self.m)
    }

    /// Particle energy `u²/2 + m N(r) + r²/2`.
    pub fn energy(&self) -> f64 {
        0.5 * self.u * self.u + self.m * newtonian_unchecked(self.r, self.d) + 0.5 * self.r * self.r
    }

    /// Unit-mass energy level with the same period.
    pub fn normalized_energy(&self) -> f64 {
        normalize_energy_unchecked(
            self.energy(),
            PotentialSpec {
                d: self.d,
                m: self.m,
            },
        )
    }

    /// `-V_eff'(r) = κ m r^{1-d} - r`, with the sign convention of the θ
    /// denominator reversed.
    fn force_factor(&self) -> f64 {
        -force_constant(self.d) * self.m * self.r.powf(1.0 - self.d.as_f64()) + self.r
    }

    /// `P₀ / (d m₀)`, the coefficient of `r` in `f`.
    pub fn k(&self) -> f64 {
        self.p / (self.d.as_f64() * self.m)
    }
}

/// `𝓔₀(r) = u₀²/2 + m₀ N(r) + r²/2` with exact node slopes.
pub fn energy_profile(data: &InitialData) -> RadialProfile {
    let d = data.d;
    let (values, slopes): (Vec<f64>, Vec<f64>) = (0..data.nodes().len())
        .map(|i| {
            let s = data.node_state(i);
            let n = newtonian_unchecked(s.r, d);
            let dn = newtonian_d1_unchecked(s.r, d);
            (s.energy(), s.u * s.w + s.p * n + s.m * dn + s.r)
        })
        .unzip();
    RadialProfile::with_slopes(data.nodes().to_vec(), values, slopes)
        .expect("energy profile inherits a valid grid")
}

/// The normalized level `C₀(r)`: `m₀^{-2/d} 𝓔₀` for `d >= 3`,
/// `𝓔₀/m₀ + ln(m₀)/(4π)` for `d = 2`.
pub fn c0_profile(data: &InitialData) -> Result<RadialProfile> {
    let d = data.d;
    let energy = energy_profile(data);
    let mut values = Vec::with_capacity(energy.len());
    let mut slopes = Vec::with_capacity(energy.len());
    for i in 0..energy.len() {
        let (e, de) = (energy.values()[i], energy.slopes()[i]);
        let (m, p) = (data.m0.values()[i], data.p0.values()[i]);
        if !(m > 0.0) {
            return Err(Error::Inconsistent(format!(
                "enclosed mass is not positive at r = {}",
                energy.nodes()[i]
            )));
        }
        values.push(normalize_energy_unchecked(e, PotentialSpec { d, m }));
        slopes.push(if d.is_planar() {
            de / m - e * p / (m * m) + p / (4.0 * std::f64::consts::PI * m)
        } else {
            let df = d.as_f64();
            m.powf(-2.0 / df) * (de - 2.0 / df * p / m * e)
        });
    }
    RadialProfile::with_slopes(data.nodes().to_vec(), values, slopes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThetaBranch {
    /// `(1 - P₀ r/(d m₀)) / u₀`.
    Velocity,
    /// `(P₀ u₀/d - m₀ ∂_r u₀) / (m₀ (r - κ m₀ r^{1-d}))`.
    Force,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaValue {
    pub theta: f64,
    pub branch: ThetaBranch,
    /// `|θ₁ - θ₂|` relative to `max(|θ₁|, |θ₂|, 1/u_scale)` when both
    /// branches are defined and the second is well conditioned.
    pub mismatch: Option<f64>,
}

/// θ of one characteristic. `u_scale` sets the threshold below which `u`
/// counts as zero (`BRANCH_EPS · u_scale`).
pub fn theta_of(state: &NodeState, u_scale: f64) -> Result<ThetaValue> {
    let d = state.d.as_f64();
    let first = (state.u.abs() > BRANCH_EPS * u_scale && state.u != 0.0)
        .then(|| (1.0 - state.p * state.r / (d * state.m)) / state.u);
    let factor = state.force_factor();
    let (a, b) = (state.p * state.u / d, state.m * state.w);
    let second = (factor.abs() > BRANCH_EPS * state.r).then(|| (a - b) / (state.m * factor));
    let kept = (a - b).abs() / (a.abs() + b.abs()).max(f64::MIN_POSITIVE);
    match (first, second) {
        (Some(t1), Some(t2)) => {
            let floor = if u_scale > 0.0 { 1.0 / u_scale } else { 0.0 };
            let denom = t1.abs().max(t2.abs()).max(floor);
            let conditioned =
                factor.abs() > AGREEMENT_CONDITIONING * state.r && kept > AGREEMENT_CONDITIONING;
            Ok(ThetaValue {
                theta: t1,
                branch: ThetaBranch::Velocity,
                mismatch: conditioned.then(|| {
                    if denom > 0.0 {
                        (t1 - t2).abs() / denom
                    } else {
                        0.0
                    }
                }),
            })
        }
        (Some(a), None) => Ok(ThetaValue {
            theta: a,
            branch: ThetaBranch::Velocity,
            mismatch: None,
        }),
        (None, Some(b)) => Ok(ThetaValue {
            theta: b,
            branch: ThetaBranch::Force,
            mismatch: None,
        }),
        (None, None) => Err(Error::Inconsistent(format!(
            "both theta denominators vanish at r = {} although the data are not stationary",
            state.r
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaProfile {
    pub profile: RadialProfile,
    pub branches: Vec<ThetaBranch>,
    pub max_branch_mismatch: f64,
}

fn stationary_band(c_min: f64) -> f64 {
    1e-8 * c_min.abs().max(1.0)
}

/// θ at every node. Rejects data whose mean level sits at `C_min`.
pub fn theta_profile(data: &InitialData) -> Result<ThetaProfile> {
    let c0 = c0_profile(data)?;
    let mean = c0.values().iter().sum::<f64>() / c0.len() as f64;
    let floor = c_min(data.d);
    if (mean - floor).abs() <= stationary_band(floor) {
        return Err(Error::Precondition(
            "theta is undefined for stationary data (C0 = C_min)".into(),
        ));
    }
    let u_scale = data.u0.max_abs();
    let mut values = Vec::with_capacity(c0.len());
    let mut branches = Vec::with_capacity(c0.len());
    let mut mismatch = 0.0f64;
    for i in 0..c0.len() {
        let t = theta_of(&data.node_state(i), u_scale)?;
        values.push(t.theta);
        branches.push(t.branch);
        if let Some(x) = t.mismatch {
            mismatch = mismatch.max(x);
        }
    }
    Ok(ThetaProfile {
        profile: RadialProfile::from_samples(data.nodes().to_vec(), values)?,
        branches,
        max_branch_mismatch: mismatch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelsetMin {
    pub value: f64,
    pub r_tilde: f64,
    pub u_tilde: f64,
}

/// Excess energy `𝓔 - e_min(m)` of a characteristic at normalized level
/// `c`, computed without subtracting two nearly equal energies.
pub(crate) fn excess_at_level(d: Dimension, m: f64, c: f64) -> f64 {
    let scale = if d.is_planar() {
        m
    } else {
        m.powf(2.0 / d.as_f64())
    };
    scale * (c - c_min(d))
}

/// `min { θ ũ + k r̃ }` over the level curve `ũ²/2 + V_eff(r̃; m) = e_min + e_s`.
pub(crate) fn levelset_min_core(
    d: Dimension,
    m: f64,
    e_s: f64,
    theta: f64,
    k: f64,
    samples: usize,
) -> Result<LevelsetMin> {
    let pot = EffectivePotential::new(PotentialSpec::with_dimension(d, m)?);
    let tp = turning_points_shifted(e_s, &pot)?;
    let speed = |x: f64| (2.0 * (e_s - pot.excess(x)).max(0.0)).sqrt();
    let g = |x: f64| -theta.abs() * speed(x) + k * x;
    let n = samples.max(3);
    let width = tp.width();
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            if i == n - 1 {
                tp.x2
            } else {
                tp.x1 + width * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let best = (0..n)
        .min_by(|&a, &b| g(xs[a]).total_cmp(&g(xs[b])))
        .expect("at least three samples");
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(n - 1)];
    let (mut x, mut value) = golden_section_min(g, lo, hi, 1e-13 * width.max(tp.x2));
    let at_sample = g(xs[best]);
    if at_sample < value {
        x = xs[best];
        value = at_sample;
    }
    Ok(LevelsetMin {
        value,
        r_tilde: x,
        u_tilde: -theta.signum() * speed(x),
    })
}

/// Minimum of `f = θ ũ + (P₀/(d m₀)) r̃` over the level curve of the
/// characteristic starting at `r`.
pub fn levelset_min_f(r: f64, data: &InitialData) -> Result<LevelsetMin> {
    let state = data.characteristic_at(r);
    levelset_min_for_state(&state, data.u0.max_abs(), LEVELSET_SAMPLES)
}

pub(crate) fn levelset_min_for_state(
    state: &NodeState,
    u_scale: f64,
    samples: usize,
) -> Result<LevelsetMin> {
    let c = state.normalized_energy();
    let floor = c_min(state.d);
    if c - floor <= stationary_band(floor) {
        return Err(Error::Precondition(format!(
            "characteristic at r = {} sits at the well minimum",
            state.r
        )));
    }
    let theta = theta_of(state, u_scale)?.theta;
    let e_s = excess_at_level(state.d, state.m, c);
    levelset_min_core(state.d, state.m, e_s, theta, state.k(), samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn mass_of_power_law_density() {
        let r = log_grid(1.0, 200);
        let p: Vec<f64> = r.iter().map(|x| 3.0 * x * x).collect();
        let s: Vec<f64> = r.iter().map(|x| 6.0 * x).collect();
        let p0 = RadialProfile::with_slopes(r.clone(), p, s).unwrap();
        let m0 = derive_mass(&p0, dim(3)).unwrap();
        for (x, m) in r.iter().zip(m0.values()) {
            assert!((m - x.powi(3)).abs() < 1e-8 * x.powi(3).max(1e-12));
        }
    }

    #[test]
    fn zero_tail_keeps_mass_constant() {
        let r: Vec<f64> = (1..=20).map(|i| 0.05 * i as f64).collect();
        let p: Vec<f64> = r
            .iter()
            .map(|&x| {
                if x <= 0.5 {
                    2.0 * x * (0.5 - x).powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        let p0 = RadialProfile::from_samples(r.clone(), p).unwrap();
        let m0 = derive_mass(&p0, dim(2)).unwrap();
        let tail: Vec<f64> = m0.values()[9..].to_vec();
        assert!(tail.iter().all(|&m| (m - tail[0]).abs() < 1e-15));
    }

    #[test]
    fn negative_density_is_rejected() {
        let r = vec![0.1, 0.2, 0.3];
        let err = InitialData::from_samples(dim(3), r, vec![1.0, -1.0, 1.0], vec![0.0; 3]);
        assert!(matches!(err, Err(Error::Inconsistent(_))));
    }

    #[test]
    fn velocity_must_vanish_at_origin() {
        let r = vec![0.1, 0.2, 0.3, 0.4];
        let err = InitialData::from_samples(dim(3), r, vec![0.03, 0.12, 0.27, 0.48], vec![1.0; 4]);
        assert!(matches!(err, Err(Error::Inconsistent(_))));
    }

    #[test]
    fn force_branch_used_when_velocity_vanishes() {
        let d = dim(3);
        // P r/(d m) = 1 and u = 0 at r = 1 with mass above the balance value.
        let state = NodeState {
            d,
            r: 1.0,
            p: 6.0,
            u: 0.0,
            w: 0.5,
            m: 2.0,
        };
        let t = theta_of(&state, 1.0).unwrap();
        assert_eq!(t.branch, ThetaBranch::Force);
        let factor = -force_constant(d) * 2.0 + 1.0;
        assert!((t.theta - (-1.0) / (2.0 * factor)).abs() < 1e-14);
    }

    #[test]
    fn theta_zero_gives_positive_linear_minimum() {
        let d = dim(3);
        let m = 1.0;
        let lm = levelset_min_core(d, m, 0.3, 0.0, 2.0, LEVELSET_SAMPLES).unwrap();
        let pot = EffectivePotential::new(PotentialSpec::with_dimension(d, m).unwrap());
        let tp = turning_points_shifted(0.3, &pot).unwrap();
        assert!((lm.value - 2.0 * tp.x1).abs() < 1e-12);
    }
}
