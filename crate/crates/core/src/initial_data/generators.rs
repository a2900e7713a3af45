use serde::Serialize;

use super::InitialData;
use crate::error::{Error, Result};
use crate::period::period_at_level;
use crate::potential::{
    c_min, denormalize_energy, force_constant, newtonian_d1_unchecked, newtonian_unchecked,
    Dimension, PotentialSpec,
};
use crate::profile::RadialProfile;

pub const DEFAULT_GRID_NODES: usize = 512;

/// `n` nodes log-spaced from `R₀/10⁴` to `R₀`.
pub fn log_grid(r0: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                r0
            } else {
                r0 * 10f64.powf(-4.0 * (1.0 - i as f64 / (n - 1) as f64))
            }
        })
        .collect()
}

/// Force-balanced data: `m₀ = r^d/κ`, `u₀ = 0`.
pub fn make_stationary(d: Dimension, r0: f64, nodes: usize) -> Result<InitialData> {
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!(
            "support radius must be positive, got {r0}"
        )));
    }
    let kappa = force_constant(d);
    let df = d.as_f64();
    let r = log_grid(r0, nodes);
    let p: Vec<f64> = r.iter().map(|x| df * x.powf(df - 1.0) / kappa).collect();
    let dp: Vec<f64> = r
        .iter()
        .map(|x| df * (df - 1.0) * x.powf(df - 2.0) / kappa)
        .collect();
    let zeros = vec![0.0; r.len()];
    InitialData::new(
        d,
        RadialProfile::with_slopes(r.clone(), p, dp)?,
        RadialProfile::with_slopes(r, zeros.clone(), zeros)?,
    )
}

/// Mass family `m₀(r) = A r^d (1 + B r²)` on `(0, R₀]`, with velocity sign
/// `sign` (`±1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassShape {
    pub a: f64,
    pub b: f64,
    pub support_radius: f64,
    pub nodes: usize,
    pub sign: f64,
}

impl MassShape {
    /// Shape whose relative position `x = r / r*(m₀(r))` in the well runs
    /// from `x_inner` at the origin to `x_outer` at `R₀`.
    pub fn from_positions(d: Dimension, x_inner: f64, x_outer: f64, support_radius: f64) -> Self {
        let df = d.as_f64();
        let a = x_inner.powf(-df) / force_constant(d);
        let b = ((x_inner / x_outer).powf(df) - 1.0) / (support_radius * support_radius);
        Self {
            a,
            b,
            support_radius,
            nodes: DEFAULT_GRID_NODES,
            sign: 1.0,
        }
    }
}

/// Data on the level `C₀` with mass shape `shape`: `u₀` solves
/// `m₀^{-2/d}(u₀²/2 + m₀N + r²/2) = C₀` (resp. the `d = 2` form).
pub fn make_compliant(d: Dimension, c0: f64, shape: &MassShape) -> Result<InitialData> {
    let floor = c_min(d);
    if c0 < floor {
        return Err(Error::Domain(format!("C0 = {c0} is below C_min = {floor}")));
    }
    if !(shape.support_radius > 0.0) || !(shape.a > 0.0) {
        return Err(Error::Domain("mass shape needs A > 0 and R0 > 0".into()));
    }
    let df = d.as_f64();
    let r = log_grid(shape.support_radius, shape.nodes);
    let mut p = Vec::with_capacity(r.len());
    let mut dp = Vec::with_capacity(r.len());
    let mut u = Vec::with_capacity(r.len());
    let mut du = Vec::with_capacity(r.len());
    for &x in &r {
        let (a, b) = (shape.a, shape.b);
        let m = a * x.powf(df) * (1.0 + b * x * x);
        let pv = a * x.powf(df - 1.0) * (df + (df + 2.0) * b * x * x);
        if !(m > 0.0) || pv < 0.0 {
            return Err(Error::Construction {
                radius: x,
                reason: "mass shape is not positive and non-decreasing".into(),
            });
        }
        let e_target = denormalize_energy(c0, PotentialSpec { d, m });
        let de_dm = if d.is_planar() {
            c0 - m.ln() / (4.0 * std::f64::consts::PI) - 1.0 / (4.0 * std::f64::consts::PI)
        } else {
            2.0 / df * m.powf(2.0 / df - 1.0) * c0
        };
        let n = newtonian_unchecked(x, d);
        let dn = newtonian_d1_unchecked(x, d);
        let radicand = 2.0 * (e_target - m * n - 0.5 * x * x);
        let d_radicand = 2.0 * (de_dm * pv - pv * n - m * dn - x);
        if radicand < 0.0 {
            return Err(Error::Construction {
                radius: x,
                reason: format!("negative kinetic energy {radicand:.3e} on the requested level"),
            });
        }
        let root = radicand.sqrt();
        p.push(pv);
        dp.push(
            a * ((df - 1.0) * df * x.powf(df - 2.0) + (df + 2.0) * (df + 1.0) * b * x.powf(df)),
        );
        u.push(shape.sign * root);
        du.push(if root > 0.0 {
            shape.sign * d_radicand / (2.0 * root)
        } else {
            0.0
        });
    }
    InitialData::new(
        d,
        RadialProfile::with_slopes(r.clone(), p, dp)?,
        RadialProfile::with_slopes(r, u, du)?,
    )
}

/// Adds `-a r exp(-((r - c)/s)²)` to `u₀`; the steep inner flank of the
/// bump makes inner shells overtake outer ones and moves `C₀` off its
/// constant value.
fn with_velocity_bump(data: &InitialData, a: f64, c: f64, s: f64) -> Result<InitialData> {
    let r = data.nodes().to_vec();
    let r0 = data.support_radius();
    let (c, s) = (c * r0, s * r0);
    let bump = |x: f64| (-((x - c) / s).powi(2)).exp();
    let u = r
        .iter()
        .zip(data.u0().values())
        .map(|(&x, &u)| u - a * x * bump(x))
        .collect();
    let du = r
        .iter()
        .zip(data.u0().slopes())
        .map(|(&x, &du)| du - a * bump(x) * (1.0 - 2.0 * x * (x - c) / (s * s)))
        .collect();
    InitialData::new(
        data.dimension(),
        data.p0().clone(),
        RadialProfile::with_slopes(r, u, du)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FixtureKind {
    Stationary,
    CompliantGlobal,
    ConditionOneViolated,
    ConditionTwoViolated,
}

impl FixtureKind {
    pub fn slug(self) -> &'static str {
        match self {
            FixtureKind::Stationary => "stationary",
            FixtureKind::CompliantGlobal => "compliant",
            FixtureKind::ConditionOneViolated => "cond1-violated",
            FixtureKind::ConditionTwoViolated => "cond2-violated",
        }
    }

    pub fn expects_global(self) -> bool {
        matches!(self, FixtureKind::Stationary | FixtureKind::CompliantGlobal)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fixture {
    pub kind: FixtureKind,
    pub d: u32,
    /// The level the data were built on (`C_min` for stationary data).
    pub c0: f64,
    pub data: InitialData,
}

/// Normalized excess level of the fixtures: `C₀ - C_min = ε κ^{2/d}`
/// (`ε κ` in the plane), so every dimension sees the same well depth in
/// units of `r*²`.
const FIXTURE_EPS: f64 = 0.5;
const GLOBAL_X_OUTER: f64 = 0.97;
/// Velocity bump `-a r exp(-((r - c)/s)²)` of the condition-1 fixture,
/// with `a` in units of `1/T₀` and `c`, `s` in units of `R₀`.
const COND1_BUMP: (f64, f64, f64) = (3.0, 0.6, 0.1);

fn fixture_level(d: Dimension) -> f64 {
    let kappa = force_constant(d);
    let scale = if d.is_planar() {
        kappa
    } else {
        kappa.powf(2.0 / d.as_f64())
    };
    c_min(d) + FIXTURE_EPS * scale
}

/// The stationary, compliant-global, condition-1 and condition-2 fixtures
/// for dimension `d` on `R₀ = 1`.
pub fn fixture_suite(d: Dimension) -> Result<Vec<Fixture>> {
    let c0 = fixture_level(d);
    let global = make_compliant(
        d,
        c0,
        &MassShape::from_positions(d, 1.0, GLOBAL_X_OUTER, 1.0),
    )?;
    let (a, c, s) = COND1_BUMP;
    let cond1 = with_velocity_bump(&global, a / period_at_level(d, c0)?, c, s)?;
    // Mass grows faster than r^d: the outer shells sit beyond their
    // equilibrium radius with a thin density edge, so f turns negative.
    let x_outer = GLOBAL_X_OUTER * (0.5 * (d.as_f64() + 2.0)).powf(1.0 / d.as_f64());
    let cond2 = make_compliant(d, c0, &MassShape::from_positions(d, 1.0, x_outer, 1.0))?;
    Ok(vec![
        Fixture {
            kind: FixtureKind::Stationary,
            d: d.get(),
            c0: c_min(d),
            data: make_stationary(d, 1.0, DEFAULT_GRID_NODES)?,
        },
        Fixture {
            kind: FixtureKind::CompliantGlobal,
            d: d.get(),
            c0,
            data: global,
        },
        Fixture {
            kind: FixtureKind::ConditionOneViolated,
            d: d.get(),
            c0,
            data: cond1,
        },
        Fixture {
            kind: FixtureKind::ConditionTwoViolated,
            d: d.get(),
            c0,
            data: cond2,
        },
    ])
}
