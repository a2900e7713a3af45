//! Single characteristics: the orbit `(r, u)`, the coupled `(P, w)`
//! dynamics, the closed-form `f(t)`, return-map periods and crossings.

use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::initial_data::NodeState;
use crate::numerics::ode::{yoshida4_step, DormandPrince, OdeSystem, Step, Tolerances};
use crate::numerics::roots::brent;
use crate::potential::{
    force_constant, tau_d, Dimension, EffectivePotential, Potential, PotentialSpec,
};

pub const DEFAULT_TOL: f64 = 1e-12;

/// `P` or `|w|` above this ends a `(P, w)` integration as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Radial force `κ m r^{1-d} - r` on a characteristic of mass `m`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Force {
    km: f64,
    one_minus_d: f64,
}

impl Force {
    pub(crate) fn new(d: Dimension, m: f64) -> Self {
        Self {
            km: force_constant(d) * m,
            one_minus_d: 1.0 - d.as_f64(),
        }
    }

    #[inline]
    pub(crate) fn at(&self, r: f64) -> f64 {
        self.km * r.powf(self.one_minus_d) - r
    }
}

/// Orbit coordinates `ξ = (r - r*)/a`, `v = u/a` with `a` the velocity
/// scale of the orbit, so the integrator tolerance is relative to the
/// oscillation amplitude rather than to `r*`.
#[derive(Debug, Clone, Copy)]
struct Frame {
    center: f64,
    scale: f64,
}

impl Frame {
    fn for_state(state: &CharacteristicState) -> Self {
        let pot = EffectivePotential::new(state.spec());
        let excess = 0.5 * state.u * state.u + pot.excess(state.r);
        let center = pot.r_star();
        Self {
            center,
            scale: (2.0 * excess).sqrt().max(1e-8 * center),
        }
    }

    fn inner(&self, r: f64, u: f64) -> [f64; 2] {
        [(r - self.center) / self.scale, u / self.scale]
    }

    fn r(&self, xi: f64) -> f64 {
        self.center + self.scale * xi
    }

    fn u(&self, v: f64) -> f64 {
        self.scale * v
    }
}

struct OrbitSystem {
    force: Force,
    frame: Frame,
}

impl OdeSystem<2> for OrbitSystem {
    fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], self.force.at(self.frame.r(y[0])) / self.frame.scale]
    }
}

/// `(r, u, P, w)` with `P' = -P w`, `w' = -w² - m N''(r) - N'(r) P - 1`.
struct PwSystem {
    force: Force,
    frame: Frame,
    kappa: f64,
    m: f64,
    d: f64,
}

impl OdeSystem<4> for PwSystem {
    fn rhs(&self, _t: f64, y: &[f64; 4]) -> [f64; 4] {
        let [xi, v, p, w] = *y;
        let r = self.frame.r(xi);
        let r1 = r.powf(1.0 - self.d);
        let n2 = self.kappa * (self.d - 1.0) * r1 / r;
        [
            v,
            self.force.at(r) / self.frame.scale,
            -p * w,
            -w * w - self.m * n2 + self.kappa * r1 * p - 1.0,
        ]
    }
}

/// State of one characteristic with frozen enclosed mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicState {
    pub d: Dimension,
    pub m: f64,
    pub t: f64,
    pub r: f64,
    pub u: f64,
    pub p: f64,
    pub w: f64,
}

impl CharacteristicState {
    /// Orbit-only state (`P = w = 0`).
    pub fn orbit(d: Dimension, m: f64, r: f64, u: f64) -> Result<Self> {
        PotentialSpec::with_dimension(d, m)?;
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "characteristic radius must be positive, got {r}"
            )));
        }
        Ok(Self {
            d,
            m,
            t: 0.0,
            r,
            u,
            p: 0.0,
            w: 0.0,
        })
    }

    pub fn from_node(node: &NodeState) -> Self {
        Self {
            d: node.d,
            m: node.m,
            t: 0.0,
            r: node.r,
            u: node.u,
            p: node.p,
            w: node.w,
        }
    }

    pub fn spec(&self) -> PotentialSpec {
        PotentialSpec {
            d: self.d,
            m: self.m,
        }
    }

    pub fn energy(&self) -> f64 {
        EffectivePotential::new(self.spec()).energy(self.r, self.u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Orbit,
    Pw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub u: f64,
    /// `NaN` for orbit-only integrations.
    pub p: f64,
    pub w: f64,
}

/// Accepted steps of one integration. Between samples the solution is
/// recovered by re-stepping from the earlier sample.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub d: Dimension,
    pub m: f64,
    pub mode: Mode,
    pub tol: f64,
    pub samples: Vec<Sample>,
    /// Time at which `P` or `|w|` reached [`BLOWUP_THRESHOLD`].
    pub blowup_time: Option<f64>,
    /// `max_t |𝓔(t) - 𝓔(0)| / (𝓔(0) - e_min)` over the accepted steps.
    pub energy_drift: f64,
    #[serde(skip)]
    frame: Frame,
}

fn solver(d: Dimension, tol: f64) -> DormandPrince {
    DormandPrince::new(Tolerances::uniform(tol)).with_max_step(tau_d(d) / 8.0)
}

fn initial_step(d: Dimension) -> f64 {
    tau_d(d) * 1e-3
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    fn bracket(&self, t: f64) -> Result<usize> {
        let first = self.samples[0].t;
        if t < first || t > self.t_end() {
            return Err(Error::Domain(format!(
                "time {t} outside the integrated range [{first}, {}]",
                self.t_end()
            )));
        }
        let k = self.samples.partition_point(|s| s.t <= t);
        Ok(k.clamp(1, self.samples.len()) - 1)
    }

    /// State at time `t` inside the integrated range.
    pub fn state_at(&self, t: f64) -> Result<Sample> {
        let i = self.bracket(t)?;
        let s = self.samples[i];
        let dt = t - s.t;
        let dp = solver(self.d, self.tol);
        let fr = self.frame;
        let [xi, v] = fr.inner(s.r, s.u);
        Ok(match self.mode {
            Mode::Orbit => {
                let y = dp.substep(&orbit_system(self.d, self.m, fr), s.t, &[xi, v], dt);
                Sample {
                    t,
                    r: fr.r(y[0]),
                    u: fr.u(y[1]),
                    p: f64::NAN,
                    w: f64::NAN,
                }
            }
            Mode::Pw => {
                let y = dp.substep(&pw_system(self.d, self.m, fr), s.t, &[xi, v, s.p, s.w], dt);
                Sample {
                    t,
                    r: fr.r(y[0]),
                    u: fr.u(y[1]),
                    p: y[2],
                    w: y[3],
                }
            }
        })
    }
}

fn orbit_system(d: Dimension, m: f64, frame: Frame) -> OrbitSystem {
    OrbitSystem {
        force: Force::new(d, m),
        frame,
    }
}

fn pw_system(d: Dimension, m: f64, frame: Frame) -> PwSystem {
    PwSystem {
        force: Force::new(d, m),
        frame,
        kappa: force_constant(d),
        m,
        d: d.as_f64(),
    }
}

/// Tracks `|𝓔 - 𝓔(0)| / (𝓔(0) - e_min)`, computed from the excess over
/// `e_min` to avoid cancellation against `e_min`.
struct DriftMonitor {
    pot: EffectivePotential,
    excess0: f64,
    worst: f64,
}

impl DriftMonitor {
    fn new(state: &CharacteristicState) -> Self {
        let pot = EffectivePotential::new(state.spec());
        let excess0 = 0.5 * state.u * state.u + pot.excess(state.r);
        Self {
            pot,
            excess0,
            worst: 0.0,
        }
    }

    fn observe(&mut self, r: f64, u: f64) {
        let excess = 0.5 * u * u + self.pot.excess(r);
        let drift = (excess - self.excess0).abs() / self.excess0.max(f64::MIN_POSITIVE);
        self.worst = self.worst.max(drift);
    }
}

/// Integrate `r' = u`, `u' = -m ∂_r N(r) - r` from `state0` over
/// `[state0.t, t_end]`.
pub fn integrate_orbit(state0: &CharacteristicState, t_end: f64, tol: f64) -> Result<Trajectory> {
    check_start(state0, t_end)?;
    let frame = Frame::for_state(state0);
    let sys = orbit_system(state0.d, state0.m, frame);
    let mut samples = vec![Sample {
        t: state0.t,
        r: state0.r,
        u: state0.u,
        p: f64::NAN,
        w: f64::NAN,
    }];
    let mut drift = DriftMonitor::new(state0);
    let mut collapse = None;
    solver(state0.d, tol).run(
        &sys,
        state0.t,
        frame.inner(state0.r, state0.u),
        t_end,
        initial_step(state0.d),
        |step: &Step<2>| {
            let (r, u) = (frame.r(step.y1[0]), frame.u(step.y1[1]));
            if !(r > 0.0) {
                collapse = Some(step.t1);
                return ControlFlow::Break(());
            }
            drift.observe(r, u);
            samples.push(Sample {
                t: step.t1,
                r,
                u,
                p: f64::NAN,
                w: f64::NAN,
            });
            ControlFlow::Continue(())
        },
    )?;
    if let Some(t) = collapse {
        return Err(Error::Integrator {
            t,
            reason: "characteristic reached r = 0".into(),
        });
    }
    Ok(Trajectory {
        d: state0.d,
        m: state0.m,
        mode: Mode::Orbit,
        tol,
        samples,
        blowup_time: None,
        energy_drift: drift.worst,
        frame,
    })
}

fn check_start(state0: &CharacteristicState, t_end: f64) -> Result<()> {
    if !(state0.r > 0.0) {
        return Err(Error::Domain(format!(
            "start radius must be positive, got {}",
            state0.r
        )));
    }
    if !(t_end >= state0.t) {
        return Err(Error::Domain(format!(
            "end time {t_end} precedes the start time {}",
            state0.t
        )));
    }
    Ok(())
}

/// Integrate the coupled `(r, u, P, w)` system, stopping at blow-up.
pub fn integrate_pw(state0: &CharacteristicState, t_end: f64, tol: f64) -> Result<Trajectory> {
    check_start(state0, t_end)?;
    if state0.p < 0.0 {
        return Err(Error::Domain(format!(
            "initial P must be non-negative, got {}",
            state0.p
        )));
    }
    let frame = Frame::for_state(state0);
    let sys = pw_system(state0.d, state0.m, frame);
    let dp = solver(state0.d, tol);
    let physical = |t: f64, y: &[f64; 4]| Sample {
        t,
        r: frame.r(y[0]),
        u: frame.u(y[1]),
        p: y[2],
        w: y[3],
    };
    let mut samples = vec![Sample {
        t: state0.t,
        r: state0.r,
        u: state0.u,
        p: state0.p,
        w: state0.w,
    }];
    let mut drift = DriftMonitor::new(state0);
    let size = |y: &[f64; 4]| y[2].abs().max(y[3].abs());
    let mut blowup: Option<Step<4>> = None;
    let mut collapse = None;
    let [xi0, v0] = frame.inner(state0.r, state0.u);
    let run = dp.run(
        &sys,
        state0.t,
        [xi0, v0, state0.p, state0.w],
        t_end,
        initial_step(state0.d),
        |step: &Step<4>| {
            let s = physical(step.t1, &step.y1);
            if !(s.r > 0.0) {
                collapse = Some(step.t1);
                return ControlFlow::Break(());
            }
            if size(&step.y1) >= BLOWUP_THRESHOLD {
                blowup = Some(*step);
                return ControlFlow::Break(());
            }
            drift.observe(s.r, s.u);
            samples.push(s);
            ControlFlow::Continue(())
        },
    );
    if let Err(e) = run {
        let last = samples.last().expect("initial sample");
        return Err(match e {
            Error::Integrator { t, reason } if last.p.abs().max(last.w.abs()) > 1e6 => Error::Integrator {
                t,
                reason: format!("{reason}; P or w overflowed before reaching the blow-up threshold (tighten tol)"),
            },
            other => other,
        });
    }
    if let Some(t) = collapse {
        return Err(Error::Integrator {
            t,
            reason: "characteristic reached r = 0".into(),
        });
    }
    let mut blowup_time = None;
    if let Some(step) = blowup {
        let t_tol = 1e-14 * step.t1.abs().max(1.0);
        let (t, y) = dp.locate_in_step(&sys, &step, |y| size(y) - BLOWUP_THRESHOLD, t_tol)?;
        samples.push(physical(t, &y));
        blowup_time = Some(t);
    }
    Ok(Trajectory {
        d: state0.d,
        m: state0.m,
        mode: Mode::Pw,
        tol,
        samples,
        blowup_time,
        energy_drift: drift.worst,
        frame,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FSample {
    pub t: f64,
    pub f: f64,
    /// Analytic `f' = θ u' + k u`.
    pub df: f64,
}

/// `f(t) = θ u(t) + k r(t)` and `f'(t)` on the trajectory samples, with
/// `k = P(0)/(d m)`. Rejects inputs with `|f(0) - 1| > 1e-6`.
pub fn f_closed_form(traj: &Trajectory, theta: f64, k: f64) -> Result<Vec<FSample>> {
    if !theta.is_finite() {
        return Err(Error::Domain("theta must be finite".into()));
    }
    let force = Force::new(traj.d, traj.m);
    let out: Vec<FSample> = traj
        .samples
        .iter()
        .map(|s| FSample {
            t: s.t,
            f: theta * s.u + k * s.r,
            df: theta * force.at(s.r) + k * s.u,
        })
        .collect();
    let f0 = out.first().map_or(f64::NAN, |s| s.f);
    if !((f0 - 1.0).abs() <= 1e-6) {
        return Err(Error::Inconsistent(format!(
            "f(0) = {f0} differs from 1: theta and P(0) do not satisfy the level identity"
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FMinimum {
    pub t: f64,
    pub f: f64,
}

/// Minimum of `f = θ u + k r` along the orbit from `state0` over
/// `[t0, t0 + duration]`, with interior minima refined at roots of `f'`.
pub fn min_f_along_orbit(
    state0: &CharacteristicState,
    theta: f64,
    k: f64,
    duration: f64,
    tol: f64,
) -> Result<FMinimum> {
    let frame = Frame::for_state(state0);
    let sys = orbit_system(state0.d, state0.m, frame);
    let force = sys.force;
    let df = |y: &[f64; 2]| {
        let r = frame.r(y[0]);
        theta * force.at(r) + k * frame.u(y[1])
    };
    let fv = |y: &[f64; 2]| theta * frame.u(y[1]) + k * frame.r(y[0]);
    let dp = solver(state0.d, tol);
    let y0 = frame.inner(state0.r, state0.u);
    let mut best = FMinimum {
        t: state0.t,
        f: state0.u * theta + k * state0.r,
    };
    let mut failure = None;
    let out = dp.run(
        &sys,
        state0.t,
        y0,
        state0.t + duration,
        initial_step(state0.d),
        |step: &Step<2>| {
            let (a, b) = (df(&step.y0), df(&step.y1));
            if a < 0.0 && b >= 0.0 {
                match dp.locate_in_step(&sys, step, df, 1e-15 * step.t1.abs().max(1.0)) {
                    Ok((t, y)) => {
                        if fv(&y) < best.f {
                            best = FMinimum { t, f: fv(&y) };
                        }
                    }
                    Err(e) => {
                        failure = Some(e);
                        return ControlFlow::Break(());
                    }
                }
            }
            ControlFlow::Continue(())
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let end = fv(&out.y);
    if end < best.f {
        best = FMinimum { t: out.t, f: end };
    }
    Ok(best)
}

/// Time between the first two downward crossings of `u = 0` with
/// `r > r*` (successive visits to the outer turning point).
pub fn measured_period(state0: &CharacteristicState, tol: f64) -> Result<f64> {
    let pot = EffectivePotential::new(state0.spec());
    let excess = 0.5 * state0.u * state0.u + pot.excess(state0.r);
    if excess <= crate::period::DEGENERATE_ENERGY {
        return Err(Error::DegenerateOrbit {
            energy: pot.energy(state0.r, state0.u),
            e_min: pot.e_min(),
        });
    }
    let frame = Frame::for_state(state0);
    let sys = orbit_system(state0.d, state0.m, frame);
    let dp = solver(state0.d, tol);
    let window = 10.0 * tau_d(state0.d);
    let mut crossings: Vec<f64> = Vec::new();
    let mut failure = None;
    dp.run(
        &sys,
        state0.t,
        frame.inner(state0.r, state0.u),
        state0.t + 2.0 * window,
        initial_step(state0.d),
        |step: &Step<2>| {
            if step.y0[1] > 0.0 && step.y1[1] <= 0.0 && step.y1[0] > 0.0 {
                match dp.locate_in_step(&sys, step, |y| y[1], 1e-15 * step.t1.abs().max(1.0)) {
                    Ok((t, _)) => crossings.push(t),
                    Err(e) => {
                        failure = Some(e);
                        return ControlFlow::Break(());
                    }
                }
                if crossings.len() == 2 {
                    return ControlFlow::Break(());
                }
            }
            if crossings.is_empty() && step.t1 - state0.t > window {
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    match crossings.as_slice() {
        [a, b] if b - a <= window => Ok(b - a),
        _ => Err(Error::Integrator {
            t: state0.t + window,
            reason: "no return to the outer turning point within 10 tau_d".into(),
        }),
    }
}

/// First time at which the two characteristics reach the same radius,
/// found by sampling every `τ_d/200` and bisecting the sign change of
/// `r_A - r_B`. `None` means no crossing up to `t_max`, which is
/// inconclusive rather than a proof that none occurs.
pub fn first_crossing(
    a: &CharacteristicState,
    b: &CharacteristicState,
    t_max: f64,
    tol: f64,
) -> Result<Option<f64>> {
    if a.d != b.d {
        return Err(Error::Domain(
            "characteristics live in different dimensions".into(),
        ));
    }
    if a.r == b.r {
        return Ok(Some(0.0));
    }
    let ta = integrate_orbit(a, t_max, tol)?;
    let tb = integrate_orbit(b, t_max, tol)?;
    let gap = |t: f64| -> Result<f64> { Ok(ta.state_at(t)?.r - tb.state_at(t)?.r) };
    let dt = tau_d(a.d) / 200.0;
    let sign0 = (a.r - b.r).signum();
    let mut t_prev = 0.0;
    let mut k = 1;
    loop {
        let t = (k as f64 * dt).min(t_max);
        let g = gap(t)?;
        if g * sign0 <= 0.0 {
            if g == 0.0 {
                return Ok(Some(t));
            }
            let mut err = None;
            let root = brent(
                |s| match gap(s) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                t_prev,
                t,
                1e-14,
                1e-14,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            return Ok(Some(root));
        }
        if t >= t_max {
            return Ok(None);
        }
        t_prev = t;
        k += 1;
    }
}

/// Period from a fixed-step 4th-order symplectic integration started at
/// the outer turning point; independent of the adaptive integrator and of
/// the quadrature.
pub fn symplectic_period(spec: PotentialSpec, energy: f64, steps_per_tau: usize) -> Result<f64> {
    let pot = EffectivePotential::new(spec);
    let tp = crate::period::turning_points(energy, &pot)?;
    let force = Force::new(spec.d, spec.m);
    let f = |r: f64| force.at(r);
    let dt = tau_d(spec.d) / steps_per_tau.max(16) as f64;
    let (mut q, mut p) = (tp.x2, 0.0);
    let mut t = 0.0;
    let limit = 10.0 * tau_d(spec.d);
    let mut left_outer = false;
    while t < limit {
        let (q1, p1) = yoshida4_step(q, p, dt, &f);
        if p < 0.0 && q < pot.r_star() {
            left_outer = true;
        }
        if left_outer && p > 0.0 && p1 <= 0.0 {
            let s = brent(|s| yoshida4_step(q, p, s, &f).1, 0.0, dt, 1e-15, 1e-16)?;
            return Ok(t + s);
        }
        q = q1;
        p = p1;
        t += dt;
    }
    Err(Error::Integrator {
        t,
        reason: "symplectic orbit did not return within 10 tau_d".into(),
    })
}

/// Energy excursion `max |𝓔 - 𝓔(0)| / (𝓔(0) - e_min)` of the symplectic
/// scheme over `periods` small-oscillation periods.
pub fn symplectic_energy_drift(
    state0: &CharacteristicState,
    periods: f64,
    steps_per_tau: usize,
) -> f64 {
    let pot = EffectivePotential::new(state0.spec());
    let force = Force::new(state0.d, state0.m);
    let f = |r: f64| force.at(r);
    let dt = tau_d(state0.d) / steps_per_tau.max(16) as f64;
    let n = (periods * steps_per_tau as f64).ceil() as usize;
    let mut drift = DriftMonitor::new(state0);
    let (mut q, mut p) = (state0.r, state0.u);
    for _ in 0..n {
        (q, p) = yoshida4_step(q, p, dt, &f);
        drift.observe(q, p);
    }
    let _ = pot;
    drift.worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let spec = PotentialSpec::new(3, 2.0).unwrap();
        let r_star = EffectivePotential::new(spec).r_star();
        let s = CharacteristicState::orbit(spec.d, spec.m, r_star, 0.0).unwrap();
        let tr = integrate_orbit(&s, 100.0, DEFAULT_TOL).unwrap();
        for smp in &tr.samples {
            assert!(
                (smp.r - r_star).abs() < 1e-12 && smp.u.abs() < 1e-12,
                "{smp:?} vs {r_star}"
            );
        }
    }

    #[test]
    fn d4_period_is_pi() {
        for &m in &[0.5, 1.0, 3.0] {
            let pot = EffectivePotential::new(PotentialSpec::new(4, m).unwrap());
            let s = CharacteristicState::orbit(dim(4), m, 1.7 * pot.r_star(), 0.1).unwrap();
            let t = measured_period(&s, 1e-12).unwrap();
            assert!((t - PI).abs() < 1e-8, "m = {m}: {t}");
        }
    }

    #[test]
    fn symplectic_period_matches_tau_near_minimum() {
        let spec = PotentialSpec::new(4, 1.0).unwrap();
        let e = crate::potential::e_min(spec) + 0.5;
        let t = symplectic_period(spec, e, 4000).unwrap();
        assert!((t - PI).abs() < 1e-9, "{t}");
    }

    #[test]
    fn identical_states_cross_at_zero() {
        let s = CharacteristicState::orbit(dim(3), 1.0, 0.5, 0.2).unwrap();
        assert_eq!(
            first_crossing(&s, &s, 10.0, DEFAULT_TOL).unwrap(),
            Some(0.0)
        );
    }

    #[test]
    fn f_closed_form_rejects_bad_normalization() {
        let s = CharacteristicState::orbit(dim(3), 1.0, 0.5, 0.2).unwrap();
        let tr = integrate_orbit(&s, 1.0, DEFAULT_TOL).unwrap();
        assert!(matches!(
            f_closed_form(&tr, 1.0, 1.0),
            Err(Error::Inconsistent(_))
        ));
        assert!(f_closed_form(&tr, 0.0, 2.0).is_ok());
    }

    #[test]
    fn state_at_interpolates_between_steps() {
        let s = CharacteristicState::orbit(dim(4), 1.0, 0.9, 0.0).unwrap();
        let tr = integrate_orbit(&s, PI, 1e-12).unwrap();
        let back = tr.state_at(PI).unwrap();
        assert!((back.r - 0.9).abs() < 1e-9 && back.u.abs() < 1e-9);
        assert!(tr.state_at(PI + 1.0).is_err());
    }
}
