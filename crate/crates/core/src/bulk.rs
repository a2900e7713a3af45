//! Lagrangian evolution of the radial bulk. Every label `r_j` carries its
//! characteristic `(Φ, u)` and the tangent pair `(J, K) = (∂_rΦ, ∂_r u)`,
//! so that `P = P₀/J` and `∂_r u = K/J` along the label.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::initial_data::{log_grid, InitialData};
use crate::numerics::ode::{DormandPrince, OdeSystem, Step, Tolerances};
use crate::numerics::quadrature::gauss7;
use crate::numerics::roots::brent;
use crate::potential::{force_constant, sphere_area, tau_d, Dimension};
use crate::profile::RadialProfile;

pub const DEFAULT_LABELS: usize = 256;
pub const DEFAULT_BULK_TOL: f64 = 1e-10;

/// `J` at which the last snapshot before a compression breakdown is taken.
pub const J_SNAPSHOT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BulkOptions {
    pub labels: usize,
    pub tol: f64,
}

impl Default for BulkOptions {
    fn default() -> Self {
        Self {
            labels: DEFAULT_LABELS,
            tol: DEFAULT_BULK_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelState {
    pub phi: f64,
    pub u: f64,
    pub j: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Breakdown {
    /// `∂_rΦ` vanished on `label`: the density blows up there.
    Compression { t: f64, label: usize, radius: f64 },
    /// Labels `label` and `label + 1` reached the same radius.
    Crossing { t: f64, label: usize },
}

impl Breakdown {
    pub fn time(&self) -> f64 {
        match *self {
            Breakdown::Compression { t, .. } | Breakdown::Crossing { t, .. } => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BulkStatus {
    Classical,
    ClassicalBreakdown(Breakdown),
}

/// `y = (Φ/r_j, u/r_j, J, K)` for one label.
struct LabelSystem {
    scale: f64,
    km: f64,
    kp: f64,
    d: f64,
}

impl LabelSystem {
    fn new(d: Dimension, r: f64, m: f64, p0: f64) -> Self {
        let kappa = force_constant(d);
        Self {
            scale: r,
            km: kappa * m,
            kp: kappa * p0,
            d: d.as_f64(),
        }
    }

    fn pack(&self, s: &LabelState) -> [f64; 4] {
        [s.phi / self.scale, s.u / self.scale, s.j, s.k]
    }

    fn unpack(&self, y: &[f64; 4]) -> LabelState {
        LabelState {
            phi: y[0] * self.scale,
            u: y[1] * self.scale,
            j: y[2],
            k: y[3],
        }
    }
}

impl OdeSystem<4> for LabelSystem {
    fn rhs(&self, _t: f64, y: &[f64; 4]) -> [f64; 4] {
        let phi = y[0] * self.scale;
        let p1 = phi.powf(1.0 - self.d);
        let force = self.km * p1 - phi;
        let n2 = (self.d - 1.0) * p1 / phi;
        [
            y[1],
            force / self.scale,
            y[3],
            self.kp * p1 - self.km * n2 * y[2] - y[2],
        ]
    }
}

struct LabelRun {
    states: Vec<LabelState>,
    /// `(t, state)` where `J` fell to [`J_SNAPSHOT`], and the later time
    /// at which `J` reached zero, if it did within one `τ_d`.
    compression: Option<(f64, LabelState, Option<f64>)>,
}

fn solver(d: Dimension, tol: f64) -> DormandPrince {
    DormandPrince::new(Tolerances::uniform(tol)).with_max_step(tau_d(d) / 8.0)
}

fn advance(
    dp: &DormandPrince,
    sys: &LabelSystem,
    t0: f64,
    s: &LabelState,
    t1: f64,
    h: f64,
) -> Result<LabelState> {
    let out = dp.run(sys, t0, sys.pack(s), t1, h, |_| ControlFlow::Continue(()))?;
    Ok(sys.unpack(&out.y))
}

fn run_label(
    dp: &DormandPrince,
    sys: &LabelSystem,
    init: LabelState,
    times: &[f64],
    h0: f64,
) -> Result<LabelRun> {
    let mut states = vec![init];
    let mut y = sys.pack(&init);
    let mut h = h0;
    for w in times.windows(2) {
        let mut hit: Option<Step<4>> = None;
        let out = dp.run(sys, w[0], y, w[1], h, |step: &Step<4>| {
            if step.y1[2] <= J_SNAPSHOT && step.y0[2] > J_SNAPSHOT {
                hit = Some(*step);
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        })?;
        if let Some(step) = hit {
            let tt = 1e-14 * step.t1.abs().max(1.0);
            let (ts, ys) = dp.locate_in_step(sys, &step, |y| y[2] - J_SNAPSHOT, tt)?;
            let mut zero: Option<Step<4>> = None;
            dp.run(sys, ts, ys, ts + tau_d_of(sys), h, |step: &Step<4>| {
                if step.y1[2] <= 0.0 {
                    zero = Some(*step);
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            })?;
            let tz = match zero {
                Some(step) => Some(dp.locate_in_step(sys, &step, |y| y[2], tt)?.0),
                None => None,
            };
            return Ok(LabelRun {
                states,
                compression: Some((ts, sys.unpack(&ys), tz)),
            });
        }
        y = out.y;
        h = out.h_next;
        states.push(sys.unpack(&y));
    }
    Ok(LabelRun {
        states,
        compression: None,
    })
}

fn tau_d_of(sys: &LabelSystem) -> f64 {
    2.0 * std::f64::consts::PI / sys.d.sqrt()
}

/// Lagrangian solution on a time grid. States are stored time-major:
/// `states[i][j]` is label `j` at `times[i]`.
#[derive(Debug, Clone, Serialize)]
pub struct BulkSolution {
    pub d: Dimension,
    pub labels: Vec<f64>,
    /// Frozen enclosed mass per label.
    pub masses: Vec<f64>,
    pub p0: Vec<f64>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<LabelState>>,
    pub status: BulkStatus,
    pub tol: f64,
}

/// Evolve `label_count` log-spaced labels over `t_grid` (starting at 0).
/// On breakdown the series is truncated before it, with a last snapshot
/// where the first compressed label has `J =` [`J_SNAPSHOT`].
pub fn evolve(data: &InitialData, t_grid: &[f64], opts: &BulkOptions) -> Result<BulkSolution> {
    if t_grid.first() != Some(&0.0) {
        return Err(Error::Domain("time grid must start at t = 0".into()));
    }
    if let Some(w) = t_grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(format!(
            "time grid not increasing at t = {}",
            w[1]
        )));
    }
    if opts.labels < 2 {
        return Err(Error::Domain("at least two labels are needed".into()));
    }
    let d = data.dimension();
    let labels = log_grid(data.support_radius(), opts.labels);
    let dp = solver(d, opts.tol);
    let h0 = tau_d(d) * 1e-3;
    let nodes: Vec<_> = labels.iter().map(|&r| data.characteristic_at(r)).collect();
    let systems: Vec<LabelSystem> = nodes
        .iter()
        .map(|n| LabelSystem::new(d, n.r, n.m, n.p))
        .collect();
    let runs: Vec<LabelRun> = nodes
        .par_iter()
        .zip(systems.par_iter())
        .enumerate()
        .map(|(j, (n, sys))| {
            let init = LabelState {
                phi: n.r,
                u: n.u,
                j: 1.0,
                k: n.w,
            };
            run_label(&dp, sys, init, t_grid, h0).map_err(|e| match e {
                Error::Integrator { t, reason } => Error::Integrator {
                    t,
                    reason: format!("label {j} (r = {}): {reason}", n.r),
                },
                other => other,
            })
        })
        .collect::<Result<_>>()?;

    // First compression, by snapshot time.
    let first = runs
        .iter()
        .enumerate()
        .filter_map(|(j, run)| run.compression.map(|(ts, _, tz)| (j, ts, tz)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let cut = first.map_or(f64::INFINITY, |(_, ts, _)| ts);
    let stored = t_grid.iter().take_while(|&&t| t < cut).count();
    let mut states: Vec<Vec<LabelState>> = (0..stored)
        .map(|i| runs.iter().map(|run| run.states[i]).collect())
        .collect();
    let mut times = t_grid[..stored].to_vec();

    let mut status = BulkStatus::Classical;
    if let Some((j, ts, tz)) = first {
        let t_prev = times[stored - 1];
        let snap: Vec<LabelState> = systems
            .par_iter()
            .zip(states[stored - 1].par_iter())
            .map(|(sys, s)| advance(&dp, sys, t_prev, s, ts, h0))
            .collect::<Result<_>>()?;
        let t_break = runs
            .iter()
            .filter_map(|run| run.compression.and_then(|c| c.2))
            .fold(tz.unwrap_or(ts), f64::min);
        states.push(snap);
        times.push(ts);
        status = BulkStatus::ClassicalBreakdown(Breakdown::Compression {
            t: t_break,
            label: j,
            radius: labels[j],
        });
    }

    // Adjacent-label inversion between stored times.
    if let Some(i) = states.iter().position(|row| first_inversion(row).is_some()) {
        let jj = first_inversion(&states[i]).expect("inversion found");
        let crossing = if i == 0 {
            0.0
        } else {
            let (t0, a, b) = (times[i - 1], states[i - 1][jj], states[i - 1][jj + 1]);
            let mut err = None;
            let gap = |t: f64| match (
                advance(&dp, &systems[jj], t0, &a, t, h0),
                advance(&dp, &systems[jj + 1], t0, &b, t, h0),
            ) {
                (Ok(x), Ok(y)) => y.phi - x.phi,
                (Err(e), _) | (_, Err(e)) => {
                    err.get_or_insert(e);
                    0.0
                }
            };
            let t = brent(gap, t0, times[i], 1e-13, 1e-13)?;
            if let Some(e) = err {
                return Err(e);
            }
            t
        };
        let earlier = match status {
            BulkStatus::ClassicalBreakdown(b) => crossing < b.time(),
            BulkStatus::Classical => true,
        };
        if earlier {
            status = BulkStatus::ClassicalBreakdown(Breakdown::Crossing {
                t: crossing,
                label: jj,
            });
        }
        times.truncate(i);
        states.truncate(i);
    }

    Ok(BulkSolution {
        d,
        masses: nodes.iter().map(|n| n.m).collect(),
        p0: nodes.iter().map(|n| n.p).collect(),
        labels,
        times,
        states,
        status,
        tol: opts.tol,
    })
}

fn first_inversion(row: &[LabelState]) -> Option<usize> {
    row.windows(2).position(|w| !(w[1].phi > w[0].phi))
}

/// Uniform grid `0, dt, 2dt, ...` up to and including `t_end`.
pub fn time_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| if i == n { t_end } else { i as f64 * dt })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub p: f64,
    pub u: f64,
    pub rho: f64,
    /// `r > R(t)`: fields are zero by convention.
    pub outside_support: bool,
}

/// Eulerian view of the labels at one time: the inverse flow map `Ψ`
/// interpolated over `Φ_j` with slopes `1/J_j`.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    d: Dimension,
    labels: Vec<f64>,
    states: Vec<LabelState>,
    data: InitialData,
    psi: RadialProfile,
    velocity: RadialProfile,
    jac: RadialProfile,
}

impl Snapshot {
    fn new(
        sol: &BulkSolution,
        t: f64,
        states: Vec<LabelState>,
        data: &InitialData,
    ) -> Result<Self> {
        if let Some(j) = first_inversion(&states) {
            return Err(Error::Inconsistent(format!(
                "flow map not monotone at t = {t} between labels {j} and {}",
                j + 1
            )));
        }
        if let Some(s) = states.iter().find(|s| !(s.j > 0.0)) {
            return Err(Error::Inconsistent(format!(
                "non-positive Jacobian {} at t = {t}",
                s.j
            )));
        }
        let phi: Vec<f64> = states.iter().map(|s| s.phi).collect();
        let psi = RadialProfile::with_slopes(
            phi.clone(),
            sol.labels.clone(),
            states.iter().map(|s| 1.0 / s.j).collect(),
        )?;
        let velocity = RadialProfile::with_slopes(
            phi,
            states.iter().map(|s| s.u).collect(),
            states.iter().map(|s| s.k / s.j).collect(),
        )?;
        let jac =
            RadialProfile::from_samples(sol.labels.clone(), states.iter().map(|s| s.j).collect())?;
        Ok(Self {
            t,
            d: sol.d,
            labels: sol.labels.clone(),
            states,
            data: data.clone(),
            psi,
            velocity,
            jac,
        })
    }

    pub fn boundary(&self) -> f64 {
        self.states.last().expect("at least two labels").phi
    }

    pub fn states(&self) -> &[LabelState] {
        &self.states
    }

    /// Lagrangian label of the particle at radius `r`.
    pub fn label_of(&self, r: f64) -> f64 {
        let first = self.states[0].phi;
        if r < first {
            r * self.labels[0] / first
        } else {
            self.psi.eval(r)
        }
    }

    pub fn fields(&self, r: f64) -> FieldSample {
        if r > self.boundary() || !(r > 0.0) {
            return FieldSample {
                p: 0.0,
                u: 0.0,
                rho: 0.0,
                outside_support: r > self.boundary(),
            };
        }
        let df = self.d.as_f64();
        let first = self.states[0];
        let label = self.label_of(r);
        let (p, u) = if r < first.phi {
            (self.data.p0_at(label) / first.j, first.u * r / first.phi)
        } else {
            (
                self.data.p0_at(label) / self.jac.eval(label),
                self.velocity.eval(r),
            )
        };
        FieldSample {
            p,
            u,
            rho: p / (sphere_area(self.d) * r.powf(df - 1.0)),
            outside_support: false,
        }
    }

    /// `∫₀^{R(t)} P(t, s) ds` from the reconstructed field.
    pub fn total_mass(&self) -> f64 {
        let mut acc = gauss7(|r| self.fields(r).p, 0.0, self.states[0].phi);
        for w in self.states.windows(2) {
            acc += gauss7(|r| self.fields(r).p, w[0].phi, w[1].phi);
        }
        acc
    }
}

impl BulkSolution {
    pub fn breakdown(&self) -> Option<Breakdown> {
        match self.status {
            BulkStatus::Classical => None,
            BulkStatus::ClassicalBreakdown(b) => Some(b),
        }
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("time grid starts at 0")
    }

    /// Label states at time `t`, re-integrated from the previous stored
    /// time when `t` is not on the grid.
    pub fn states_at(&self, t: f64) -> Result<Vec<LabelState>> {
        if !(t >= 0.0 && t <= self.t_end()) {
            return Err(Error::Domain(format!(
                "time {t} outside the stored range [0, {}]",
                self.t_end()
            )));
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        if self.times[i] == t {
            return Ok(self.states[i].clone());
        }
        let dp = solver(self.d, self.tol);
        let h0 = tau_d(self.d) * 1e-3;
        self.labels
            .par_iter()
            .zip(self.masses.par_iter().zip(self.p0.par_iter()))
            .zip(self.states[i].par_iter())
            .map(|((&r, (&m, &p)), s)| {
                advance(
                    &dp,
                    &LabelSystem::new(self.d, r, m, p),
                    self.times[i],
                    s,
                    t,
                    h0,
                )
            })
            .collect()
    }

    pub fn snapshot(&self, data: &InitialData, t: f64) -> Result<Snapshot> {
        Snapshot::new(self, t, self.states_at(t)?, data)
    }

    /// `(P, u, ρ)` at `(t, r)`; `data` supplies `P₀` at the traced-back label.
    pub fn fields(&self, data: &InitialData, t: f64, r: f64) -> Result<FieldSample> {
        Ok(self.snapshot(data, t)?.fields(r))
    }

    /// Free boundary `R(t) = Φ(t; R₀)` at the stored times.
    pub fn boundary(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, row)| (t, row.last().expect("labels").phi))
            .collect()
    }

    /// `sup_j r^{1-d} P + sup_j |∂_r u|` over the labels at each stored time.
    pub fn continuation_monitor(&self) -> Vec<(f64, f64)> {
        let df = self.d.as_f64();
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, row)| {
                let (a, b) = row
                    .iter()
                    .zip(&self.p0)
                    .fold((0.0f64, 0.0f64), |(a, b), (s, &p)| {
                        (
                            a.max(p / (s.j * s.phi.powf(df - 1.0))),
                            b.max((s.k / s.j).abs()),
                        )
                    });
                (t, a + b)
            })
            .collect()
    }

    /// Largest `|Φ(t; r_j) - r_j|` and `|u(t; r_j) - u₀(r_j)|` relative to
    /// `R₀` at stored time index `i`.
    pub fn return_deviation(&self, i: usize) -> f64 {
        let r0 = *self.labels.last().expect("labels");
        self.states[i]
            .iter()
            .zip(self.states[0].iter())
            .map(|(s, s0)| ((s.phi - s0.phi).abs()).max((s.u - s0.u).abs()) / r0)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::make_stationary;

    #[test]
    fn time_grid_hits_the_end() {
        let g = time_grid(1.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(time_grid(1.0, 0.25).len(), 5);
    }

    #[test]
    fn stationary_labels_stay_put() {
        let d = Dimension::new(3).unwrap();
        let data = make_stationary(d, 1.0, 64).unwrap();
        let grid = time_grid(5.0, 0.5);
        let sol = evolve(
            &data,
            &grid,
            &BulkOptions {
                labels: 32,
                tol: 1e-10,
            },
        )
        .unwrap();
        assert_eq!(sol.status, BulkStatus::Classical);
        for row in &sol.states {
            for (s, &r) in row.iter().zip(&sol.labels) {
                assert!((s.phi - r).abs() < 1e-10 * r && s.u.abs() < 1e-10 * r);
                assert!((s.j - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let d = Dimension::new(3).unwrap();
        let data = make_stationary(d, 1.0, 16).unwrap();
        assert!(evolve(&data, &[0.1, 0.2], &BulkOptions::default()).is_err());
        assert!(evolve(&data, &[0.0, 0.2, 0.2], &BulkOptions::default()).is_err());
    }
}
