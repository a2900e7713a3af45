//! Explicit ODE integrators.
//!
//! [`DormandPrince`] is the adaptive embedded 5(4) pair used for all
//! characteristic integrations. Event location inside an accepted step is
//! done by re-stepping from the step start with a shorter step
//! ([`DormandPrince::substep`]); since a shorter step from the same start
//! is at least as accurate as the accepted one, this acts as the dense
//! output. [`yoshida4_step`] is a fixed-step symplectic scheme kept as an
//! independent check on long-time energy behaviour.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
        }
    }
}

/// An accepted step `(t0, y0) -> (t1, y1)`.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
}

impl<const N: usize> Step<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOutcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// Suggested size for a subsequent step in the same direction.
    pub h_next: f64,
    /// True if the observer requested an early stop.
    pub stopped: bool,
    pub steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub tol: Tolerances,
    pub max_steps: usize,
    pub max_step_size: f64,
}

impl DormandPrince {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            max_steps: 2_000_000,
            max_step_size: f64::INFINITY,
        }
    }

    /// Cap the step size; keeps oscillatory systems inside the stability
    /// region when the local error estimate is tiny.
    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.max_step_size = h_max;
        self
    }

    /// One step of size `h`, returning the 5th-order solution and the
    /// scaled error norm of the embedded 4th-order estimate.
    fn trial<const N: usize, S: OdeSystem<N>>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: f64,
    ) -> ([f64; N], f64) {
        let k1 = sys.rhs(t, y);
        let k2 = sys.rhs(t + C2 * h, &axpy(y, &[(A21, &k1)], h));
        let k3 = sys.rhs(t + C3 * h, &axpy(y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = sys.rhs(
            t + C4 * h,
            &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
        );
        let k5 = sys.rhs(
            t + C5 * h,
            &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = sys.rhs(
            t + h,
            &axpy(
                y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ),
        );
        let y1 = axpy(
            y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            h,
        );
        let k7 = sys.rhs(t + h, &y1);
        let mut acc = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.tol.atol + self.tol.rtol * y[i].abs().max(y1[i].abs());
            acc += (e / scale).powi(2);
        }
        (y1, (acc / N as f64).sqrt())
    }

    /// Uncontrolled step of size `s` from `(t, y)`; used to evaluate the
    /// solution inside an already accepted step.
    pub fn substep<const N: usize, S: OdeSystem<N>>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        s: f64,
    ) -> [f64; N] {
        if s == 0.0 {
            return *y;
        }
        self.trial(sys, t, y, s).0
    }

    /// Integrate from `t0` to `t_end` (either direction), calling
    /// `observer` after every accepted step. The observer may stop the run
    /// early by returning `ControlFlow::Break(())`.
    pub fn run<const N: usize, S, O>(
        &self,
        sys: &S,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        h_init: f64,
        mut observer: O,
    ) -> Result<RunOutcome<N>>
    where
        S: OdeSystem<N>,
        O: FnMut(&Step<N>) -> ControlFlow<()>,
    {
        let span = t_end - t0;
        let mut t = t0;
        let mut y = y0;
        if span == 0.0 {
            return Ok(RunOutcome {
                t,
                y,
                h_next: h_init,
                stopped: false,
                steps: 0,
            });
        }
        let dir = span.signum();
        let mut h = if h_init.is_finite() && h_init != 0.0 {
            h_init.abs().min(span.abs())
        } else {
            (1e-3 * span.abs()).min(1e-2)
        }
        .min(self.max_step_size);
        let mut h_next = h;
        let mut steps = 0;
        while (t_end - t) * dir > 0.0 {
            if steps >= self.max_steps {
                return Err(Error::Integrator {
                    t,
                    reason: format!("step budget of {} exhausted", self.max_steps),
                });
            }
            let remaining = (t_end - t).abs();
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            let (y1, err) = self.trial(sys, t, &y, dir * h_try);
            if !err.is_finite() || y1.iter().any(|v| !v.is_finite()) {
                h = 0.25 * h_try;
                if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::Integrator {
                        t,
                        reason: "non-finite state and step size underflow".into(),
                    });
                }
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                let t1 = if last { t_end } else { t + dir * h_try };
                let step = Step {
                    t0: t,
                    y0: y,
                    t1,
                    y1,
                };
                t = t1;
                y = y1;
                steps += 1;
                h_next = (h_try * factor).min(self.max_step_size);
                if !last {
                    h = h_next;
                }
                if observer(&step).is_break() {
                    return Ok(RunOutcome {
                        t,
                        y,
                        h_next,
                        stopped: true,
                        steps,
                    });
                }
            } else {
                h = h_try * factor.min(1.0);
                if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::Integrator {
                        t,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
        Ok(RunOutcome {
            t,
            y,
            h_next,
            stopped: false,
            steps,
        })
    }

    /// Locate the first root of `g` along an accepted step, given that
    /// `g` changes sign between its ends. Returns `(t, y(t))`.
    pub fn locate_in_step<const N: usize, S, G>(
        &self,
        sys: &S,
        step: &Step<N>,
        mut g: G,
        t_tol: f64,
    ) -> Result<(f64, [f64; N])>
    where
        S: OdeSystem<N>,
        G: FnMut(&[f64; N]) -> f64,
    {
        let h = step.h();
        let s = crate::numerics::roots::brent(
            |s| g(&self.substep(sys, step.t0, &step.y0, s * h)),
            0.0,
            1.0,
            0.0,
            t_tol / h.abs(),
        )?;
        let t = step.t0 + s * h;
        Ok((t, self.substep(sys, step.t0, &step.y0, s * h)))
    }
}

/// One step of the 4th-order Yoshida (Forest-Ruth) composition for the
/// separable Hamiltonian `p²/2 + V(q)`, with `force = -V'`.
pub fn yoshida4_step<F: Fn(f64) -> f64>(q: f64, p: f64, dt: f64, force: &F) -> (f64, f64) {
    let cbrt2 = 2f64.powf(1.0 / 3.0);
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 / (2.0 - cbrt2);
    let c = [w1 / 2.0, (w0 + w1) / 2.0, (w0 + w1) / 2.0, w1 / 2.0];
    let d = [w1, w0, w1];
    let (mut q, mut p) = (q, p);
    for i in 0..3 {
        q += c[i] * dt * p;
        p += d[i] * dt * force(q);
    }
    q += c[3] * dt * p;
    (q, p)
}
