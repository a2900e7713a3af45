//! Tabulated radial functions with a C¹ cubic Hermite interpolant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node values and slopes on a strictly increasing positive grid.
///
/// Between nodes the profile is the cubic Hermite polynomial matching the
/// values and slopes at both ends, so it is C¹ by construction. Outside the
/// grid it continues linearly with the end slope; callers that need a
/// specific behaviour near `r = 0` handle that themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    r: Vec<f64>,
    v: Vec<f64>,
    s: Vec<f64>,
}

fn validate_grid(r: &[f64], v: &[f64]) -> Result<()> {
    if r.len() < 2 {
        return Err(Error::Domain(format!(
            "profile needs at least 2 nodes, got {}",
            r.len()
        )));
    }
    if r.len() != v.len() {
        return Err(Error::Domain(format!(
            "grid has {} nodes but {} values",
            r.len(),
            v.len()
        )));
    }
    if !(r[0] > 0.0) {
        return Err(Error::Domain(format!(
            "first node {} is not positive",
            r[0]
        )));
    }
    if let Some(i) = r.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(format!(
            "grid not strictly increasing at node {} (r = {})",
            i + 1,
            r[i + 1]
        )));
    }
    if let Some(i) = r.iter().chain(v).position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite entry at position {i}")));
    }
    Ok(())
}

/// Derivative at `xs[at]` of the Lagrange polynomial through `(xs, ys)`.
fn lagrange_slope(xs: &[f64], ys: &[f64], at: usize) -> f64 {
    let x0 = xs[at];
    let mut total = 0.0;
    for j in 0..xs.len() {
        let mut dl = 0.0;
        for k in 0..xs.len() {
            if k == j {
                continue;
            }
            let mut term = 1.0 / (xs[j] - xs[k]);
            for l in 0..xs.len() {
                if l != j && l != k {
                    term *= (x0 - xs[l]) / (xs[j] - xs[l]);
                }
            }
            dl += term;
        }
        total += ys[j] * dl;
    }
    total
}

/// Node slopes from a five-point stencil, limited where the data are
/// locally monotone so the interpolant does not overshoot.
fn estimate_slopes(r: &[f64], v: &[f64]) -> Vec<f64> {
    let n = r.len();
    let width = n.min(5);
    let secants: Vec<f64> = r
        .windows(2)
        .zip(v.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let raw = lagrange_slope(
                &r[start..start + width],
                &v[start..start + width],
                i - start,
            );
            let left = if i > 0 { Some(secants[i - 1]) } else { None };
            let right = secants.get(i).copied();
            match (left, right) {
                (Some(a), Some(b)) if a * b > 0.0 => limit(raw, a.abs().min(b.abs()), a.signum()),
                (Some(a), Some(b)) if a == 0.0 || b == 0.0 => 0.0,
                (Some(_), Some(_)) => raw,
                (Some(a), None) | (None, Some(a)) => {
                    if a == 0.0 {
                        0.0
                    } else {
                        limit(raw, a.abs(), a.signum())
                    }
                }
                (None, None) => 0.0,
            }
        })
        .collect()
}

fn limit(raw: f64, bound: f64, sign: f64) -> f64 {
    if raw * sign <= 0.0 {
        0.0
    } else {
        sign * raw.abs().min(3.0 * bound)
    }
}

impl RadialProfile {
    pub fn with_slopes(r: Vec<f64>, v: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        validate_grid(&r, &v)?;
        if s.len() != r.len() {
            return Err(Error::Domain(format!(
                "grid has {} nodes but {} slopes",
                r.len(),
                s.len()
            )));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite slope".into()));
        }
        Ok(Self { r, v, s })
    }

    /// Build from values alone, estimating node slopes.
    pub fn from_samples(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        validate_grid(&r, &v)?;
        let s = estimate_slopes(&r, &v);
        Ok(Self { r, v, s })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn slopes(&self) -> &[f64] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn first_node(&self) -> f64 {
        self.r[0]
    }

    pub fn last_node(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    fn interval(&self, x: f64) -> usize {
        let k = self.r.partition_point(|&ri| ri <= x);
        k.clamp(1, self.r.len() - 1) - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.r.len() - 1;
        if x < self.r[0] {
            return self.v[0] + self.s[0] * (x - self.r[0]);
        }
        if x > self.r[last] {
            return self.v[last] + self.s[last] * (x - self.r[last]);
        }
        let i = self.interval(x);
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.v[i] + h * h10 * self.s[i] + h01 * self.v[i + 1] + h * h11 * self.s[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let last = self.r.len() - 1;
        if x < self.r[0] {
            return self.s[0];
        }
        if x > self.r[last] {
            return self.s[last];
        }
        let i = self.interval(x);
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.v[i] + d10 * self.s[i] + d01 * self.v[i + 1] + d11 * self.s[i + 1]
    }

    /// Exact integrals of the interpolant from the first node to each node.
    pub fn cumulative_integral(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.r.len());
        out.push(0.0);
        for i in 0..self.r.len() - 1 {
            let h = self.r[i + 1] - self.r[i];
            acc +=
                h * (self.v[i] + self.v[i + 1]) / 2.0 + h * h * (self.s[i] - self.s[i + 1]) / 12.0;
            out.push(acc);
        }
        out
    }

    /// Same grid, values and slopes scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            r: self.r.clone(),
            v: self.v.iter().map(|x| x * factor).collect(),
            s: self.s.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |a, x| a.max(x.abs()))
    }
}
