//! Globally adaptive Gauss-Kronrod (G7/K15) quadrature.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 7-point Gauss-Legendre rule on `[a, b]`, exact for degree 13.
pub fn gauss7<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = WG[3] * f(center);
    for j in 0..3 {
        let dx = half * XGK[2 * j + 1];
        sum += WG[j] * (f(center - dx) + f(center + dx));
    }
    sum * half
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_intervals: 500,
        }
    }
}

impl QuadratureOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = kronrod.abs();
    let mut fvals = [0.0; 15];
    fvals[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fvals[j] = f1;
        fvals[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::Quadrature {
            estimate: kronrod * half,
            error_estimate: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fvals[j] - mean).abs() + (fvals[14 - j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    // QUADPACK error scaling.
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        a,
        b,
        value,
        error: err,
    })
}

/// Integrate `f` over `[a, b]` by bisecting the segment with the largest
/// error estimate until the total estimate meets the tolerance.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            intervals: 0,
        });
    }
    let mut segments = vec![kronrod15(&mut f, a, b)?];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                intervals: segments.len(),
            });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: value,
                error_estimate: error,
                tolerance: target,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("segments is never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            return Err(Error::Quadrature {
                estimate: value,
                error_estimate: error,
                tolerance: target,
            });
        }
        segments.push(kronrod15(&mut f, seg.a, mid)?);
        segments.push(kronrod15(&mut f, mid, seg.b)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_degree_22() {
        let seg = kronrod15(&mut |x: f64| x.powi(22), -1.0, 1.0).unwrap();
        assert!((seg.value - 2.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        let g: f64 = WG[3] + 2.0 * (WG[0] + WG[1] + WG[2]);
        let k: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-15);
        assert!((k - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gauss7_is_exact_for_degree_13() {
        let v = gauss7(|x: f64| x.powi(13) + x.powi(12), 0.0, 2.0);
        let exact = 2f64.powi(14) / 14.0 + 2f64.powi(13) / 13.0;
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫_0^1 1/(1e-4 + (x-0.3)^2) dx
        let eps: f64 = 1e-4;
        let exact = ((0.7 / eps.sqrt()).atan() + (0.3 / eps.sqrt()).atan()) / eps.sqrt();
        let r = integrate(
            |x| 1.0 / (eps + (x - 0.3).powi(2)),
            0.0,
            1.0,
            QuadratureOptions::with_rel_tol(1e-12),
        )
        .unwrap();
        assert!((r.value - exact).abs() / exact < 1e-11);
    }

    #[test]
    fn failure_carries_estimate() {
        let err = integrate(
            |x: f64| x.powf(-0.9),
            0.0,
            1.0,
            QuadratureOptions {
                rel_tol: 1e-14,
                abs_tol: 0.0,
                max_intervals: 20,
            },
        )
        .unwrap_err();
        match err {
            Error::Quadrature { estimate, .. } => assert!(estimate.is_finite()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
