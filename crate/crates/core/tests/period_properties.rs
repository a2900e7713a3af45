use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use confined_ep::period::{c_v_closed_form, period, period_derivative, period_with_tol};
use confined_ep::potential::{
    equilibrium_radius, newtonian, newtonian_d1, newtonian_d2, normalize_energy, tau_d, Dimension,
    EffectivePotential, PotentialSpec,
};
use confined_ep::Potential;

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

fn unit(d: u32) -> EffectivePotential {
    EffectivePotential::new(PotentialSpec::new(d, 1.0).unwrap())
}

#[test]
fn equilibrium_is_a_nondegenerate_minimum() {
    for d in 2..=8 {
        for m in [0.1, 1.0, 10.0] {
            let spec = PotentialSpec::new(d, m).unwrap();
            let r = equilibrium_radius(spec);
            let v1 = m * newtonian_d1(r, dim(d)).unwrap() + r;
            let v2 = m * newtonian_d2(r, dim(d)).unwrap() + 1.0;
            assert!(v1.abs() <= 1e-10 * r.max(1.0), "d={d} m={m}: V'(r*) = {v1}");
            assert!(v2 > 0.0);
        }
    }
}

#[test]
fn small_oscillation_period_is_two_pi_over_root_d() {
    for d in 2..=8 {
        assert!((tau_d(dim(d)) - 2.0 * PI / (d as f64).sqrt()).abs() <= 1e-10);
        assert!((unit(d).small_oscillation_period() - tau_d(dim(d))).abs() <= 1e-10);
    }
}

#[test]
fn period_approaches_tau_monotonically() {
    for d in [2, 3, 5, 6] {
        let pot = unit(d);
        let devs: Vec<f64> = (2..=6)
            .map(|k| (period(pot.e_min() + 10f64.powi(-k), &pot).unwrap() - tau_d(dim(d))).abs())
            .collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]), "d={d}: {devs:?}");
    }
}

#[test]
fn slope_sign_near_the_bottom_follows_c_v() {
    for d in [2, 3, 5, 6] {
        let pot = unit(d);
        let slope = period_derivative(pot.e_min() + 1e-3, &pot).unwrap();
        assert_eq!(slope.signum(), c_v_closed_form(dim(d)).signum(), "d={d}");
        assert_eq!(slope < 0.0, d < 4);
    }
}

/// Max residual of a degree-10 least-squares fit of `T` on `[a, b]`.
fn fit_residual(pot: &EffectivePotential, a: f64, b: f64) -> f64 {
    let n = 41;
    let xs: Vec<f64> = (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect();
    let ts: Vec<f64> = xs
        .iter()
        .map(|x| period_with_tol(a + 0.5 * (x + 1.0) * (b - a), pot, 1e-13).unwrap())
        .collect();
    // Chebyshev basis keeps the normal equations well conditioned.
    let basis = DMatrix::from_fn(n, 11, |i, j| (j as f64 * xs[i].acos()).cos());
    let y = DVector::from_vec(ts.clone());
    let coef = basis.clone().svd(true, true).solve(&y, 1e-14).unwrap();
    (basis * coef - y).amax()
}

#[test]
fn period_is_smooth_on_compact_grids() {
    for d in [2, 3, 5, 6] {
        let pot = unit(d);
        let e0 = pot.e_min();
        let wide = fit_residual(&pot, e0 + 0.5, e0 + 2.5);
        let narrow = fit_residual(&pot, e0 + 1.25, e0 + 1.75);
        assert!(wide < 1e-4, "d={d}: wide residual {wide:e}");
        // an analytic T converges geometrically in the interval width
        assert!(
            narrow <= 1e-3 * wide && narrow < 1e-10,
            "d={d}: {narrow:e} vs {wide:e}"
        );
    }
}

#[test]
fn neighbouring_periods_obey_a_lipschitz_bound() {
    for d in [2, 3, 5, 6] {
        let pot = unit(d);
        let grid: Vec<f64> = (0..200)
            .map(|i| pot.e_min() + 0.05 + 0.05 * i as f64)
            .collect();
        let ts: Vec<f64> = grid.iter().map(|&e| period(e, &pot).unwrap()).collect();
        for (w, e) in ts.windows(2).zip(grid.windows(2)) {
            let bound = period_derivative(e[0], &pot)
                .unwrap()
                .abs()
                .max(period_derivative(e[1], &pot).unwrap().abs());
            assert!((w[1] - w[0]).abs() <= 1.1 * bound * (e[1] - e[0]) + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn newtonian_derivatives_match_finite_differences(d in 2u32..=8, r in 0.1f64..10.0) {
        let h = 1e-5;
        let fd1 = (newtonian(r + h, dim(d)).unwrap() - newtonian(r - h, dim(d)).unwrap()) / (2.0 * h);
        let fd2 = (newtonian_d1(r + h, dim(d)).unwrap() - newtonian_d1(r - h, dim(d)).unwrap()) / (2.0 * h);
        let d1 = newtonian_d1(r, dim(d)).unwrap();
        let d2 = newtonian_d2(r, dim(d)).unwrap();
        prop_assert!((fd1 - d1).abs() <= 1e-6 * d1.abs());
        prop_assert!((fd2 - d2).abs() <= 1e-6 * d2.abs());
    }

    #[test]
    fn period_depends_on_mass_only_through_normalization(
        d in 2u32..=6,
        log_m in -1.0f64..1.0,
        log_offset in -2.0f64..1.0,
    ) {
        let spec = PotentialSpec::new(d, 10f64.powf(log_m)).unwrap();
        let pot = EffectivePotential::new(spec);
        let e = pot.e_min() + 10f64.powf(log_offset) * pot.r_star().powi(2);
        let here = period(e, &pot).unwrap();
        let there = period(normalize_energy(e, spec).unwrap(), &unit(d)).unwrap();
        prop_assert!((here - there).abs() <= 1e-8, "{here} vs {there}");
    }

    #[test]
    fn d4_period_is_pi(log_m in -1.0f64..1.0, log_offset in -3.0f64..1.0) {
        let pot = EffectivePotential::new(PotentialSpec::new(4, 10f64.powf(log_m)).unwrap());
        let e = pot.e_min() + 10f64.powf(log_offset) * pot.r_star().powi(2);
        prop_assert!((period(e, &pot).unwrap() - PI).abs() <= 1e-8);
    }
}
