use proptest::prelude::*;

use confined_ep::characteristic::{
    f_closed_form, first_crossing, integrate_orbit, integrate_pw, measured_period,
    symplectic_energy_drift, CharacteristicState, DEFAULT_TOL,
};
use confined_ep::initial_data::{
    classify, fixture_suite, theta_of, ClassifyOptions, FixtureKind, Verdict,
};
use confined_ep::numerics::roots::brent;
use confined_ep::period::{period, turning_points};
use confined_ep::potential::{tau_d, Dimension, EffectivePotential, PotentialSpec};

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

/// Orbit of mass `m` started at its outer turning point, `eps` above the
/// well bottom in units of `r*²`.
fn outer_start(d: u32, m: f64, eps: f64) -> (CharacteristicState, f64) {
    let pot = EffectivePotential::new(PotentialSpec::new(d, m).unwrap());
    let e = pot.e_min() + eps * pot.r_star().powi(2);
    let tp = turning_points(e, &pot).unwrap();
    (
        CharacteristicState::orbit(dim(d), m, tp.x2, 0.0).unwrap(),
        period(e, &pot).unwrap(),
    )
}

#[test]
fn time_reversal_returns_to_the_start() {
    for d in 2..=6 {
        for eps in [0.01, 0.5, 5.0] {
            let (s0, t) = outer_start(d, 1.0, eps);
            let half = integrate_orbit(&s0, 0.37 * t, DEFAULT_TOL).unwrap();
            let end = half.samples.last().unwrap();
            let back = CharacteristicState::orbit(dim(d), 1.0, end.r, -end.u).unwrap();
            let home = *integrate_orbit(&back, 0.37 * t, DEFAULT_TOL)
                .unwrap()
                .samples
                .last()
                .unwrap();
            assert!((home.r - s0.r).abs() <= 1e-7 * s0.r, "d={d} eps={eps}");
            assert!((home.u + s0.u).abs() <= 1e-7 * s0.r, "d={d} eps={eps}");
        }
    }
}

#[test]
fn symplectic_oracle_keeps_energy_bounded() {
    for d in [2, 3, 5] {
        let (s0, _) = outer_start(d, 1.0, 0.5);
        assert!(symplectic_energy_drift(&s0, 10.0, 400) < 1e-6);
    }
}

/// The condition-2 fixture's offending characteristic: `f` has a root in
/// `[0, T₀]`, so the `(P, w)` blow-up time and the root must agree.
#[test]
fn blowup_time_is_the_first_root_of_f() {
    for d in [2, 3, 5] {
        let fixture = fixture_suite(dim(d))
            .unwrap()
            .into_iter()
            .find(|f| f.kind == FixtureKind::ConditionTwoViolated)
            .unwrap();
        let data = &fixture.data;
        let report = classify(data, &ClassifyOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::FiniteTimeBlowup);
        let node = data.characteristic_at(report.offending_radius.unwrap());
        let state = CharacteristicState::from_node(&node);
        let t0 = period(
            node.energy(),
            &EffectivePotential::new(node.spec().unwrap()),
        )
        .unwrap();
        let theta = theta_of(&node, data.u0().max_abs()).unwrap().theta;

        let orbit = integrate_orbit(&state, t0, DEFAULT_TOL).unwrap();
        let fs = f_closed_form(&orbit, theta, node.k()).unwrap();
        let i = fs
            .iter()
            .position(|s| s.f <= 0.0)
            .expect("f reaches 0 within T0");
        let f_at = |t: f64| {
            let s = orbit.state_at(t).unwrap();
            theta * s.u + node.k() * s.r
        };
        let root = brent(f_at, fs[i - 1].t, fs[i].t, 1e-14, 1e-14).unwrap();

        let pw = integrate_pw(&state, t0, DEFAULT_TOL).unwrap();
        let blowup = pw.blowup_time.expect("P blows up");
        assert!((blowup - root).abs() <= 1e-5, "d={d}: {blowup} vs {root}");

        // P = P(0)/f while f stays away from the root.
        for (s, f) in pw
            .samples
            .iter()
            .zip(f_closed_form(&pw, theta, node.k()).unwrap())
        {
            if f.f > 0.1 {
                assert!((s.p - node.p / f.f).abs() <= 1e-6 * node.p);
            }
        }
    }
}

#[test]
fn identical_states_cross_at_once() {
    let (s, _) = outer_start(3, 1.0, 0.5);
    assert_eq!(
        first_crossing(&s, &s, 10.0, DEFAULT_TOL).unwrap(),
        Some(0.0)
    );
}

#[test]
fn characteristics_with_different_periods_cross() {
    let d = dim(3);
    let pa = EffectivePotential::new(PotentialSpec::new(3, 1.0).unwrap());
    let a = CharacteristicState::orbit(d, 1.0, 0.5 * pa.r_star(), 0.0).unwrap();
    let b = CharacteristicState::orbit(d, 2.0, 0.51 * pa.r_star(), 0.0).unwrap();
    let t = first_crossing(&a, &b, 50.0 * tau_d(d), DEFAULT_TOL)
        .unwrap()
        .expect("crossing");
    let (ra, rb) = (
        integrate_orbit(&a, t, DEFAULT_TOL)
            .unwrap()
            .samples
            .last()
            .unwrap()
            .r,
        integrate_orbit(&b, t, DEFAULT_TOL)
            .unwrap()
            .samples
            .last()
            .unwrap()
            .r,
    );
    assert!((ra - rb).abs() <= 1e-8);
}

/// Neighbouring labels of ordered four-dimensional data share the period
/// π and keep their order.
#[test]
fn ordered_d4_characteristics_never_cross() {
    let fixture = fixture_suite(dim(4))
        .unwrap()
        .into_iter()
        .find(|f| f.kind == FixtureKind::CompliantGlobal)
        .unwrap();
    let data = &fixture.data;
    let nodes = data.nodes();
    for i in [100, 300, nodes.len() - 2] {
        let a = CharacteristicState::from_node(&data.characteristic_at(nodes[i]));
        let b = CharacteristicState::from_node(&data.characteristic_at(nodes[i + 1]));
        assert_eq!(
            first_crossing(&a, &b, 10.0 * std::f64::consts::PI, DEFAULT_TOL).unwrap(),
            None
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn measured_period_matches_quadrature(
        d in 2u32..=6,
        log_m in -1.0f64..1.0,
        log_eps in -3.0f64..1.0,
    ) {
        let (s0, t) = outer_start(d, 10f64.powf(log_m), 10f64.powf(log_eps));
        let measured = measured_period(&s0, DEFAULT_TOL).unwrap();
        prop_assert!((measured - t).abs() <= 1e-6, "{measured} vs {t}");
    }

    #[test]
    fn energy_drift_stays_small(
        d in 2u32..=6,
        log_m in -1.0f64..1.0,
        log_eps in -3.0f64..1.0,
    ) {
        let (s0, t) = outer_start(d, 10f64.powf(log_m), 10f64.powf(log_eps));
        let drift = integrate_orbit(&s0, 10.0 * t, DEFAULT_TOL).unwrap().energy_drift;
        prop_assert!(drift <= 1e-8, "drift {drift:e}");
    }
}
