use confined_ep::bulk::{evolve, time_grid, BulkOptions, BulkStatus};
use confined_ep::initial_data::{
    classify, fixture_suite, make_stationary, theta_profile, ClassifyOptions, FixtureKind, Verdict,
};
use confined_ep::period::period_at_level;
use confined_ep::potential::Dimension;

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

#[test]
fn stationary_data_classify_as_stationary() {
    for d in [2, 3, 5, 6] {
        let data = make_stationary(dim(d), 1.0, 256).unwrap();
        let report = classify(&data, &ClassifyOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Stationary, "d={d}");
    }
}

#[test]
fn theta_branches_agree_on_compliant_data() {
    for d in [2, 3, 5, 6] {
        let fixture = fixture_suite(dim(d))
            .unwrap()
            .into_iter()
            .find(|f| f.kind == FixtureKind::CompliantGlobal)
            .unwrap();
        let profile = theta_profile(&fixture.data).unwrap();
        assert!(
            profile.max_branch_mismatch <= 1e-6,
            "d={d}: {}",
            profile.max_branch_mismatch
        );
    }
}

#[test]
fn global_data_stay_ordered_and_periodic() {
    for d in [2, 3, 5] {
        let fixture = fixture_suite(dim(d))
            .unwrap()
            .into_iter()
            .find(|f| f.kind == FixtureKind::CompliantGlobal)
            .unwrap();
        let t0 = period_at_level(dim(d), fixture.c0).unwrap();
        let sol = evolve(
            &fixture.data,
            &time_grid(10.0 * t0, t0 / 8.0),
            &BulkOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.status, BulkStatus::Classical);
        for row in &sol.states {
            assert!(row.iter().all(|s| s.j > 0.0));
            assert!(row.windows(2).all(|w| w[1].phi > w[0].phi));
        }
        let r0 = fixture.data.support_radius();
        let (t, r) = sol.boundary()[8];
        assert!((t - t0).abs() <= 1e-12 * t0);
        assert!((r - r0).abs() <= 1e-5 * r0);
    }
}

#[test]
fn mass_is_carried_by_the_labels() {
    let fixture = fixture_suite(dim(3))
        .unwrap()
        .into_iter()
        .find(|f| f.kind == FixtureKind::CompliantGlobal)
        .unwrap();
    let data = &fixture.data;
    let t0 = period_at_level(dim(3), fixture.c0).unwrap();
    let sol = evolve(data, &time_grid(t0, t0 / 4.0), &BulkOptions::default()).unwrap();
    let total = data.mass_at(data.support_radius());
    for &t in &sol.times {
        let m = sol.snapshot(data, t).unwrap().total_mass();
        assert!((m - total).abs() <= 1e-6 * total, "t={t}: {m} vs {total}");
    }
}

#[test]
fn violated_data_break_down_within_one_period() {
    for d in [2, 3, 5] {
        for fixture in fixture_suite(dim(d)).unwrap() {
            if fixture.kind.expects_global() {
                continue;
            }
            let t0 = period_at_level(dim(d), fixture.c0).unwrap();
            let sol = evolve(
                &fixture.data,
                &time_grid(t0, t0 / 20.0),
                &BulkOptions::default(),
            )
            .unwrap();
            let t = sol.breakdown().expect("breakdown").time();
            assert!(t > 0.0 && t <= t0, "d={d} {}: {t}", fixture.kind.slug());
            // the continuation quantity grows sharply towards breakdown
            let monitor = sol.continuation_monitor();
            let (first, last) = (monitor[0].1, monitor.last().unwrap().1);
            assert!(
                last > 100.0 * first,
                "d={d} {}: {first} -> {last}",
                fixture.kind.slug()
            );
        }
    }
}
