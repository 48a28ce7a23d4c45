use proptest::prelude::*;
use vguard::coverage::{coverage_probability, CoverageQuery};
use vguard::density::{ap_equivalent_density, ue_equivalent_density, Tier};
use vguard::geometry::{NetworkConfig, Point2, Scenario};

fn cfg() -> NetworkConfig {
    NetworkConfig {
        lambda_u: 2.0,
        ..NetworkConfig::default()
    }
}

#[test]
fn receiver_on_the_guard_boundary() {
    for ns in [0.25, 0.5, 1.0, 1.5] {
        let sc = Scenario::with_receiver_polar(ns, ns, 1.0).unwrap();
        let d = ap_equivalent_density(&sc, &cfg());
        assert_eq!(d.value(0.0), 0.5);
        assert!(d.value(1e-9).is_finite());
    }
}

#[test]
fn coverage_falls_with_threshold() {
    let sc = Scenario::with_receiver_polar(0.5, 0.25, 0.3).unwrap();
    for tier in [Tier::Ap, Tier::Ue] {
        let mut last = 1.0;
        for db in [-10.0, 0.0, 10.0, 20.0] {
            let q = CoverageQuery::from_db(0.4, db, tier).unwrap();
            let p = coverage_probability(&sc, &cfg(), &q).unwrap();
            assert!(p < last && p > 0.0, "{tier:?} {db}: {p}");
            last = p;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn densities_stay_between_zero_and_lambda(
        ns in 0.0f64..2.0,
        ratio in prop::sample::select(vec![0.0, 0.5, 1.0, 2.0]),
        angle in 0.0f64..std::f64::consts::TAU,
        r in prop_oneof![Just(0.0), 0.0f64..4.0],
    ) {
        let sc = Scenario::with_receiver_polar(ns, ratio * ns, angle).unwrap();
        let c = cfg();
        let ap = ap_equivalent_density(&sc, &c).value(r);
        let ue = ue_equivalent_density(&sc, &c).value(r);
        prop_assert!((0.0..=c.lambda_a + 1e-12).contains(&ap), "ap {}", ap);
        prop_assert!((0.0..=c.lambda_u + 1e-9).contains(&ue), "ue {}", ue);
    }

    #[test]
    fn densities_ignore_rotation(ns in 0.1f64..1.5, xr in 0.0f64..2.0, turn in 0.0f64..std::f64::consts::TAU) {
        let a = Scenario::canonical(ns, Point2::new(xr, 0.0)).unwrap();
        let b = Scenario::new(Point2::polar(ns, turn), Point2::polar(xr, turn)).unwrap();
        let c = cfg();
        for r in [0.1, 0.7, 1.9] {
            prop_assert!((ap_equivalent_density(&a, &c).value(r) - ap_equivalent_density(&b, &c).value(r)).abs() < 1e-9);
        }
    }
}
