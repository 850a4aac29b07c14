use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use metric_entropy::nets::*;
use metric_entropy::{Error, Family, GroupSpec, NormSpec, SpaceSpec};
use proptest::prelude::*;

fn circle() -> SpaceSpec {
    SpaceSpec::group_itself(GroupSpec::unitary(1).unwrap())
}

fn lines_in_space() -> SpaceSpec {
    SpaceSpec::grassmann(Family::SO, 3, 1).unwrap()
}

fn net_opts(seed: u64) -> NetOptions {
    NetOptions {
        seed,
        ..NetOptions::default()
    }
}

#[test]
fn circle_net_at_quarter_turn() {
    let r = build_net(&circle(), FRAC_PI_2, NormSpec::OPERATOR, &net_opts(1)).unwrap();
    assert!(r.cardinality >= 2 && r.cardinality <= 4, "{}", r.cardinality);
    assert!(r.audit.pass && r.audit.max_distance <= FRAC_PI_2 * (1.0 + AUDIT_SLACK));
}

#[test]
fn projective_plane_net_obeys_the_grid_bound() {
    let eps = 0.3;
    let r = build_net(&lines_in_space(), eps, NormSpec::OPERATOR, &net_opts(2)).unwrap();
    assert!(r.audit.pass, "{:?}", r.audit);
    assert!(r.cardinality as f64 <= (12.0 * FRAC_PI_2 / eps).powi(2));
    let achieved = (r.cardinality as f64).sqrt() * eps / FRAC_PI_2;
    assert!((achieved - r.achieved_c).abs() <= 1e-9);
}

#[test]
fn net_at_the_diameter_and_beyond() {
    for space in [circle(), lines_in_space()] {
        let diam = if space.dim() == 1 { PI } else { FRAC_PI_2 };
        let r = build_net(&space, diam, NormSpec::OPERATOR, &net_opts(3)).unwrap();
        assert!(r.cardinality >= 1 && r.audit.pass);
        assert!(matches!(
            build_net(&space, diam * 1.01, NormSpec::OPERATOR, &net_opts(3)),
            Err(Error::InvalidParameter(_))
        ));
    }
}

#[test]
fn circle_packs_three_points_at_quarter_turn() {
    let r = greedy_pack(&circle(), FRAC_PI_2, NormSpec::OPERATOR, &PackOptions::with_seed(5)).unwrap();
    assert_eq!(r.cardinality, 3);
    assert!(r.separated && r.min_pairwise.unwrap() > FRAC_PI_2);
    assert_eq!(r.separation_check, SeparationCheck::Full);
}

#[test]
fn packing_beyond_the_diameter_is_a_single_point() {
    let r = greedy_pack(&lines_in_space(), 1.6, NormSpec::OPERATOR, &PackOptions::with_seed(5)).unwrap();
    assert_eq!(r.cardinality, 1);
    assert!(r.min_pairwise.is_none() && r.separated);
    assert!(greedy_pack(&circle(), 0.0, NormSpec::OPERATOR, &PackOptions::with_seed(5)).is_err());
}

#[test]
fn packing_shrinks_as_epsilon_grows() {
    for space in [circle(), lines_in_space()] {
        let mut last = usize::MAX;
        for eps in [0.2, 0.3, 0.45, 0.675, 1.0] {
            let opts = PackOptions {
                budget: 2000,
                ..PackOptions::with_seed(9)
            };
            let r = greedy_pack(&space, eps, NormSpec::OPERATOR, &opts).unwrap();
            assert!(r.separated);
            assert!(r.cardinality <= last, "{} at {eps}: {} > {last}", space.id(), r.cardinality);
            last = r.cardinality;
        }
    }
}

#[test]
fn packing_at_twice_epsilon_fits_inside_a_net() {
    for (space, eps) in [(circle(), 0.4), (lines_in_space(), 0.35)] {
        let net = build_net(&space, eps, NormSpec::OPERATOR, &net_opts(4)).unwrap();
        let pack = greedy_pack(&space, 2.0 * eps, NormSpec::OPERATOR, &PackOptions::with_seed(4)).unwrap();
        assert!(net.audit.pass);
        assert!(pack.cardinality <= net.cardinality, "{} vs {}", pack.cardinality, net.cardinality);
    }
}

#[test]
fn chain_on_three_collinear_points() {
    let r = audit_chain(&FiniteMetric::on_line(&[0.0, 1.0, 2.0]).unwrap(), 1.0).unwrap();
    assert_eq!((r.n_prime, r.n, r.n_double_prime, r.n_tilde), (1, 1, 1, 2));
    assert_eq!(r.n_prime_half, 2);
    assert!(r.holds);
}

#[test]
fn chain_on_degenerate_sets() {
    let one = audit_chain(&FiniteMetric::on_line(&[0.7]).unwrap(), 0.5).unwrap();
    assert_eq!((one.n_prime, one.n, one.n_double_prime, one.n_tilde), (1, 1, 1, 1));
    let eps = 0.5;
    let two = audit_chain(&FiniteMetric::on_line(&[0.0, 2.0 * eps + 1e-3]).unwrap(), eps).unwrap();
    assert_eq!((two.n_double_prime, two.n_tilde), (2, 2));
    assert!(two.holds);
    let many: Vec<f64> = (0..=MAX_CHAIN_POINTS).map(|i| i as f64).collect();
    assert!(matches!(
        audit_chain(&FiniteMetric::on_line(&many).unwrap(), 1.0),
        Err(Error::TooLarge { .. })
    ));
}

#[test]
fn interval_covering_sits_in_the_volume_window() {
    let radius = 1.0;
    let ambient: Vec<f64> = (0..=200).map(|i| -radius + 2.0 * radius * i as f64 / 200.0).collect();
    let members: Vec<usize> = (0..18).map(|i| (i * 200 + 8) / 17).collect();
    assert_eq!(members[0], 0);
    assert_eq!(*members.last().unwrap(), 200);
    let metric = FiniteMetric::on_line(&ambient).unwrap().with_members(members).unwrap();
    for eps in [1.0, 0.5, 0.4, 1.0 / 3.0, 0.25] {
        let r = audit_chain(&metric, eps * radius).unwrap();
        assert!(r.holds);
        let n = r.n as f64;
        assert!(n >= 1.0 / eps - 1e-9 && n <= 1.0 + 2.0 / eps, "eps {eps}: N = {n}");
    }
}

/// A single greedy run on so few points has slope noise of about 0.09, so the
/// unit slope is checked on the mean of a fixed block of seeds.
#[test]
fn circle_profile_has_unit_slope() {
    let seeds = 0..16u64;
    let slopes: Vec<f64> = seeds
        .map(|seed| {
            let r = entropy_profile(&circle(), &[0.2, 0.3, 0.45, 0.675], NormSpec::OPERATOR, &PackOptions::with_seed(seed))
                .unwrap();
            assert_eq!(r.rows.len(), 4);
            r.slope
        })
        .collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!((mean - 1.0).abs() <= 0.1, "{mean}");
    assert!(slopes.iter().all(|s| (s - 1.0).abs() <= 0.3), "{slopes:?}");
}

#[test]
fn projective_plane_profile_has_slope_two() {
    let eps = [0.25, 0.315, 0.397, 0.5, 0.63, 0.8];
    let r = entropy_profile(&lines_in_space(), &eps, NormSpec::OPERATOR, &PackOptions::with_seed(13)).unwrap();
    assert!((r.slope - 2.0).abs() <= 0.3, "{}", r.slope);
}

#[test]
fn degenerate_profiles_are_rejected() {
    let opts = PackOptions::with_seed(1);
    assert!(matches!(
        entropy_profile(&circle(), &[0.3; 4], NormSpec::OPERATOR, &opts),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        entropy_profile(&circle(), &[0.2, 0.3, 0.4], NormSpec::OPERATOR, &opts),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn half_circle_ball_has_half_the_mass() {
    let r = ball_volume_mc(&circle(), FRAC_PI_2, NormSpec::OPERATOR, 20_000, 17).unwrap();
    assert!(r.wilson_low <= 0.5 && 0.5 <= r.wilson_high, "{r:?}");
    assert!((r.fraction - 0.5).abs() <= 0.02);
}

#[test]
fn ball_of_diameter_radius_is_everything() {
    let r = ball_volume_mc(&lines_in_space(), FRAC_PI_2, NormSpec::OPERATOR, 2000, 17).unwrap();
    assert!(r.wilson_low >= 0.99 - 1e-12, "{r:?}");
}

#[test]
fn ball_volume_scales_with_dimension() {
    let space = lines_in_space();
    let big = ball_volume_mc(&space, FRAC_PI_4, NormSpec::OPERATOR, 40_000, 19).unwrap();
    let small = ball_volume_mc(&space, FRAC_PI_4 / 2.0, NormSpec::OPERATOR, 40_000, 19).unwrap();
    let ratio = big.fraction / small.fraction;
    assert!((2.0..=8.0).contains(&ratio), "{ratio}");
}

#[test]
fn wilson_interval_brackets_the_estimate() {
    let (lo, hi) = wilson_interval(30, 100, 2.576);
    assert!(lo < 0.3 && 0.3 < hi && lo > 0.0 && hi < 1.0);
    let (lo, hi) = wilson_interval(0, 50, 2.576);
    assert_eq!(lo, 0.0);
    assert!(hi > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_holds_on_random_plane_sets(
        pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..=10),
        extra in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 0..=6),
        eps in 0.1f64..3.0,
    ) {
        let all: Vec<(f64, f64)> = pts.iter().chain(&extra).copied().collect();
        let dist: Vec<Vec<f64>> = all
            .iter()
            .map(|a| all.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
            .collect();
        let metric = FiniteMetric::new(dist).unwrap().with_members((0..pts.len()).collect()).unwrap();
        let r = audit_chain(&metric, eps).unwrap();
        prop_assert!(r.holds);
        prop_assert!(r.n_prime <= r.n && r.n <= r.n_double_prime);
        prop_assert!(r.n_double_prime <= r.n_tilde && r.n_tilde <= r.n_prime_half);
    }

    #[test]
    fn packings_are_strictly_separated(seed in any::<u64>(), eps in 0.3f64..1.5) {
        let opts = PackOptions { budget: 300, ..PackOptions::with_seed(seed) };
        let r = greedy_pack(&lines_in_space(), eps, NormSpec::OPERATOR, &opts).unwrap();
        prop_assert!(r.separated);
        prop_assert!(r.min_pairwise.is_none_or(|m| m > eps));
    }
}
