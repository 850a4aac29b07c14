use metric_entropy::groups::{haar_sample, project_tangent, random_tangent, random_tangent_on_sphere};
use metric_entropy::matcore::{expm_skew, logm_unitary, C64};
use metric_entropy::{DenseMatrix, Error, GroupSpec, NormSpec, Stream};
use proptest::prelude::*;
use rand::Rng;

fn all_groups() -> Vec<GroupSpec> {
    let mut gs: Vec<GroupSpec> = (1..=4).map(|n| GroupSpec::unitary(n).unwrap()).collect();
    gs.extend((2..=5).map(|n| GroupSpec::special_orthogonal(n).unwrap()));
    gs
}

fn gaussian(g: GroupSpec, rng: &mut impl Rng) -> DenseMatrix {
    let n = g.n();
    if g.is_real() {
        DenseMatrix::from_fn_real(n, |_, _| rng.random_range(-1.0..1.0))
    } else {
        DenseMatrix::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }
}

/// Asymptotic two-sample Kolmogorov-Smirnov p-value.
fn ks_p_value(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let q: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as i64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (2.0 * q).clamp(0.0, 1.0)
}

#[test]
fn lie_dimension_matches_the_basis() {
    for g in all_groups() {
        let n = g.n();
        let expected = if g.is_real() { n * (n - 1) / 2 } else { n * n };
        assert_eq!(g.lie_dim(), expected);
        assert_eq!(g.lie_basis().len(), expected, "{}", g.label());
    }
}

#[test]
fn circle_samples_average_out() {
    let g = GroupSpec::unitary(1).unwrap();
    let root = Stream::new(17).child("circle");
    let mut sum = C64::new(0.0, 0.0);
    let count = 10_000;
    for i in 0..count {
        let z = haar_sample(g, &mut root.index(i).rng()).matrix().get(0, 0);
        assert!((z.norm() - 1.0).abs() < 1e-14);
        sum += z;
    }
    assert!((sum / count as f64).norm() <= 0.05);
}

#[test]
fn left_translation_preserves_the_trace_law() {
    for g in [GroupSpec::unitary(3).unwrap(), GroupSpec::special_orthogonal(3).unwrap()] {
        let root = Stream::new(23).child(&g.label());
        let v = haar_sample(g, &mut root.child("v").rng());
        let count = 10_000;
        let plain: Vec<f64> = (0..count)
            .map(|i| haar_sample(g, &mut root.child("a").index(i).rng()).matrix().trace().re)
            .collect();
        let moved: Vec<f64> = (0..count)
            .map(|i| {
                let u = haar_sample(g, &mut root.child("b").index(i).rng());
                v.compose(&u).matrix().trace().re
            })
            .collect();
        let p = ks_p_value(plain, moved);
        assert!(p > 0.001, "{}: p = {p}", g.label());
    }
}

#[test]
fn rotation_samples_have_unit_determinant() {
    let g = GroupSpec::special_orthogonal(3).unwrap();
    let root = Stream::new(3).child("so3");
    for i in 0..500 {
        let u = haar_sample(g, &mut root.index(i).rng());
        assert!(u.matrix().is_real());
        assert!((u.matrix().det() - C64::new(1.0, 0.0)).norm() <= 1e-10);
    }
}

#[test]
fn projection_kills_hermitian_and_fixes_skew_input() {
    let g = GroupSpec::unitary(3).unwrap();
    let mut rng = Stream::new(1).rng();
    let m = gaussian(g, &mut rng);
    let herm = m.hermitian_part();
    assert!(project_tangent(g, &herm).unwrap().matrix().max_abs() < 1e-15);
    let skew = m.skew_part();
    assert!(project_tangent(g, &skew).unwrap().matrix().dist_max(&skew) < 1e-15);
}

#[test]
fn projection_rejects_wrong_size() {
    let g = GroupSpec::unitary(3).unwrap();
    assert!(matches!(
        project_tangent(g, &DenseMatrix::identity(2)),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn tangent_samples_are_valid_members_of_the_algebra() {
    for g in all_groups() {
        let x = random_tangent(g, NormSpec::FROBENIUS, 1.5, &mut Stream::new(4).rng()).unwrap();
        let skew = &x.matrix().adjoint() + x.matrix();
        assert!(skew.max_abs() <= 1e-12);
        assert_eq!(x.matrix().is_real(), g.is_real());
    }
    let g = GroupSpec::unitary(2).unwrap();
    assert!(random_tangent(g, NormSpec::OPERATOR, 0.0, &mut Stream::new(4).rng()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn haar_samples_satisfy_membership(idx in 0usize..8, seed in any::<u64>()) {
        let g = all_groups()[idx];
        let u = haar_sample(g, &mut Stream::new(seed).rng());
        let gram = &u.matrix().adjoint() * u.matrix();
        prop_assert!(gram.dist_max(&DenseMatrix::identity(g.n())) <= 1e-10);
        if g.is_real() {
            prop_assert!((u.matrix().det().re - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn projection_is_orthogonal_and_idempotent(idx in 0usize..8, seed in any::<u64>()) {
        let g = all_groups()[idx];
        let m = gaussian(g, &mut Stream::new(seed).rng());
        let pm = project_tangent(g, &m).unwrap();
        let again = project_tangent(g, pm.matrix()).unwrap();
        prop_assert!(again.matrix().dist_max(pm.matrix()) <= 1e-12);
        let rest = &m - pm.matrix();
        prop_assert!(rest.inner(pm.matrix()).abs() <= 1e-10);
    }

    #[test]
    fn tangent_samples_stay_in_the_ball(idx in 0usize..8, seed in any::<u64>(), radius in 1e-3f64..10.0, p in 1.0f64..9.0) {
        let g = all_groups()[idx];
        let norm = NormSpec::new(p).unwrap();
        let x = random_tangent(g, norm, radius, &mut Stream::new(seed).rng()).unwrap();
        prop_assert!(x.norm(norm).unwrap() <= radius * (1.0 + 1e-12));
        let y = random_tangent_on_sphere(g, norm, radius, &mut Stream::new(seed).rng()).unwrap();
        prop_assert!((y.norm(norm).unwrap() - radius).abs() <= 1e-12 * radius);
    }

    #[test]
    fn operator_ball_below_pi_round_trips(idx in 0usize..8, seed in any::<u64>()) {
        let g = all_groups()[idx];
        let x = random_tangent(g, NormSpec::OPERATOR, std::f64::consts::PI * (1.0 - 1e-6), &mut Stream::new(seed).rng()).unwrap();
        let back = logm_unitary(&expm_skew(&x).unwrap()).unwrap();
        prop_assert!(back.matrix().dist_max(x.matrix()) <= 1e-8);
    }
}
