use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use metric_entropy::groups::{haar_sample, random_tangent};
use metric_entropy::matcore::{expm_skew, Frame, C64};
use metric_entropy::metrics::*;
use metric_entropy::{DenseMatrix, Family, Field, GroupElement, GroupSpec, SpaceSpec, Stream, SubgroupSpec, TangentVector};
use proptest::prelude::*;

fn unitary(n: usize) -> GroupSpec {
    GroupSpec::unitary(n).unwrap()
}

fn scalar(z: C64) -> GroupElement {
    GroupElement::new(unitary(1), DenseMatrix::diagonal(&[z])).unwrap()
}

fn rotation(angle: f64) -> GroupElement {
    let (s, c) = angle.sin_cos();
    let m = DenseMatrix::from_real_rows(&[vec![c, -s], vec![s, c]]).unwrap();
    GroupElement::new(GroupSpec::special_orthogonal(2).unwrap(), m).unwrap()
}

fn line(n: usize, coords: &[f64]) -> Frame {
    let col: Vec<C64> = (0..n).map(|i| C64::new(coords.get(i).copied().unwrap_or(0.0), 0.0)).collect();
    Frame::from_columns(n, &[col], Field::Real).unwrap()
}

fn norms() -> [NormSpec; 4] {
    [NormSpec::TRACE, NormSpec::FROBENIUS, NormSpec::new(3.0).unwrap(), NormSpec::OPERATOR]
}

/// A random element of H, reached by exponentiating a combination of its basis.
fn subgroup_element(space: &SpaceSpec, stream: Stream) -> GroupElement {
    let mut rng = stream.rng();
    let g = space.group();
    let mut m = DenseMatrix::zeros(g.n());
    for b in space.h_basis() {
        m = &m + &b.scale(rand::Rng::random_range(&mut rng, -2.0..2.0));
    }
    let m = if g.is_real() { m.real_part() } else { m };
    expm_skew(&TangentVector::new(g, m).unwrap()).unwrap()
}

#[test]
fn extrinsic_distance_of_simple_pairs() {
    let one = scalar(C64::new(1.0, 0.0));
    let minus = scalar(C64::new(-1.0, 0.0));
    assert_eq!(extrinsic_dist(&one, &one, NormSpec::OPERATOR).unwrap(), 0.0);
    assert!((extrinsic_dist(&one, &minus, NormSpec::OPERATOR).unwrap() - 2.0).abs() < 1e-15);
    let other = GroupSpec::unitary(2).unwrap().identity();
    assert!(extrinsic_dist(&one, &other, NormSpec::OPERATOR).is_err());
}

#[test]
fn half_circle_has_length_pi() {
    let one = scalar(C64::new(1.0, 0.0));
    let minus = scalar(C64::new(-1.0, 0.0));
    assert!((intrinsic_dist(&one, &minus, NormSpec::OPERATOR).unwrap() - PI).abs() < 1e-15);
}

#[test]
fn one_parameter_arcs_realize_the_norm() {
    let root = Stream::new(2).child("arc");
    for (i, g) in [unitary(3), GroupSpec::special_orthogonal(4).unwrap()].into_iter().enumerate() {
        for (j, p) in norms().into_iter().enumerate() {
            let x = random_tangent(g, NormSpec::OPERATOR, PI, &mut root.index((10 * i + j) as u64).rng()).unwrap();
            let e = expm_skew(&x).unwrap();
            let d = intrinsic_dist(&g.identity(), &e, p).unwrap();
            assert!((d - x.norm(p).unwrap()).abs() <= 1e-9, "{} p={p}", g.label());
        }
    }
}

#[test]
fn operator_chord_matches_arc_on_haar_pairs() {
    let root = Stream::new(6).child("chord");
    for n in 2..=4 {
        for i in 0..1000 {
            let s = root.child(&n.to_string()).index(i);
            let u = haar_sample(unitary(n), &mut s.child("u").rng());
            let v = haar_sample(unitary(n), &mut s.child("v").rng());
            let rho = intrinsic_dist(&u, &v, NormSpec::OPERATOR).unwrap();
            let chord = extrinsic_dist(&u, &v, NormSpec::OPERATOR).unwrap();
            assert!((chord - 2.0 * (rho / 2.0).sin()).abs() <= 1e-9);
        }
    }
}

#[test]
fn geodesic_endpoints_and_midpoint() {
    let root = Stream::new(8).child("geo");
    for g in [unitary(3), GroupSpec::special_orthogonal(3).unwrap()] {
        let u = haar_sample(g, &mut root.child("u").rng());
        let v = haar_sample(g, &mut root.child("v").rng());
        let start = geodesic_point(&u, &v, 0.0).unwrap().point;
        let end = geodesic_point(&u, &v, 1.0).unwrap().point;
        assert!(start.matrix().dist_max(u.matrix()) <= 1e-10);
        assert!(end.matrix().dist_max(v.matrix()) <= 1e-10);
        let m = geodesic_point(&u, &v, 0.5).unwrap().point;
        for p in norms() {
            let whole = intrinsic_dist(&u, &v, p).unwrap();
            assert!((intrinsic_dist(&u, &m, p).unwrap() - whole / 2.0).abs() <= 1e-9);
            assert!((intrinsic_dist(&m, &v, p).unwrap() - whole / 2.0).abs() <= 1e-9);
        }
    }
    assert!(geodesic_point(&u1(), &u1(), 1.5).is_err());
}

fn u1() -> GroupElement {
    unitary(1).identity()
}

#[test]
fn antipodal_midpoint_takes_the_principal_branch() {
    let minus = scalar(C64::new(-1.0, 0.0));
    let mid = geodesic_point(&u1(), &minus, 0.5).unwrap();
    assert!(mid.nonunique);
    assert!((mid.point.matrix().get(0, 0) - C64::new(0.0, 1.0)).norm() < 1e-15);
    let q = scalar(C64::new(0.0, 1.0));
    assert!(!geodesic_point(&u1(), &q, 0.5).unwrap().nonunique);
}

#[test]
fn sampled_geodesic_has_the_right_length() {
    let g = unitary(3);
    let x = random_tangent(g, NormSpec::OPERATOR, 3.0, &mut Stream::new(12).rng()).unwrap();
    let points: Vec<GroupElement> = (0..64).map(|k| expm_skew(&x.scale(k as f64 / 63.0)).unwrap()).collect();
    for p in norms() {
        let len = discrete_path_length(&points, p).unwrap();
        assert!((len - x.norm(p).unwrap()).abs() <= 1e-9);
    }
    let ends = [points[0].clone(), points[63].clone()];
    let chord = discrete_path_length(&ends, NormSpec::OPERATOR).unwrap();
    assert_eq!(chord, intrinsic_dist(&ends[0], &ends[1], NormSpec::OPERATOR).unwrap());
    assert!(discrete_path_length(&ends[..1], NormSpec::OPERATOR).is_err());
}

#[test]
fn lines_at_forty_five_degrees() {
    let space = SpaceSpec::grassmann(Family::SO, 2, 1).unwrap();
    let d = quotient_dist(&space, &rotation(0.0), &rotation(FRAC_PI_4), NormSpec::OPERATOR, &QuotientOptions::default())
        .unwrap();
    assert!((d.value - FRAC_PI_4).abs() < 1e-12);

    let e = line(2, &[1.0, 0.0]);
    let f = line(2, &[FRAC_PI_4.cos(), FRAC_PI_4.sin()]);
    assert!((grassmann_dist(&e, &f).unwrap() - FRAC_PI_4).abs() < 1e-12);
    assert!(grassmann_dist(&e, &e).unwrap().abs() < 1e-12);
    assert!((grassmann_dist(&e, &line(2, &[0.0, 1.0])).unwrap() - FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn non_orthonormal_frames_are_rejected() {
    let col: Vec<C64> = vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)];
    let stretched = Frame::from_columns(2, &[col], Field::Real);
    let rejected = match stretched {
        Err(_) => true,
        Ok(f) => grassmann_dist(&f, &line(2, &[1.0, 0.0])).is_err(),
    };
    assert!(rejected);
}

#[test]
fn phase_circle_quotient() {
    let space = SpaceSpec::unitary_mod_special(2).unwrap();
    let u = unitary(2).identity();
    let v = GroupElement::new(unitary(2), DenseMatrix::diagonal(&[C64::new(0.0, 1.0), C64::new(1.0, 0.0)])).unwrap();
    let d = quotient_dist(&space, &u, &v, NormSpec::OPERATOR, &QuotientOptions::default()).unwrap();
    assert!((d.value - FRAC_PI_4).abs() < 1e-12);
    let generic = quotient_dist_generic(&space, &u, &v, NormSpec::OPERATOR, &QuotientOptions::default()).unwrap();
    assert!((generic.value - FRAC_PI_4).abs() < 1e-6, "{}", generic.value);
}

#[test]
fn same_coset_has_zero_distance() {
    let spaces = [
        SpaceSpec::grassmann(Family::SO, 4, 2).unwrap(),
        SpaceSpec::grassmann(Family::U, 3, 1).unwrap(),
        SpaceSpec::unitary_mod_special(3).unwrap(),
        SpaceSpec::new(unitary(4), SubgroupSpec::TensorFactor { m: 2, k: 2 }).unwrap(),
    ];
    let root = Stream::new(31).child("coset");
    for (i, space) in spaces.iter().enumerate() {
        let s = root.index(i as u64);
        let u = haar_sample(space.group(), &mut s.child("u").rng());
        let h = subgroup_element(space, s.child("h"));
        let uh = u.compose(&h);
        let d = quotient_dist(space, &u, &uh, NormSpec::OPERATOR, &QuotientOptions::with_seed(1)).unwrap();
        assert!(d.value <= 1e-6, "{}: {}", space.id(), d.value);
    }
}

#[test]
fn grassmann_closed_form_agrees_with_minimizer() {
    let root = Stream::new(44).child("g42");
    for family in [Family::U, Family::SO] {
        let space = SpaceSpec::grassmann(family, 4, 2).unwrap();
        for i in 0..10 {
            let s = root.child(&space.id()).index(i);
            let u = haar_sample(space.group(), &mut s.child("u").rng());
            let v = haar_sample(space.group(), &mut s.child("v").rng());
            let closed = quotient_dist(&space, &u, &v, NormSpec::OPERATOR, &QuotientOptions::default()).unwrap();
            assert_eq!(closed.method, QuotientMethod::ClosedFormGrassmann);
            let generic =
                quotient_dist_generic(&space, &u, &v, NormSpec::OPERATOR, &QuotientOptions::with_seed(s.key())).unwrap();
            assert!((closed.value - generic.value).abs() <= 1e-4, "{} vs {}", closed.value, generic.value);
        }
    }
}

#[test]
fn intrinsic_and_extrinsic_differ_by_at_most_half_pi() {
    let root = Stream::new(77).child("ratio");
    for i in 0..500 {
        let g = unitary(1 + (i % 4) as usize);
        let u = haar_sample(g, &mut root.index(i).child("u").rng());
        let v = haar_sample(g, &mut root.index(i).child("v").rng());
        let rho = intrinsic_dist(&u, &v, NormSpec::OPERATOR).unwrap();
        let chord = extrinsic_dist(&u, &v, NormSpec::OPERATOR).unwrap();
        assert!(rho >= chord - 1e-12 && rho <= FRAC_PI_2 * chord + 1e-12);
    }
}

fn arb_group() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        (1usize..=4).prop_map(|n| GroupSpec::unitary(n).unwrap()),
        (2usize..=5).prop_map(|n| GroupSpec::special_orthogonal(n).unwrap()),
    ]
}

fn arb_norm() -> impl Strategy<Value = NormSpec> {
    prop_oneof![Just(NormSpec::OPERATOR), (1.0f64..6.0).prop_map(|p| NormSpec::new(p).unwrap())]
}

fn triple(g: GroupSpec, seed: u64) -> [GroupElement; 3] {
    let s = Stream::new(seed);
    ["a", "b", "c"].map(|l| haar_sample(g, &mut s.child(l).rng()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn group_metrics_satisfy_the_axioms(g in arb_group(), p in arb_norm(), seed in any::<u64>()) {
        let [a, b, c] = triple(g, seed);
        for kind in [MetricKind::Extrinsic, MetricKind::Intrinsic] {
            let ab = distance(kind, &a, &b, p).unwrap();
            let ba = distance(kind, &b, &a, p).unwrap();
            let bc = distance(kind, &b, &c, p).unwrap();
            let ac = distance(kind, &a, &c, p).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-8);
            prop_assert!(ac <= ab + bc + 1e-8);
            prop_assert!(distance(kind, &a, &a, p).unwrap() <= 1e-8);
        }
        prop_assert!(intrinsic_dist(&a, &b, p).unwrap() >= extrinsic_dist(&a, &b, p).unwrap() - 1e-12);
    }

    #[test]
    fn distances_are_bi_invariant(g in arb_group(), p in arb_norm(), seed in any::<u64>()) {
        let [a, b, w] = triple(g, seed);
        let rho = intrinsic_dist(&a, &b, p).unwrap();
        let chord = extrinsic_dist(&a, &b, p).unwrap();
        prop_assert!((intrinsic_dist(&w.compose(&a), &w.compose(&b), p).unwrap() - rho).abs() <= 1e-9);
        prop_assert!((intrinsic_dist(&a.compose(&w), &b.compose(&w), p).unwrap() - rho).abs() <= 1e-9);
        prop_assert!((extrinsic_dist(&w.compose(&a), &w.compose(&b), p).unwrap() - chord).abs() <= 1e-10);
    }

    #[test]
    fn eigenvalue_matching_contracts(g in arb_group(), p in arb_norm(), seed in any::<u64>()) {
        let [a, b, _] = triple(g, seed);
        let m = eigenvalue_matching_distance(&a, &b, p).unwrap();
        prop_assert!(m <= intrinsic_dist(&a, &b, p).unwrap() + 1e-8);
    }

    #[test]
    fn closed_form_quotients_satisfy_the_axioms(idx in 0usize..4, seed in any::<u64>()) {
        let space = [
            SpaceSpec::grassmann(Family::SO, 3, 1).unwrap(),
            SpaceSpec::grassmann(Family::U, 4, 2).unwrap(),
            SpaceSpec::grassmann(Family::SO, 5, 2).unwrap(),
            SpaceSpec::unitary_mod_special(3).unwrap(),
        ][idx].clone();
        let [a, b, c] = triple(space.group(), seed);
        let opts = QuotientOptions::default();
        let q = |x: &GroupElement, y: &GroupElement| quotient_dist(&space, x, y, NormSpec::OPERATOR, &opts).unwrap().value;
        prop_assert!((q(&a, &b) - q(&b, &a)).abs() <= 1e-8);
        prop_assert!(q(&a, &c) <= q(&a, &b) + q(&b, &c) + 1e-8);
        prop_assert!(q(&a, &a) <= 1e-8);
        prop_assert!(q(&a, &b) <= intrinsic_dist(&a, &b, NormSpec::OPERATOR).unwrap() + 1e-8);
    }
}
