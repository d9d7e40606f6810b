use super::*;
use crate::pseudo_normal::{normal_form, transform_manifold, Manifold};
use crate::testutil::{random_zzbar, zzbar_series};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn wser(dim: usize, cap: u32, cs: &[C]) -> FormalSeries {
    FormalSeries::from_terms(dim, cap, cs.iter().enumerate().map(|(k, c)| (Monomial::slot_pow(W_SLOT, k as u32), c.clone())))
}

#[test]
fn trivial_linear_auto_is_identity() {
    let h = make_linear_auto(&AutoParams::scalar(FormalSeries::one(2, 6))).unwrap();
    assert!(h.is_identity());
}

#[test]
fn constant_scaling() {
    let c = coeff::complex_ratio((1, 2), (3, 1));
    let h = make_linear_auto(&AutoParams::scalar(FormalSeries::constant(3, 5, c.clone()))).unwrap();
    assert_eq!(h, HoloMap::scaling(3, 5, &c));
}

#[test]
fn one_plus_w() {
    let h = make_linear_auto(&AutoParams::scalar(wser(2, 4, &[coeff::one(), coeff::one()]))).unwrap();
    let z0 = FormalSeries::z(2, 4, 0);
    assert_eq!(h.f(0), &z0.add(&z0.mul(&FormalSeries::w(2, 4)).unwrap()).unwrap());
    // w³ has weight 6 and falls outside cap 4
    assert_eq!(h.g(), &wser(2, 4, &[coeff::zero(), coeff::one(), coeff::int(2)]));
    assert!(quadric_residual(&h).unwrap().is_zero());
}

#[test]
fn constant_a() {
    let (dim, cap) = (2, 6);
    let mut p = AutoParams::scalar(FormalSeries::one(dim, cap));
    p.a[0] = FormalSeries::constant(dim, cap, coeff::ratio(1, 2));
    let h = make_full_auto(&p).unwrap();
    assert!(quadric_residual(&h).unwrap().is_zero());
    assert!(!h.is_identity());
}

#[test]
fn full_family_rejects_bad_a() {
    let mut p = AutoParams::scalar(FormalSeries::one(2, 4));
    assert!(make_full_auto(&p).is_err());
    p.a[1] = FormalSeries::constant(2, 4, coeff::one());
    assert!(make_full_auto(&p).is_err());
    p.a[1] = FormalSeries::w(2, 4);
    assert!(make_full_auto(&p).is_err());
}

#[test]
fn moebius_display_is_reflected_family_member() {
    let (dim, cap) = (3, 6);
    let alpha = wser(dim, cap, &[coeff::complex_ratio((1, 3), (1, 5)), coeff::int(2), coeff::i_unit()]);
    for j in 0..dim {
        let mut p = AutoParams::scalar(FormalSeries::one(dim, cap));
        p.a[j] = alpha.clone();
        p.u[j][j] = FormalSeries::constant(dim, cap, coeff::int(-1));
        let t = moebius(dim, cap, j, &alpha).unwrap();
        assert_eq!(make_full_auto(&p).unwrap(), t);
        assert!(quadric_residual(&t).unwrap().is_zero());
    }
}

#[test]
fn random_members_preserve_quadric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in [2, 3] {
        for family in [Family::Linear, Family::Full] {
            for _ in 0..4 {
                let p = random_params(&mut rng, dim, 6, family);
                assert!(is_unitary(&p.u));
                let h = make_auto(&p, family).unwrap();
                assert!(quadric_residual(&h).unwrap().is_zero());
            }
        }
    }
}

#[test]
fn composition_preserves_quadric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = make_auto(&random_params(&mut rng, 2, 6, Family::Full), Family::Full).unwrap();
    let b = make_auto(&random_params(&mut rng, 2, 6, Family::Linear), Family::Linear).unwrap();
    assert!(quadric_residual(&a.compose(&b).unwrap()).unwrap().is_zero());
    assert!(quadric_residual(&b.compose(&a).unwrap()).unwrap().is_zero());
}

#[test]
fn normalized_map_needs_nothing() {
    let e = random_zzbar(&mut ChaCha8Rng::seed_from_u64(2), 2, 6, 3, 5);
    let h = normal_form(&Manifold::new(e).unwrap()).unwrap().map;
    let n = normalize_map(&h).unwrap();
    assert!(n.factors.is_empty());
    assert!(n.t.is_identity());
    assert_eq!(n.h, h);
}

#[test]
fn scaling_is_undone() {
    let c = coeff::complex_ratio((2, 1), (-1, 3));
    let n = normalize_map(&HoloMap::scaling(2, 6, &c)).unwrap();
    assert!(n.h.is_identity());
    let inv = coeff::inv(&c).unwrap();
    assert_eq!(n.t, HoloMap::scaling(2, 6, &inv));
}

#[test]
fn inadmissible_linear_part() {
    let f = vec![FormalSeries::z(2, 4, 0).scale(&coeff::int(2)), FormalSeries::z(2, 4, 1)];
    let h = HoloMap::new(f, FormalSeries::w(2, 4)).unwrap();
    assert!(normalize_map(&h).is_err());
}

#[test]
fn lowest_order_examples() {
    assert_eq!(lowest_vanishing_order(&FormalSeries::zero(2, 6)), Vanishing::BeyondCap(7));
    let p = FormalSeries::monomial(2, 6, Monomial::new(&[2, 0], &[0, 2], 0), coeff::one());
    assert_eq!(lowest_vanishing_order(&p), Vanishing::Order(4));
}

fn normalized_map(seed: u64, dim: usize, cap: u32) -> HoloMap {
    let e = random_zzbar(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), dim, cap, 3, 4);
    normal_form(&Manifold::new(e).unwrap()).unwrap().map
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn recovers_normalized_factor(seed in 0u64..1000, full in any::<bool>(), dim in 2usize..4) {
        let family = if full { Family::Full } else { Family::Linear };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hn = normalized_map(seed, dim, 5);
        let auto = make_auto(&random_params(&mut rng, dim, 5, family), family).unwrap();
        let h = auto.compose(&hn).unwrap();
        let n = normalize_map(&h).unwrap();
        prop_assert!(check_map_normalization(&n.h).is_empty());
        prop_assert_eq!(&n.h, &hn);
        prop_assert_eq!(n.t.compose(&h).unwrap(), n.h);
        prop_assert!(quadric_residual(&n.t).unwrap().is_zero());
    }

    #[test]
    fn order_is_invariant(seed in 0u64..1000, e in zzbar_series(2, 6, 3, 3)) {
        let m = Manifold::new(e).unwrap();
        let r = normal_form(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let family = if seed % 2 == 0 { Family::Full } else { Family::Linear };
        let auto = make_auto(&random_params(&mut rng, 2, 6, family), family).unwrap();
        let image = transform_manifold(&Manifold::new(r.phi.clone()).unwrap(), &auto).unwrap();
        let again = normal_form(&image).unwrap();
        // Infinite (exact quadric) and BeyondCap both mean no term through the cap
        let finite = |v: Vanishing| match v {
            Vanishing::Order(k) => Some(k),
            _ => None,
        };
        prop_assert_eq!(finite(again.s), finite(r.s));
    }
}
