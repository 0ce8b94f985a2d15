use proptest::prelude::*;
use uqmol::stats::{wsrt_z, Direction};

/// Integer-valued paired scores so shifts and scalings stay exact.
fn paired() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..30).prop_flat_map(|n| {
        let v = || proptest::collection::vec((-20i32..20).prop_map(f64::from), n);
        (v(), v())
    })
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::HigherBetter), Just(Direction::LowerBetter)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn z_invariant_under_shift_and_scale((a, b) in paired(), d in direction(), c in -50i32..50, k in 1i32..9) {
        let z = wsrt_z(&a, &b, d).unwrap();
        let shift = |v: &[f64]| v.iter().map(|x| x + f64::from(c)).collect::<Vec<_>>();
        let scale = |v: &[f64]| v.iter().map(|x| x * f64::from(k)).collect::<Vec<_>>();
        let zs = wsrt_z(&shift(&a), &shift(&b), d).unwrap();
        let zk = wsrt_z(&scale(&a), &scale(&b), d).unwrap();
        prop_assert_eq!((z.z_si, z.z_standard), (zs.z_si, zs.z_standard));
        prop_assert_eq!((z.z_si, z.z_standard), (zk.z_si, zk.z_standard));
    }

    #[test]
    fn z_variants_share_sign_and_swap_negates((a, b) in paired(), d in direction()) {
        let z = wsrt_z(&a, &b, d).unwrap();
        let swapped = wsrt_z(&b, &a, d).unwrap();
        match (z.z_si, z.z_standard) {
            (Some(si), Some(st)) => {
                prop_assert_eq!(si.signum(), st.signum());
                prop_assert_eq!(si == 0.0, st == 0.0);
                prop_assert!((swapped.z_si.unwrap() + si).abs() < 1e-12);
                prop_assert!((swapped.z_standard.unwrap() + st).abs() < 1e-12);
            }
            (None, None) => prop_assert_eq!(a, b),
            other => prop_assert!(false, "mismatched variants {other:?}"),
        }
    }
}
