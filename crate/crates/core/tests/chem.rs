use proptest::prelude::*;
use rand::seq::SliceRandom;
use uqmol::chem::{
    canonical_smiles, circular_fingerprint, heuristic_logp, murcko_scaffold, parse_smiles,
    tanimoto_distance, to_smiles, Fingerprint, Molecule,
};
use uqmol::data::synth::{generate_smiles, Profile};
use uqmol::seed;

fn molecule(profile: Profile, s: u64) -> Molecule {
    let smiles = generate_smiles(1, profile, s).pop().unwrap();
    parse_smiles(&smiles).unwrap()
}

fn shuffled(mol: &Molecule, s: u64) -> Molecule {
    let mut perm: Vec<usize> = (0..mol.atom_count()).collect();
    perm.shuffle(&mut seed::rng(s));
    mol.permuted(&perm).unwrap()
}

fn bits() -> impl Strategy<Value = Fingerprint> {
    proptest::collection::vec(0usize..64, 0..20).prop_map(|b| Fingerprint::from_bits(64, &b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smiles_round_trip_is_isomorphic(s in any::<u64>(), p in any::<u64>()) {
        let mol = shuffled(&molecule(Profile::DrugLike, s), p);
        let text = to_smiles(&mol);
        let back = parse_smiles(&text).unwrap();
        prop_assert_eq!(back.atom_count(), mol.atom_count());
        prop_assert_eq!(back.bond_count(), mol.bond_count());
        prop_assert_eq!(canonical_smiles(&back), canonical_smiles(&mol));
    }

    #[test]
    fn reindexing_leaves_derived_values_unchanged(s in any::<u64>(), p in any::<u64>()) {
        let mol = molecule(Profile::DrugLike, s);
        let perm = shuffled(&mol, p);
        let (a, b) = (heuristic_logp(&mol).unwrap(), heuristic_logp(&perm).unwrap());
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        prop_assert_eq!(
            circular_fingerprint(&mol, 2048, 3).unwrap(),
            circular_fingerprint(&perm, 2048, 3).unwrap()
        );
        prop_assert_eq!(murcko_scaffold(&mol), murcko_scaffold(&perm));
        prop_assert_eq!(canonical_smiles(&mol), canonical_smiles(&perm));
    }

    #[test]
    fn tanimoto_symmetric_and_zero_only_on_identical(a in bits(), b in bits()) {
        let ab = tanimoto_distance(&a, &b).unwrap();
        let ba = tanimoto_distance(&b, &a).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab == 0.0, a == b);
        prop_assert_eq!(tanimoto_distance(&a, &a).unwrap(), 0.0);
    }
}

#[test]
fn fingerprints_identical_across_thread_counts() {
    use rayon::prelude::*;
    let smiles = generate_smiles(300, Profile::DrugLike, 11);
    let compute = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                smiles
                    .par_iter()
                    .map(|s| {
                        let m = parse_smiles(s).unwrap();
                        (
                            circular_fingerprint(&m, 2048, 3).unwrap(),
                            murcko_scaffold(&m),
                        )
                    })
                    .collect::<Vec<_>>()
            })
    };
    assert_eq!(compute(1), compute(4));
}
