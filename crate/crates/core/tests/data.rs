use std::collections::HashSet;

use proptest::prelude::*;
use uqmol::chem::{murcko_scaffold, parse_smiles};
use uqmol::data::synth::{bundled, generate_smiles, Profile};
use uqmol::data::{random_split, scaffold_split, scaffold_split_from_keys, Dataset, Record};

fn dataset(n: usize, s: u64) -> Dataset {
    let mut smiles = generate_smiles(n * 2, Profile::Small, s);
    smiles.sort();
    smiles.dedup();
    let records = smiles
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(i, smiles)| Record {
            smiles,
            target: i as f64,
        })
        .collect();
    Dataset::new("gen", "u", records).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_split_partitions(n in 10usize..300, s in any::<u64>()) {
        let d = dataset(n, s);
        let split = random_split(&d, s).unwrap();
        prop_assert!(split.is_partition_of(d.len()));
        prop_assert_eq!(split, random_split(&d, s).unwrap());
    }

    #[test]
    fn scaffold_keys_never_straddle_partitions(keys in proptest::collection::vec(0u8..12, 10..200)) {
        let keys: Vec<String> = keys.iter().map(|k| format!("k{k}")).collect();
        let split = scaffold_split_from_keys(&keys).unwrap();
        prop_assert!(split.is_partition_of(keys.len()));
        let sets: Vec<HashSet<&str>> = [&split.train, &split.validation, &split.test]
            .iter()
            .map(|part| part.iter().map(|&i| keys[i].as_str()).collect())
            .collect();
        for i in 0..3 {
            for j in i + 1..3 {
                prop_assert!(sets[i].is_disjoint(&sets[j]));
            }
        }
    }
}

#[test]
fn bundled_scaffold_split_is_disjoint_by_scaffold() {
    let d = bundled("lipophilicity").unwrap();
    let split = scaffold_split(&d).unwrap();
    assert!(split.is_partition_of(d.len()));
    let key = |i: &usize| murcko_scaffold(&parse_smiles(&d.records()[*i].smiles).unwrap());
    let train: HashSet<String> = split.train.iter().map(key).collect();
    let val: HashSet<String> = split.validation.iter().map(key).collect();
    let test: HashSet<String> = split.test.iter().map(key).collect();
    assert!(train.is_disjoint(&val) && train.is_disjoint(&test) && val.is_disjoint(&test));
}

/// Pins the seeded shuffle so a change of generator or algorithm is caught.
#[test]
fn random_split_is_pinned() {
    let d = dataset(20, 3);
    let split = random_split(&d, 0).unwrap();
    assert_eq!(split.train, [0, 2, 4, 6, 9, 10, 12, 14, 15, 16]);
    assert_eq!(split.validation, [5, 7, 8, 11]);
    assert_eq!(split.test, [1, 3, 13, 17, 18, 19]);
    assert_ne!(split.train, random_split(&d, 1).unwrap().train);
}
