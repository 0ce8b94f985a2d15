use std::collections::HashMap;
use std::fmt;

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, MIN_SPLIT_SIZE};
use crate::chem::murcko_scaffold;

/// Train / validation / test fractions.
pub const SPLIT_FRACTIONS: [f64; 3] = [0.5, 0.2, 0.3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Random,
    Scaffold,
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitKind::Random => "random",
            SplitKind::Scaffold => "scaffold",
        })
    }
}

/// A partition of record indices. Each index list is sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub kind: SplitKind,
    pub seed: u64,
    pub train: Vec<usize>,
    #[serde(rename = "val")]
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitAssignment {
    /// `random-<seed>` or `scaffold`.
    pub fn id(&self) -> String {
        match self.kind {
            SplitKind::Random => format!("random-{}", self.seed),
            SplitKind::Scaffold => "scaffold".to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A split with an empty validation or test partition.
    pub fn is_degenerate(&self) -> bool {
        self.train.is_empty() || self.validation.is_empty() || self.test.is_empty()
    }

    /// Whether the three sets partition `0..n` exactly.
    pub fn is_partition_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.validation).chain(&self.test) {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("split serialises")
    }

    pub fn from_json(text: &str) -> Result<SplitAssignment, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn check_size(n: usize) -> Result<(), DataError> {
    if n < MIN_SPLIT_SIZE {
        return Err(DataError::TooSmall {
            n,
            min: MIN_SPLIT_SIZE,
        });
    }
    Ok(())
}

/// Partition sizes for `n` records: train and validation are rounded,
/// test takes the remainder.
fn partition_sizes(n: usize) -> [usize; 3] {
    let train = (n as f64 * SPLIT_FRACTIONS[0]).round() as usize;
    let val = (n as f64 * SPLIT_FRACTIONS[1]).round() as usize;
    [train, val, n - train - val]
}

/// Shuffle `0..n` with ChaCha8 seeded from `seed` (Fisher-Yates as
/// implemented by `rand` 0.8) and cut the permutation 50/20/30.
pub fn random_split(d: &Dataset, seed: u64) -> Result<SplitAssignment, DataError> {
    let n = d.len();
    check_size(n)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut crate::seed::rng(seed));
    let [tr, va, _] = partition_sizes(n);
    let sorted = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    };
    Ok(SplitAssignment {
        kind: SplitKind::Random,
        seed,
        train: sorted(&perm[..tr]),
        validation: sorted(&perm[tr..tr + va]),
        test: sorted(&perm[tr + va..]),
    })
}

/// Group molecules by Murcko scaffold and bin-pack the clusters.
pub fn scaffold_split(d: &Dataset) -> Result<SplitAssignment, DataError> {
    check_size(d.len())?;
    let keys: Vec<String> = d.molecules()?.iter().map(murcko_scaffold).collect();
    scaffold_split_from_keys(&keys)
}

/// Bin-pack clusters of equal keys into train/validation/test.
///
/// Clusters are visited largest first (ties by first occurrence) and each
/// goes to the partition with the largest remaining capacity
/// `target - assigned`. Equal capacities prefer train, then validation,
/// then test.
pub fn scaffold_split_from_keys(keys: &[String]) -> Result<SplitAssignment, DataError> {
    let n = keys.len();
    check_size(n)?;
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, k) in keys.iter().enumerate() {
        let c = *index.entry(k.as_str()).or_insert_with(|| {
            clusters.push(Vec::new());
            clusters.len() - 1
        });
        clusters[c].push(i);
    }
    // stable sort keeps first-occurrence order among equal sizes
    clusters.sort_by_key(|c| std::cmp::Reverse(c.len()));

    let targets: Vec<f64> = SPLIT_FRACTIONS.iter().map(|f| f * n as f64).collect();
    let mut bins: [Vec<usize>; 3] = Default::default();
    for cluster in clusters {
        let mut best = 0;
        let mut best_room = f64::NEG_INFINITY;
        for (b, bin) in bins.iter().enumerate() {
            let room = targets[b] - bin.len() as f64;
            if room > best_room {
                best = b;
                best_room = room;
            }
        }
        bins[best].extend(cluster);
    }
    for bin in &mut bins {
        bin.sort_unstable();
    }
    let [train, validation, test] = bins;
    let split = SplitAssignment {
        kind: SplitKind::Scaffold,
        seed: 0,
        train,
        validation,
        test,
    };
    if split.is_degenerate() {
        warn!(
            "degenerate scaffold split: sizes {}/{}/{}",
            split.train.len(),
            split.validation.len(),
            split.test.len()
        );
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Record;
    use std::collections::BTreeSet;

    fn key_set<'a>(keys: &'a [String], idx: &[usize]) -> BTreeSet<&'a str> {
        idx.iter().map(|&i| keys[i].as_str()).collect()
    }

    fn dataset(n: usize) -> Dataset {
        let records = (0..n)
            .map(|i| Record {
                smiles: "C".repeat(i + 1),
                target: i as f64,
            })
            .collect();
        Dataset::new("chain", "", records).unwrap()
    }

    #[test]
    fn random_sizes_exact() {
        let d = dataset(100);
        for seed in 0..4 {
            let s = random_split(&d, seed).unwrap();
            assert_eq!(
                (s.train.len(), s.validation.len(), s.test.len()),
                (50, 20, 30)
            );
            assert!(s.is_partition_of(100));
            assert_eq!(s, random_split(&d, seed).unwrap());
        }
    }

    #[test]
    fn random_seeds_give_distinct_test_sets() {
        let d = dataset(1000);
        let tests: Vec<Vec<usize>> = (0..8).map(|s| random_split(&d, s).unwrap().test).collect();
        for i in 0..8 {
            for j in i + 1..8 {
                assert_ne!(tests[i], tests[j]);
            }
        }
    }

    #[test]
    fn too_small() {
        assert!(matches!(
            random_split(&dataset(9), 0),
            Err(DataError::TooSmall { n: 9, .. })
        ));
    }

    #[test]
    fn greedy_packing_example() {
        let mut keys = Vec::new();
        keys.extend(std::iter::repeat_n("a".to_string(), 5));
        keys.extend(std::iter::repeat_n("b".to_string(), 2));
        keys.extend(std::iter::repeat_n("c".to_string(), 3));
        let s = scaffold_split_from_keys(&keys).unwrap();
        assert_eq!(s.train, vec![0, 1, 2, 3, 4]);
        assert_eq!(s.validation, vec![5, 6]);
        assert_eq!(s.test, vec![7, 8, 9]);
    }

    #[test]
    fn single_scaffold_is_degenerate() {
        let keys = vec!["x".to_string(); 12];
        let s = scaffold_split_from_keys(&keys).unwrap();
        assert_eq!(s.train.len(), 12);
        assert!(s.validation.is_empty() && s.test.is_empty());
        assert!(s.is_degenerate());
    }

    #[test]
    fn scaffold_keys_do_not_span_partitions() {
        let smiles = [
            "c1ccccc1",
            "Cc1ccccc1",
            "CCc1ccccc1",
            "Oc1ccccc1",
            "C1CCCCC1",
            "CC1CCCCC1",
            "c1ccncc1",
            "Cc1ccncc1",
            "CCCC",
            "CCO",
            "c1ccc2ccccc2c1",
            "C1CC1",
            "NC1CC1",
            "c1ccoc1",
            "Cc1ccoc1",
        ];
        let d = Dataset::new(
            "s",
            "",
            smiles
                .iter()
                .map(|s| Record {
                    smiles: s.to_string(),
                    target: 0.0,
                })
                .collect(),
        )
        .unwrap();
        let s = scaffold_split(&d).unwrap();
        assert!(s.is_partition_of(d.len()));
        let keys: Vec<String> = d.molecules().unwrap().iter().map(murcko_scaffold).collect();
        let sets = [
            key_set(&keys, &s.train),
            key_set(&keys, &s.validation),
            key_set(&keys, &s.test),
        ];
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(sets[i].is_disjoint(&sets[j]));
            }
        }
    }

    #[test]
    fn manifest_json_round_trip() {
        let s = random_split(&dataset(20), 3).unwrap();
        let text = s.to_json();
        assert!(text.contains("\"kind\": \"random\"") && text.contains("\"val\""));
        assert_eq!(SplitAssignment::from_json(&text).unwrap(), s);
    }
}
