//! Circular (Morgan-style) fingerprints.
//!
//! Each atom starts from an invariant of element, heavy degree, hydrogen
//! count, charge, aromaticity and ring membership. Every iteration hashes the
//! atom's previous identifier with the sorted `(bond order, neighbour id)`
//! pairs. An environment is only emitted when its bond set grew and no
//! previously emitted environment covers the same bonds, so a lone atom only
//! contributes its radius-0 bit.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::hash::hash_words;
use super::molecule::Molecule;
use super::ChemError;

pub const DEFAULT_LENGTH: usize = 2048;
pub const DEFAULT_RADIUS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    words: Vec<u64>,
    length: usize,
    radius: usize,
}

impl Fingerprint {
    pub fn empty(length: usize, radius: usize) -> Fingerprint {
        Fingerprint {
            words: vec![0; length.div_ceil(64)],
            length,
            radius,
        }
    }

    /// Build from explicit on-bit positions.
    pub fn from_bits(length: usize, bits: &[usize]) -> Fingerprint {
        let mut fp = Fingerprint::empty(length, 0);
        for &b in bits {
            fp.set(b % length);
        }
        fp
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersection_count(&self, other: &Fingerprint) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_count(&self, other: &Fingerprint) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Positions of set bits in ascending order.
    pub fn on_bits(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let t = w.trailing_zeros() as usize;
                out.push(i * 64 + t);
                w &= w - 1;
            }
        }
        out
    }

    /// Dense 0/1 feature vector.
    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.length)
            .map(|i| f64::from(u8::from(self.get(i))))
            .collect()
    }
}

fn atom_invariant(mol: &Molecule, i: usize) -> u64 {
    let a = &mol.atoms()[i];
    hash_words(&[
        u64::from(a.element.atomic_number()),
        mol.degree(i) as u64,
        u64::from(a.hydrogens),
        (i64::from(a.charge) + 16) as u64,
        u64::from(a.aromatic),
        u64::from(mol.is_ring_atom(i)),
    ])
}

/// Hashed circular fingerprint of `mol`.
pub fn circular_fingerprint(
    mol: &Molecule,
    length: usize,
    radius: usize,
) -> Result<Fingerprint, ChemError> {
    if length < 8 {
        return Err(ChemError::InvalidFingerprintLength(length));
    }
    let n = mol.atom_count();
    let nbonds = mol.bond_count();
    let mut fp = Fingerprint::empty(length, radius);
    let mut ids: Vec<u64> = (0..n).map(|i| atom_invariant(mol, i)).collect();
    for &id in &ids {
        fp.set((id % length as u64) as usize);
    }
    let mut envs: Vec<Vec<bool>> = vec![vec![false; nbonds]; n];
    let mut active = vec![true; n];
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    for r in 1..=radius {
        let mut next_ids = ids.clone();
        let mut next_envs = envs.clone();
        let mut candidates: Vec<(u64, usize)> = Vec::new();
        for i in 0..n {
            if !active[i] {
                continue;
            }
            let mut pairs: Vec<(u64, u64)> = mol
                .neighbors(i)
                .iter()
                .map(|&(nb, b)| (mol.bonds()[b].order.code(), ids[nb]))
                .collect();
            pairs.sort_unstable();
            let mut words = Vec::with_capacity(2 + 2 * pairs.len());
            words.push(r as u64);
            words.push(ids[i]);
            for (o, id) in pairs {
                words.push(o);
                words.push(id);
            }
            next_ids[i] = hash_words(&words);
            let env = &mut next_envs[i];
            for &(nb, b) in mol.neighbors(i) {
                env[b] = true;
                for (k, &flag) in envs[nb].iter().enumerate() {
                    if flag {
                        env[k] = true;
                    }
                }
            }
            if next_envs[i] == envs[i] {
                active[i] = false;
            } else {
                candidates.push((next_ids[i], i));
            }
        }
        // Lowest identifier wins among atoms covering the same bonds, which
        // keeps the result independent of atom numbering.
        candidates.sort_unstable();
        for (id, i) in candidates {
            if seen.insert(next_envs[i].clone()) {
                fp.set((id % length as u64) as usize);
            }
        }
        ids = next_ids;
        envs = next_envs;
    }
    Ok(fp)
}

/// Log-scaled Tanimoto distance, `-log2(|a ∩ b| / |a ∪ b|)`.
///
/// Returns `f64::INFINITY` when the fingerprints share no bits, and 0 for
/// two all-zero fingerprints.
pub fn tanimoto_distance(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    if a.len() != b.len() {
        return Err(ChemError::LengthMismatch(a.len(), b.len()));
    }
    let union = a.union_count(b);
    if union == 0 {
        return Ok(0.0);
    }
    let inter = a.intersection_count(b);
    if inter == 0 {
        return Ok(f64::INFINITY);
    }
    if inter == union {
        return Ok(0.0);
    }
    Ok(-(inter as f64 / union as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::super::smiles::parse_smiles;
    use super::*;

    fn fp(s: &str) -> Fingerprint {
        circular_fingerprint(&parse_smiles(s).unwrap(), DEFAULT_LENGTH, DEFAULT_RADIUS).unwrap()
    }

    #[test]
    fn deterministic() {
        assert_eq!(fp("CC(=O)Nc1ccc(O)cc1"), fp("CC(=O)Nc1ccc(O)cc1"));
    }

    #[test]
    fn methane_has_only_the_radius_zero_bit() {
        let m = parse_smiles("C").unwrap();
        let r3 = circular_fingerprint(&m, 2048, 3).unwrap();
        let r0 = circular_fingerprint(&m, 2048, 0).unwrap();
        assert_eq!(
            r3,
            Fingerprint {
                radius: 3,
                ..r0.clone()
            }
        );
        assert_eq!(r3.count_ones(), 1);
        let expected = atom_invariant(&m, 0) % 2048;
        assert_eq!(r3.on_bits(), vec![expected as usize]);
    }

    #[test]
    fn methane_and_ethane_differ() {
        let a = fp("C");
        let b = fp("CC");
        assert!(a.union_count(&b) > a.intersection_count(&b));
    }

    #[test]
    fn rejects_short_length() {
        let m = parse_smiles("CC").unwrap();
        assert!(circular_fingerprint(&m, 7, 2).is_err());
        assert!(circular_fingerprint(&m, 8, 0).is_ok());
    }

    #[test]
    fn tanimoto_cases() {
        let a = Fingerprint::from_bits(16, &[1, 2, 3]);
        let b = Fingerprint::from_bits(16, &[2, 3, 4]);
        assert_eq!(tanimoto_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(tanimoto_distance(&a, &a).unwrap(), 0.0);
        let c = Fingerprint::from_bits(16, &[7, 8]);
        assert_eq!(tanimoto_distance(&a, &c).unwrap(), f64::INFINITY);
        let d = Fingerprint::from_bits(32, &[1]);
        assert!(tanimoto_distance(&a, &d).is_err());
    }
}
