//! SMILES writer and canonical atom ranking.

use std::collections::BTreeMap;

use super::hash::hash_words;
use super::molecule::{implicit_hydrogens, BondOrder, Molecule};

/// Write `mol` as SMILES, visiting atoms in index order.
pub fn to_smiles(mol: &Molecule) -> String {
    let ranks: Vec<usize> = (0..mol.atom_count()).collect();
    write_with_ranks(mol, &ranks)
}

/// Canonical SMILES: atoms are visited in order of canonical rank so that
/// isomorphic inputs produce the same string.
pub fn canonical_smiles(mol: &Molecule) -> String {
    let ranks = canonical_ranks(mol);
    write_with_ranks(mol, &ranks)
}

fn initial_invariant(mol: &Molecule, i: usize) -> u64 {
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

fn rank_by_key<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    let map: BTreeMap<K, usize> = sorted
        .into_iter()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    keys.iter().map(|k| map[k]).collect()
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().max().map_or(0, |m| m + 1)
}

/// Refine ranks by neighbour ranks until the partition stops splitting.
fn refine(mol: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    loop {
        let keys: Vec<(usize, Vec<(usize, u64)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut nb: Vec<(usize, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(n, b)| (ranks[n], mol.bonds()[b].order.code()))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = rank_by_key(&keys);
        if class_count(&next) == class_count(&ranks) {
            return next;
        }
        ranks = next;
    }
}

/// Canonical ranks in `0..n`, all distinct. Ties left after refinement are
/// broken by promoting the lowest-indexed atom of the first tied class.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let n = mol.atom_count();
    let init: Vec<u64> = (0..n).map(|i| initial_invariant(mol, i)).collect();
    let mut ranks = refine(mol, rank_by_key(&init));
    while class_count(&ranks) < n {
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..n).find(|&r| counts[r] > 1).unwrap();
        let pick = (0..n).find(|&i| ranks[i] == tied).unwrap();
        let keys: Vec<(usize, bool)> = (0..n).map(|i| (ranks[i], i != pick)).collect();
        ranks = refine(mol, rank_by_key(&keys));
    }
    ranks
}

fn atom_text(mol: &Molecule, i: usize) -> String {
    let atom = &mol.atoms()[i];
    let symbol = if atom.aromatic {
        atom.element.symbol().to_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    let implicit = implicit_hydrogens(atom.element, atom.aromatic, mol.bond_valence(i));
    let bare = atom.charge == 0
        && atom.element.is_organic_subset()
        && implicit == Some(atom.hydrogens)
        && (!atom.aromatic || matches!(symbol.as_str(), "b" | "c" | "n" | "o" | "p" | "s"));
    if bare {
        return symbol;
    }
    let mut s = format!("[{symbol}");
    match atom.hydrogens {
        0 => {}
        1 => s.push('H'),
        h => s.push_str(&format!("H{h}")),
    }
    match atom.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    s.push(']');
    s
}

fn bond_text(mol: &Molecule, bond: usize) -> &'static str {
    let b = &mol.bonds()[bond];
    match b.order {
        BondOrder::Single => {
            let atoms = mol.atoms();
            if atoms[b.a].aromatic && atoms[b.b].aromatic {
                "-"
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => "",
    }
}

fn ring_label(d: usize) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d:02}")
    }
}

struct Writer<'a> {
    mol: &'a Molecule,
    ranks: &'a [usize],
    visited: Vec<bool>,
    tree_bond: Vec<bool>,
    closure_seen: Vec<bool>,
    /// Ring-closure bonds opened at each atom, in visit order.
    closures: Vec<Vec<usize>>,
}

impl Writer<'_> {
    fn sorted_neighbors(&self, atom: usize) -> Vec<(usize, usize)> {
        let mut nb = self.mol.neighbors(atom).to_vec();
        nb.sort_by_key(|&(n, _)| self.ranks[n]);
        nb
    }

    /// First pass: classify bonds into tree edges and ring closures.
    fn explore(&mut self, atom: usize, parent_bond: Option<usize>) {
        self.visited[atom] = true;
        for (nb, bond) in self.sorted_neighbors(atom) {
            if Some(bond) == parent_bond {
                continue;
            }
            if self.visited[nb] {
                // back edge, first seen from the descendant; the ancestor opens it
                if !self.tree_bond[bond] && !self.closure_seen[bond] {
                    self.closure_seen[bond] = true;
                    self.closures[nb].push(bond);
                }
            } else {
                self.tree_bond[bond] = true;
                self.explore(nb, Some(bond));
            }
        }
    }

    fn emit(
        &self,
        atom: usize,
        parent_bond: Option<usize>,
        out: &mut String,
        open: &mut BTreeMap<usize, usize>,
        emitted: &mut Vec<bool>,
    ) {
        emitted[atom] = true;
        out.push_str(&atom_text(self.mol, atom));
        // closing digits for bonds opened earlier, then new openings
        let mut closing: Vec<(usize, usize)> = open
            .iter()
            .filter(|(&bond, _)| {
                let b = &self.mol.bonds()[bond];
                b.a == atom || b.b == atom
            })
            .map(|(&bond, &digit)| (bond, digit))
            .collect();
        closing.sort_by_key(|&(_, d)| d);
        for (bond, digit) in closing {
            open.remove(&bond);
            out.push_str(&ring_label(digit));
        }
        for &bond in &self.closures[atom] {
            let used: Vec<usize> = open.values().copied().collect();
            let digit = (1..).find(|d| !used.contains(d)).unwrap();
            open.insert(bond, digit);
            out.push_str(bond_text(self.mol, bond));
            out.push_str(&ring_label(digit));
        }
        let children: Vec<(usize, usize)> = self
            .sorted_neighbors(atom)
            .into_iter()
            .filter(|&(nb, bond)| Some(bond) != parent_bond && self.tree_bond[bond] && !emitted[nb])
            .collect();
        for (k, &(nb, bond)) in children.iter().enumerate() {
            let branch = k + 1 < children.len();
            if branch {
                out.push('(');
            }
            out.push_str(bond_text(self.mol, bond));
            self.emit(nb, Some(bond), out, open, emitted);
            if branch {
                out.push(')');
            }
        }
    }
}

fn write_with_ranks(mol: &Molecule, ranks: &[usize]) -> String {
    let n = mol.atom_count();
    let mut w = Writer {
        mol,
        ranks,
        visited: vec![false; n],
        tree_bond: vec![false; mol.bond_count()],
        closure_seen: vec![false; mol.bond_count()],
        closures: vec![Vec::new(); n],
    };
    let mut starts: Vec<usize> = mol
        .components()
        .into_iter()
        .map(|c| *c.iter().min_by_key(|&&a| ranks[a]).unwrap())
        .collect();
    starts.sort_by_key(|&a| ranks[a]);
    let mut pieces = Vec::new();
    let mut emitted = vec![false; n];
    for start in starts {
        w.explore(start, None);
        let mut s = String::new();
        let mut open = BTreeMap::new();
        w.emit(start, None, &mut s, &mut open, &mut emitted);
        pieces.push(s);
    }
    pieces.join(".")
}

#[cfg(test)]
mod tests {
    use super::super::smiles::parse_smiles;
    use super::*;

    fn canon(s: &str) -> String {
        canonical_smiles(&parse_smiles(s).unwrap())
    }

    #[test]
    fn canonical_form_ignores_input_order() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("c1ccccc1C"), canon("Cc1ccccc1"));
        assert_eq!(canon("C1CCCCC1O"), canon("OC1CCCCC1"));
        assert_eq!(canon("c1ccc2ccccc2c1"), canon("c1cccc2c1cccc2"));
        assert_ne!(canon("CCO"), canon("COC"));
    }

    #[test]
    fn writes_parseable_output() {
        for s in [
            "CC(=O)O",
            "c1ccccc1-c1ccccc1",
            "C[N+](=O)[O-]",
            "c1cc[nH]c1",
            "C1CC2CCC1CC2",
            "N#Cc1ccc(cc1)C(F)(F)F",
            "[Na+].[Cl-]",
            "C1CCCCCCCCCCC1",
        ] {
            let m = parse_smiles(s).unwrap();
            for text in [to_smiles(&m), canonical_smiles(&m)] {
                let back = parse_smiles(&text).unwrap_or_else(|e| panic!("{s} -> {text}: {e}"));
                assert_eq!(back.atom_count(), m.atom_count(), "{s} -> {text}");
                assert_eq!(back.bond_count(), m.bond_count(), "{s} -> {text}");
                assert_eq!(
                    canonical_smiles(&back),
                    canonical_smiles(&m),
                    "{s} -> {text}"
                );
            }
        }
    }
}
