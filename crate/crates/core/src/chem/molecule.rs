use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::element::Element;
use super::ChemError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the explicit valence of each endpoint. Aromatic bonds
    /// count as one; the extra aromatic electron is handled per atom.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    /// Small integer code used in hashing.
    pub fn code(self) -> u64 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    /// Attached (implicit plus bracket-explicit) hydrogen count.
    pub hydrogens: u8,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            charge: 0,
            aromatic: false,
            hydrogens: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Heavy-atom molecular graph.
///
/// Construction validates that bond endpoints exist, that there are no self
/// loops or duplicate bonds, and that aromatic bonds join aromatic atoms.
/// Ring perception runs once at construction.
#[derive(Clone, Debug)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    ring_bond: Vec<bool>,
    rings: Vec<Vec<usize>>,
}

impl Molecule {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, ChemError> {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a >= n || bond.b >= n {
                return Err(ChemError::InvalidGraph(format!(
                    "bond {i} references atom outside 0..{n}"
                )));
            }
            if bond.a == bond.b {
                return Err(ChemError::InvalidGraph(format!("bond {i} is a self loop")));
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen.insert(key) {
                return Err(ChemError::InvalidGraph(format!(
                    "duplicate bond between atoms {} and {}",
                    key.0, key.1
                )));
            }
            if bond.order == BondOrder::Aromatic
                && !(atoms[bond.a].aromatic && atoms[bond.b].aromatic)
            {
                return Err(ChemError::InvalidGraph(format!(
                    "aromatic bond {i} joins a non-aromatic atom"
                )));
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        let mut mol = Molecule {
            atoms,
            bonds,
            adjacency,
            ring_bond: Vec::new(),
            rings: Vec::new(),
        };
        mol.perceive_rings();
        Ok(mol)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `(neighbor atom, bond index)` pairs for `atom`.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    /// Smallest rings through each ring bond, as sorted atom index lists.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn is_ring_bond(&self, bond: usize) -> bool {
        self.ring_bond[bond]
    }

    pub fn is_ring_atom(&self, atom: usize) -> bool {
        self.adjacency[atom].iter().any(|&(_, b)| self.ring_bond[b])
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, bond)| bond)
    }

    /// Sum of bond valences at `atom` (aromatic bonds count one each).
    pub fn bond_valence(&self, atom: usize) -> u8 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence())
            .sum()
    }

    /// Connected components as lists of atom indices in ascending order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            label[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(a) = queue.pop_front() {
                for &(nb, _) in &self.adjacency[a] {
                    if label[nb] == usize::MAX {
                        label[nb] = id;
                        members.push(nb);
                        queue.push_back(nb);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Relabel atoms so that old atom `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Molecule, ChemError> {
        let n = self.atoms.len();
        if perm.len() != n {
            return Err(ChemError::InvalidGraph(
                "permutation length mismatch".into(),
            ));
        }
        let mut atoms = vec![None; n];
        for (old, &new) in perm.iter().enumerate() {
            if new >= n || atoms[new].is_some() {
                return Err(ChemError::InvalidGraph("not a permutation".into()));
            }
            atoms[new] = Some(self.atoms[old].clone());
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
            })
            .collect();
        Molecule::new(atoms.into_iter().map(Option::unwrap).collect(), bonds)
    }

    /// Induced subgraph on `keep`. Bonds to removed atoms are replaced by
    /// hydrogens on the kept endpoint.
    pub fn subgraph(&self, keep: &[bool]) -> Molecule {
        let mut index = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::new();
        for (i, atom) in self.atoms.iter().enumerate() {
            if keep[i] {
                index[i] = atoms.len();
                atoms.push(atom.clone());
            }
        }
        let mut bonds = Vec::new();
        for bond in &self.bonds {
            match (keep[bond.a], keep[bond.b]) {
                (true, true) => bonds.push(Bond {
                    a: index[bond.a],
                    b: index[bond.b],
                    order: bond.order,
                }),
                (true, false) => atoms[index[bond.a]].hydrogens += bond.order.valence(),
                (false, true) => atoms[index[bond.b]].hydrogens += bond.order.valence(),
                (false, false) => {}
            }
        }
        Molecule::new(atoms, bonds).expect("induced subgraph of a valid molecule is valid")
    }

    /// Heavy atom mass plus attached hydrogens.
    pub fn molecular_weight(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.element.mass() + f64::from(a.hydrogens) * Element::H.mass())
            .sum()
    }

    fn perceive_rings(&mut self) {
        let m = self.bonds.len();
        self.ring_bond = (0..m)
            .map(|b| self.shortest_path_avoiding(b).is_some())
            .collect();
        let mut rings: BTreeSet<Vec<usize>> = BTreeSet::new();
        for b in 0..m {
            if !self.ring_bond[b] {
                continue;
            }
            if let Some(mut path) = self.shortest_path_avoiding(b) {
                path.sort_unstable();
                rings.insert(path);
            }
        }
        let mut rings: Vec<Vec<usize>> = rings.into_iter().collect();
        rings.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
        self.rings = rings;
    }

    /// Atoms on a shortest path between the endpoints of `bond` that does not
    /// use `bond` itself, or `None` if the bond is a bridge.
    fn shortest_path_avoiding(&self, bond: usize) -> Option<Vec<usize>> {
        let (src, dst) = (self.bonds[bond].a, self.bonds[bond].b);
        let n = self.atoms.len();
        let mut prev = vec![usize::MAX; n];
        prev[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(a) = queue.pop_front() {
            if a == dst {
                break;
            }
            for &(nb, b) in &self.adjacency[a] {
                if b != bond && prev[nb] == usize::MAX {
                    prev[nb] = a;
                    queue.push_back(nb);
                }
            }
        }
        if prev[dst] == usize::MAX {
            return None;
        }
        let mut path = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = prev[cur];
            path.push(cur);
        }
        Some(path)
    }
}

/// Implicit hydrogen count for an unbracketed atom, or `None` if the bond
/// valence exceeds every allowed valence of the element.
pub(crate) fn implicit_hydrogens(element: Element, aromatic: bool, bond_valence: u8) -> Option<u8> {
    let valences = element.default_valences()?;
    let max = *valences.last().unwrap();
    if aromatic {
        let lowest = valences[0];
        if bond_valence < lowest {
            return Some(lowest - bond_valence - 1);
        }
        return (bond_valence <= max).then(|| lowest.saturating_sub(bond_valence));
    }
    valences
        .iter()
        .find(|&&v| v >= bond_valence)
        .map(|&v| v - bond_valence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Molecule {
        let atoms = (0..n).map(|_| Atom::new(Element::C)).collect();
        let bonds = (1..n)
            .map(|i| Bond {
                a: i - 1,
                b: i,
                order: BondOrder::Single,
            })
            .collect();
        Molecule::new(atoms, bonds).unwrap()
    }

    #[test]
    fn rejects_invalid_graphs() {
        let atoms = vec![Atom::new(Element::C), Atom::new(Element::C)];
        let dup = vec![
            Bond {
                a: 0,
                b: 1,
                order: BondOrder::Single,
            },
            Bond {
                a: 1,
                b: 0,
                order: BondOrder::Double,
            },
        ];
        assert!(Molecule::new(atoms.clone(), dup).is_err());
        let out_of_range = vec![Bond {
            a: 0,
            b: 2,
            order: BondOrder::Single,
        }];
        assert!(Molecule::new(atoms.clone(), out_of_range).is_err());
        let aromatic = vec![Bond {
            a: 0,
            b: 1,
            order: BondOrder::Aromatic,
        }];
        assert!(Molecule::new(atoms, aromatic).is_err());
    }

    #[test]
    fn chains_have_no_rings() {
        let m = chain(5);
        assert!(m.rings().is_empty());
        assert!((0..4).all(|b| !m.is_ring_bond(b)));
        assert_eq!(m.components().len(), 1);
    }

    #[test]
    fn implicit_hydrogen_rules() {
        assert_eq!(implicit_hydrogens(Element::C, false, 1), Some(3));
        assert_eq!(implicit_hydrogens(Element::C, false, 5), None);
        assert_eq!(implicit_hydrogens(Element::N, false, 4), Some(1));
        assert_eq!(implicit_hydrogens(Element::C, true, 2), Some(1));
        assert_eq!(implicit_hydrogens(Element::C, true, 3), Some(0));
        assert_eq!(implicit_hydrogens(Element::N, true, 2), Some(0));
        assert_eq!(implicit_hydrogens(Element::O, true, 2), Some(0));
        assert_eq!(implicit_hydrogens(Element::S, true, 2), Some(0));
        assert_eq!(implicit_hydrogens(Element::SE, false, 2), None);
    }
}
