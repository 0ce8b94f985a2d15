use super::molecule::Molecule;
use super::writer::canonical_smiles;

/// Key shared by every molecule without rings.
pub const EMPTY_SCAFFOLD: &str = "";

/// Ring systems plus linkers: repeatedly strip non-ring atoms of degree
/// at most one.
pub fn scaffold_molecule(mol: &Molecule) -> Option<Molecule> {
    let n = mol.atom_count();
    let mut keep = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| mol.degree(i)).collect();
    let ring: Vec<bool> = (0..n).map(|i| mol.is_ring_atom(i)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| !ring[i] && degree[i] <= 1).collect();
    while let Some(a) = stack.pop() {
        if !keep[a] {
            continue;
        }
        keep[a] = false;
        for &(nb, _) in mol.neighbors(a) {
            if keep[nb] {
                degree[nb] -= 1;
                if !ring[nb] && degree[nb] <= 1 {
                    stack.push(nb);
                }
            }
        }
    }
    keep.iter().any(|&k| k).then(|| mol.subgraph(&keep))
}

/// Canonical SMILES of the Murcko scaffold, or [`EMPTY_SCAFFOLD`].
pub fn murcko_scaffold(mol: &Molecule) -> String {
    scaffold_molecule(mol).map_or_else(|| EMPTY_SCAFFOLD.to_string(), |s| canonical_smiles(&s))
}
