use serde::{Deserialize, Serialize};

use super::{Featurizer, NetConfig, NnetError};
use crate::chem::{circular_fingerprint, Element, Fingerprint, Molecule};

const TOP_ELEMENTS: [Element; 10] = [
    Element::C,
    Element::N,
    Element::O,
    Element::S,
    Element::F,
    Element::CL,
    Element::BR,
    Element::I,
    Element::P,
    Element::B,
];

/// Element one-hot (10 + other), aromatic flag, degree one-hot (0..=4,
/// 5+), formal charge one-hot (negative, zero, positive).
pub const ATOM_FEATURES: usize = 11 + 1 + 6 + 3;

/// Indices of the set atom features.
fn atom_feature_bits(mol: &Molecule, i: usize) -> Vec<u16> {
    let atom = &mol.atoms()[i];
    let elem = TOP_ELEMENTS
        .iter()
        .position(|&e| e == atom.element)
        .unwrap_or(10);
    let mut bits = vec![elem as u16];
    if atom.aromatic {
        bits.push(11);
    }
    bits.push(12 + mol.degree(i).min(5) as u16);
    bits.push(match atom.charge {
        c if c < 0 => 18,
        0 => 19,
        _ => 20,
    });
    bits
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphInput {
    /// Set feature indices per atom.
    pub atom_bits: Vec<Vec<u16>>,
    pub neighbors: Vec<Vec<u32>>,
}

/// A featurized molecule.
#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Graph(GraphInput),
    Fingerprint(Fingerprint),
}

impl Input {
    pub fn kind(&self) -> Featurizer {
        match self {
            Input::Graph(_) => Featurizer::Graph,
            Input::Fingerprint(_) => Featurizer::Fingerprint,
        }
    }
}

pub fn featurize(mol: &Molecule, config: &NetConfig) -> Result<Input, NnetError> {
    Ok(match config.featurizer {
        Featurizer::Graph => Input::Graph(GraphInput {
            atom_bits: (0..mol.atom_count())
                .map(|i| atom_feature_bits(mol, i))
                .collect(),
            neighbors: (0..mol.atom_count())
                .map(|i| mol.neighbors(i).iter().map(|&(n, _)| n as u32).collect())
                .collect(),
        }),
        Featurizer::Fingerprint => Input::Fingerprint(circular_fingerprint(
            mol,
            config.fp_length,
            config.fp_radius,
        )?),
    })
}

pub fn featurize_all(mols: &[Molecule], config: &NetConfig) -> Result<Vec<Input>, NnetError> {
    mols.iter().map(|m| featurize(m, config)).collect()
}
