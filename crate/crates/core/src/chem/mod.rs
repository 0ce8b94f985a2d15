//! Molecular graphs: SMILES I/O, fingerprints, scaffolds and heuristic logP.

mod element;
mod fingerprint;
mod hash;
mod logp;
mod molecule;
mod scaffold;
mod smiles;
mod writer;

use thiserror::Error;

pub use element::Element;
pub use fingerprint::{
    circular_fingerprint, tanimoto_distance, Fingerprint, DEFAULT_LENGTH, DEFAULT_RADIUS,
};
pub use hash::hash_words;
pub use logp::{heuristic_logp, ContributionTable, BUNDLED_TABLE};
pub use molecule::{Atom, Bond, BondOrder, Molecule};
pub use scaffold::{murcko_scaffold, scaffold_molecule, EMPTY_SCAFFOLD};
pub use smiles::{parse_smiles, ParseError, ParseErrorKind};
pub use writer::{canonical_ranks, canonical_smiles, to_smiles};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChemError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid molecular graph: {0}")]
    InvalidGraph(String),
    #[error("fingerprint length {0} is below the minimum of 8")]
    InvalidFingerprintLength(usize),
    #[error("fingerprint lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no logP contribution for element {element} (aromatic: {aromatic})")]
    UnsupportedElement { element: String, aromatic: bool },
    #[error("contribution table: {0}")]
    Table(String),
}
