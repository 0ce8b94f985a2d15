//! Heuristic logP from a per-atom contribution table.
//!
//! The value is a plain sum over heavy atoms of a coefficient looked up by
//! `(element, aromatic)`; attached hydrogens are folded into the heavy atom
//! coefficients. The bundled table is a simplified stand-in for a full
//! Crippen-style atom typing.

use std::collections::BTreeMap;
use std::path::Path;

use super::element::Element;
use super::molecule::Molecule;
use super::ChemError;

/// The bundled contribution table (CSV with a version comment line).
pub const BUNDLED_TABLE: &str = include_str!("../../data/logp_contributions.csv");

#[derive(Clone, Debug, PartialEq)]
pub struct ContributionTable {
    pub version: String,
    coefficients: BTreeMap<(Element, bool), f64>,
}

impl ContributionTable {
    pub fn bundled() -> ContributionTable {
        ContributionTable::parse(BUNDLED_TABLE).expect("bundled table is valid")
    }

    pub fn from_path(path: &Path) -> Result<ContributionTable, ChemError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChemError::Table(format!("{}: {e}", path.display())))?;
        ContributionTable::parse(&text)
    }

    /// Parse `element,aromatic,coefficient` rows. Lines starting with `#`
    /// are comments; a `# version: X` comment sets the version.
    pub fn parse(text: &str) -> Result<ContributionTable, ChemError> {
        let mut version = String::from("unversioned");
        let mut body = String::new();
        for line in text.lines() {
            if let Some(rest) = line.trim().strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("version:") {
                    version = v.trim().to_string();
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let mut coefficients = BTreeMap::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| ChemError::Table(e.to_string()))?;
            let bad = || ChemError::Table(format!("malformed row {}", i + 1));
            let element =
                Element::from_symbol(row.get(0).ok_or_else(bad)?.trim()).ok_or_else(bad)?;
            let aromatic = match row.get(1).ok_or_else(bad)?.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            let coef: f64 = row
                .get(2)
                .ok_or_else(bad)?
                .trim()
                .parse()
                .map_err(|_| bad())?;
            coefficients.insert((element, aromatic), coef);
        }
        Ok(ContributionTable {
            version,
            coefficients,
        })
    }

    pub fn coefficient(&self, element: Element, aromatic: bool) -> Option<f64> {
        self.coefficients.get(&(element, aromatic)).copied()
    }

    pub fn heuristic_logp(&self, mol: &Molecule) -> Result<f64, ChemError> {
        mol.atoms().iter().try_fold(0.0, |acc, atom| {
            self.coefficient(atom.element, atom.aromatic)
                .map(|c| acc + c)
                .ok_or_else(|| ChemError::UnsupportedElement {
                    element: atom.element.symbol().to_string(),
                    aromatic: atom.aromatic,
                })
        })
    }
}

/// Heuristic logP with the bundled table.
pub fn heuristic_logp(mol: &Molecule) -> Result<f64, ChemError> {
    ContributionTable::bundled().heuristic_logp(mol)
}
