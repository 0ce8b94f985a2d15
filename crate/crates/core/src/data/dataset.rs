use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::chem::{canonical_smiles, parse_smiles, ContributionTable, Molecule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub smiles: String,
    pub target: f64,
}

/// An immutable collection of `(smiles, target)` pairs.
///
/// Construction guarantees unique SMILES strings and finite targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    units: String,
    records: Vec<Record>,
}

/// A row dropped during loading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: u64,
    pub smiles: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    /// Rows whose SMILES failed to parse.
    pub rejected: Vec<Rejection>,
    /// Line numbers of rows dropped as repeats of an earlier SMILES string.
    pub duplicates: Vec<u64>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        units: impl Into<String>,
        records: Vec<Record>,
    ) -> Result<Dataset, DataError> {
        let mut seen = HashSet::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if !r.target.is_finite() {
                return Err(DataError::NonFiniteTarget { line: i as u64 + 1 });
            }
            if !seen.insert(r.smiles.as_str()) {
                return Err(DataError::DuplicateSmiles(r.smiles.clone()));
            }
        }
        Ok(Dataset {
            name: name.into(),
            units: units.into(),
            records,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.target).collect()
    }

    pub fn smiles(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.smiles.as_str()).collect()
    }

    /// Parse every record. Records were validated on load, so failures
    /// only arise for datasets built by hand.
    pub fn molecules(&self) -> Result<Vec<Molecule>, DataError> {
        self.records
            .iter()
            .enumerate()
            .map(|(index, r)| {
                parse_smiles(&r.smiles).map_err(|e| DataError::Chem {
                    index,
                    source: e.into(),
                })
            })
            .collect()
    }

    /// Keep only the first `n` records.
    pub fn truncated(&self, n: usize) -> Dataset {
        Dataset {
            name: self.name.clone(),
            units: self.units.clone(),
            records: self.records.iter().take(n).cloned().collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DataError> {
        let io_err = |source| DataError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut file = File::create(path).map_err(io_err)?;
        if !self.units.is_empty() {
            writeln!(file, "# units: {}", self.units).map_err(io_err)?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["smiles", "target"])?;
        for r in &self.records {
            w.write_record([r.smiles.as_str(), &format!("{}", r.target)])?;
        }
        w.flush().map_err(io_err)?;
        Ok(())
    }
}

/// Load a `smiles,target` CSV. Lines starting with `#` are comments; a
/// `# units: ...` comment sets the target units. The dataset name is the
/// file stem.
///
/// Rows with unparseable SMILES are skipped and listed in the report.
/// Repeated SMILES strings keep their first occurrence.
pub fn load_csv(path: &Path) -> Result<(Dataset, LoadReport), DataError> {
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut text = String::new();
    File::open(path)
        .map_err(io_err)?
        .read_to_string(&mut text)
        .map_err(io_err)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    load_csv_str(&name, &text)
}

pub(crate) fn load_csv_str(name: &str, text: &str) -> Result<(Dataset, LoadReport), DataError> {
    let mut units = String::new();
    for line in BufReader::new(text.as_bytes()).lines() {
        let line = line.map_err(|source| DataError::Io {
            path: name.to_string(),
            source,
        })?;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            if let Some(u) = rest.trim().strip_prefix("units:") {
                units = u.trim().to_string();
            }
        } else if !t.is_empty() {
            break;
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(DataError::Empty);
    }
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(DataError::MissingColumn(name))
    };
    let smiles_col = col("smiles")?;
    let target_col = col("target")?;

    let mut report = LoadReport::default();
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let smiles = row.get(smiles_col).unwrap_or("").to_string();
        let raw = row.get(target_col).unwrap_or("");
        let target: f64 = raw.parse().map_err(|_| DataError::NonNumericTarget {
            line,
            value: raw.to_string(),
        })?;
        if !target.is_finite() {
            return Err(DataError::NonFiniteTarget { line });
        }
        if let Err(e) = parse_smiles(&smiles) {
            warn!("{name}:{line}: rejected SMILES '{smiles}': {e}");
            report.rejected.push(Rejection {
                line,
                smiles,
                reason: e.to_string(),
            });
            continue;
        }
        if !seen.insert(smiles.clone()) {
            warn!("{name}:{line}: duplicate SMILES '{smiles}' dropped (first occurrence kept)");
            report.duplicates.push(line);
            continue;
        }
        records.push(Record { smiles, target });
    }
    if records.is_empty() && report.rejected.is_empty() && report.duplicates.is_empty() {
        return Err(DataError::Empty);
    }
    Ok((Dataset::new(name, units, records)?, report))
}

/// The union of the source molecules, deduplicated by canonical SMILES
/// (first occurrence wins), with targets replaced by the noiseless
/// heuristic logP.
pub fn generate_clogp_dataset(
    sources: &[Dataset],
    table: &ContributionTable,
) -> Result<Dataset, DataError> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for source in sources {
        for (index, r) in source.records().iter().enumerate() {
            let mol = parse_smiles(&r.smiles).map_err(|e| DataError::Chem {
                index,
                source: e.into(),
            })?;
            if !seen.insert(canonical_smiles(&mol)) {
                continue;
            }
            let target = table
                .heuristic_logp(&mol)
                .map_err(|source| DataError::Chem { index, source })?;
            records.push(Record {
                smiles: r.smiles.clone(),
                target,
            });
        }
    }
    Dataset::new("clogp", "log10 P (heuristic)", records)
}
