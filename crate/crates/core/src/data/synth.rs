//! Procedural molecule generator and the bundled stand-in datasets.
//!
//! Molecules are assembled from a fixed fragment library by repeatedly
//! replacing a hydrogen on the growing molecule with a bond to a new
//! fragment. Targets are simple descriptor equations plus Gaussian noise,
//! shaped to resemble four public regression benchmarks (aqueous
//! solubility, hydration free energy, lipophilicity at pH 7.4 and
//! atomization energy of small molecules). Absolute values are not meant
//! to match any real measurement.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::dataset::load_csv_str;
use super::{DataError, Dataset, Record};
use crate::chem::{
    canonical_smiles, heuristic_logp, parse_smiles, Atom, Bond, BondOrder, Element, Molecule,
};
use crate::seed;

/// Size and composition regime for generated molecules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// At most 7 heavy atoms drawn from C, N, O, S.
    Tiny,
    /// 3 to 16 heavy atoms.
    Small,
    /// 10 to 34 heavy atoms.
    DrugLike,
}

impl Profile {
    fn heavy_range(self) -> (usize, usize) {
        match self {
            Profile::Tiny => (2, 7),
            Profile::Small => (3, 16),
            Profile::DrugLike => (10, 34),
        }
    }
}

const CORES_TINY: &[&str] = &[
    "C",
    "CC",
    "CO",
    "CN",
    "C=C",
    "C#C",
    "CS",
    "C=O",
    "N",
    "O",
    "C1CC1",
    "C1CCC1",
    "C1CCCC1",
    "C1CCOC1",
    "c1ccoc1",
    "c1cc[nH]c1",
    "c1ccsc1",
    "C1CCNC1",
    "C1CO1",
];

const CORES: &[&str] = &[
    "c1ccccc1",
    "c1ccncc1",
    "c1ccoc1",
    "c1ccsc1",
    "c1cc[nH]c1",
    "C1CCCCC1",
    "C1CCCC1",
    "C1CC1",
    "C1CCNCC1",
    "C1COCCN1",
    "c1ccc2ccccc2c1",
    "c1ccc2[nH]ccc2c1",
    "c1cncnc1",
    "C1CCOC1",
    "c1ccc2occc2c1",
    "O=C1CCCN1",
    "c1cn[nH]c1",
    "c1cscn1",
    "CCCC",
    "CCOCC",
    "CC(C)O",
    "C1CCNC1",
    "c1ccc2ncccc2c1",
    "C1CCN(CC1)",
    "c1cnc[nH]1",
];

/// Substituents in their hydrogen-capped form; attachment is through
/// atom 0, which therefore must carry a hydrogen.
const SUBSTITUENTS_TINY: &[&str] = &[
    "C", "CC", "O", "N", "C=O", "C#N", "C=C", "C#C", "S", "OC", "NC", "CO",
];

const SUBSTITUENTS: &[&str] = &[
    "C",
    "CC",
    "CCC",
    "C(C)C",
    "C(C)(C)C",
    "O",
    "OC",
    "N",
    "NC",
    "N(C)C",
    "F",
    "Cl",
    "Br",
    "I",
    "C(=O)O",
    "C(=O)OC",
    "C(=O)N",
    "C#N",
    "C(F)(F)F",
    "S(=O)(=O)N",
    "[NH+](=O)[O-]",
    "C=O",
    "OC(=O)C",
    "NC(=O)C",
    "SC",
    "C=C",
    "CO",
    "CCO",
    "CN",
    "CC(=O)O",
    "OCC",
    "F",
    "Cl",
];

/// Fragment assembly state.
struct Builder {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
}

impl Builder {
    fn from(mol: &Molecule) -> Builder {
        Builder {
            atoms: mol.atoms().to_vec(),
            bonds: mol.bonds().to_vec(),
        }
    }

    fn sites(&self) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&i| self.atoms[i].hydrogens > 0)
            .collect()
    }

    /// Join `frag` by a single bond between `host` and fragment atom `at`.
    fn attach(&mut self, host: usize, frag: &Molecule, at: usize) {
        let offset = self.atoms.len();
        self.atoms.extend(frag.atoms().iter().cloned());
        self.bonds.extend(frag.bonds().iter().map(|b| Bond {
            a: b.a + offset,
            b: b.b + offset,
            order: b.order,
        }));
        self.atoms[host].hydrogens -= 1;
        self.atoms[offset + at].hydrogens -= 1;
        self.bonds.push(Bond {
            a: host,
            b: offset + at,
            order: BondOrder::Single,
        });
    }

    fn build(self) -> Molecule {
        Molecule::new(self.atoms, self.bonds).expect("fragment assembly keeps the graph valid")
    }
}

fn parse_all(list: &[&str]) -> Vec<Molecule> {
    list.iter()
        .map(|s| parse_smiles(s).expect("fragment library parses"))
        .collect()
}

/// Generate `count` distinct molecules as canonical SMILES.
///
/// Deterministic in `(count, profile, seed)`. Returns fewer molecules only
/// if the fragment space is exhausted.
pub fn generate_smiles(count: usize, profile: Profile, seed: u64) -> Vec<String> {
    let mut rng = seed::rng(seed);
    let (cores, subs) = match profile {
        Profile::Tiny => (parse_all(CORES_TINY), parse_all(SUBSTITUENTS_TINY)),
        _ => (parse_all(CORES), parse_all(SUBSTITUENTS)),
    };
    let rings: Vec<Molecule> = cores
        .iter()
        .filter(|m| !m.rings().is_empty())
        .cloned()
        .collect();
    let (lo, hi) = profile.heavy_range();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 200 {
        attempts += 1;
        let target = rng.gen_range(lo..=hi);
        let mol = grow(&mut rng, &cores, &subs, &rings, target, hi);
        if mol.atom_count() < lo {
            continue;
        }
        let smiles = canonical_smiles(&mol);
        if seen.insert(smiles.clone()) {
            out.push(smiles);
        }
    }
    out
}

fn grow(
    rng: &mut ChaCha8Rng,
    cores: &[Molecule],
    subs: &[Molecule],
    rings: &[Molecule],
    target: usize,
    max: usize,
) -> Molecule {
    let mut b = Builder::from(cores.choose(rng).unwrap());
    let mut failures = 0;
    while b.atoms.len() < target && failures < 20 {
        let sites = b.sites();
        let Some(&host) = sites.choose(rng) else {
            break;
        };
        // rings are rarer than substituents but keep larger molecules ring-rich
        let use_ring = !rings.is_empty() && rng.gen_bool(0.25);
        let frag = if use_ring {
            rings.choose(rng).unwrap()
        } else {
            subs.choose(rng).unwrap()
        };
        if b.atoms.len() + frag.atom_count() > max {
            failures += 1;
            continue;
        }
        let at = if use_ring {
            let fsites: Vec<usize> = (0..frag.atom_count())
                .filter(|&i| frag.atoms()[i].hydrogens > 0)
                .collect();
            *fsites.choose(rng).unwrap()
        } else {
            0
        };
        b.attach(host, frag, at);
    }
    b.build()
}

// --- descriptors

#[derive(Clone, Copy, Debug, Default)]
pub struct Descriptors {
    pub logp: f64,
    pub weight: f64,
    pub heavy: usize,
    pub rotatable: usize,
    pub aromatic_fraction: f64,
    pub donors: usize,
    pub acceptors: usize,
    pub rings: usize,
    pub acids: usize,
}

pub fn descriptors(mol: &Molecule) -> Descriptors {
    let atoms = mol.atoms();
    let heavy = atoms.len();
    let polar = |a: &Atom| a.element == Element::N || a.element == Element::O;
    let rotatable = mol
        .bonds()
        .iter()
        .enumerate()
        .filter(|&(i, b)| {
            b.order == BondOrder::Single
                && !mol.is_ring_bond(i)
                && mol.degree(b.a) > 1
                && mol.degree(b.b) > 1
        })
        .count();
    // carboxylic acid: carbon with =O and -OH
    let acids = (0..heavy)
        .filter(|&c| {
            atoms[c].element == Element::C && {
                let nb = mol.neighbors(c);
                let carbonyl = nb.iter().any(|&(o, bd)| {
                    atoms[o].element == Element::O && mol.bonds()[bd].order == BondOrder::Double
                });
                let hydroxyl = nb
                    .iter()
                    .any(|&(o, _)| atoms[o].element == Element::O && atoms[o].hydrogens == 1);
                carbonyl && hydroxyl
            }
        })
        .count();
    Descriptors {
        logp: heuristic_logp(mol).unwrap_or(0.0),
        weight: mol.molecular_weight(),
        heavy,
        rotatable,
        aromatic_fraction: atoms.iter().filter(|a| a.aromatic).count() as f64 / heavy.max(1) as f64,
        donors: atoms.iter().filter(|a| polar(a) && a.hydrogens > 0).count(),
        acceptors: atoms.iter().filter(|a| polar(a)).count(),
        rings: mol.rings().len(),
        acids,
    }
}

fn bond_energy(mol: &Molecule, bond: &Bond) -> f64 {
    let base = match bond.order {
        BondOrder::Single => 83.0,
        BondOrder::Double => 146.0,
        BondOrder::Triple => 200.0,
        BondOrder::Aromatic => 120.0,
    };
    let factor = |i: usize| match mol.atoms()[i].element.atomic_number() {
        6 => 1.0,
        7 => 0.92,
        8 => 1.02,
        16 => 0.78,
        _ => 0.9,
    };
    base * factor(bond.a) * factor(bond.b)
}

fn hydrogen_energy(atom: &Atom) -> f64 {
    let per = match atom.element.atomic_number() {
        6 => 99.0,
        7 => 93.0,
        8 => 111.0,
        16 => 82.0,
        _ => 90.0,
    };
    per * f64::from(atom.hydrogens)
}

// --- stand-in datasets

/// Which stand-in benchmark to synthesise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandIn {
    Solubility,
    Solvation,
    Lipophilicity,
    Atomization,
}

impl StandIn {
    pub const ALL: [StandIn; 4] = [
        StandIn::Solubility,
        StandIn::Solvation,
        StandIn::Lipophilicity,
        StandIn::Atomization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StandIn::Solubility => "solubility",
            StandIn::Solvation => "solvation",
            StandIn::Lipophilicity => "lipophilicity",
            StandIn::Atomization => "atomization",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            StandIn::Solubility => "log10 mol/L",
            StandIn::Solvation => "kcal/mol",
            StandIn::Lipophilicity => "log10 D",
            StandIn::Atomization => "kcal/mol",
        }
    }

    fn size(self) -> usize {
        match self {
            StandIn::Solubility => 600,
            StandIn::Solvation => 350,
            StandIn::Lipophilicity => 750,
            StandIn::Atomization => 450,
        }
    }

    fn profile(self) -> Profile {
        match self {
            StandIn::Solubility | StandIn::Lipophilicity => Profile::DrugLike,
            StandIn::Solvation => Profile::Small,
            StandIn::Atomization => Profile::Tiny,
        }
    }

    fn noise(self) -> f64 {
        match self {
            StandIn::Solubility => 0.5,
            StandIn::Solvation => 0.7,
            StandIn::Lipophilicity => 0.7,
            StandIn::Atomization => 5.0,
        }
    }

    /// Noiseless target.
    pub fn signal(self, mol: &Molecule) -> f64 {
        let d = descriptors(mol);
        match self {
            StandIn::Solubility => {
                0.16 - 0.63 * d.logp - 0.0062 * d.weight + 0.066 * d.rotatable as f64
                    - 0.74 * d.aromatic_fraction
            }
            StandIn::Solvation => {
                -0.8 - 1.2 * d.donors as f64 - 0.6 * d.acceptors as f64 + 0.35 * d.logp
                    - 0.015 * (d.weight - 100.0)
            }
            StandIn::Lipophilicity => (0.8 + 0.5 * d.logp - 0.9 * d.acids as f64
                + 0.3 * d.rings as f64
                - 0.2 * d.donors as f64)
                .clamp(-1.5, 4.5),
            StandIn::Atomization => {
                let bonds: f64 = mol.bonds().iter().map(|b| bond_energy(mol, b)).sum();
                let hydrogens: f64 = mol.atoms().iter().map(hydrogen_energy).sum();
                -(bonds + hydrogens)
            }
        }
    }

    /// Generate the dataset deterministically from `seed`.
    pub fn generate(self, seed: u64) -> Dataset {
        let base = seed::derive(seed, self.name());
        let smiles = generate_smiles(self.size(), self.profile(), seed::derive(base, "molecules"));
        let mut rng = seed::rng(seed::derive(base, "noise"));
        let normal = Normal::new(0.0, 1.0).unwrap();
        let records = smiles
            .into_iter()
            .map(|s| {
                let mol = parse_smiles(&s).unwrap();
                // inverse-CDF sampling keeps the draw sequence simple
                let u: f64 = rng.gen_range(1e-12..1.0 - 1e-12);
                let eps = normal.inverse_cdf(u) * self.noise();
                let target = ((self.signal(&mol) + eps) * 1e4).round() / 1e4;
                Record { smiles: s, target }
            })
            .collect();
        Dataset::new(self.name(), self.units(), records).expect("generated records are unique")
    }
}

/// Seed used for the CSV files shipped with the crate.
pub const BUNDLED_SEED: u64 = 20_200_101;

const BUNDLED: [(&str, &str); 4] = [
    ("solubility", include_str!("../../data/solubility.csv")),
    ("solvation", include_str!("../../data/solvation.csv")),
    (
        "lipophilicity",
        include_str!("../../data/lipophilicity.csv"),
    ),
    ("atomization", include_str!("../../data/atomization.csv")),
];

/// Names accepted by [`bundled`], including the derived `clogp` set.
pub const BUNDLED_NAMES: [&str; 5] = [
    "solubility",
    "solvation",
    "lipophilicity",
    "atomization",
    "clogp",
];

/// Load one of the datasets shipped with the crate. `clogp` is the
/// heuristic-logP union of the other four.
pub fn bundled(name: &str) -> Result<Dataset, DataError> {
    if name == "clogp" {
        let sources = BUNDLED
            .iter()
            .map(|(n, _)| bundled(n))
            .collect::<Result<Vec<_>, _>>()?;
        return super::generate_clogp_dataset(&sources, &crate::chem::ContributionTable::bundled());
    }
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| DataError::UnknownDataset(name.to_string()))?;
    Ok(load_csv_str(name, text)?.0)
}
