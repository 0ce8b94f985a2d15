//! SMILES reader.
//!
//! Supported: organic-subset and bracket atoms (isotope, hydrogen count,
//! charge, atom class), aromatic lowercase atoms, branches, ring closures
//! (`1`-`9` and `%nn`), bond symbols `- = # :` and dot-separated fragments.
//! Stereo marks (`@`, `/`, `\`) are accepted and discarded.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::element::Element;
use super::molecule::{implicit_hydrogens, Atom, Bond, BondOrder, Molecule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    NonAscii,
    UnexpectedChar(char),
    UnmatchedRingClosure(u32),
    UnbalancedParenthesis,
    UnknownElement(String),
    ValenceViolation { element: String, valence: u8 },
    UnterminatedBracket,
    DuplicateBond,
    ConflictingRingBond(u32),
    AromaticBondMismatch,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => write!(f, "empty SMILES"),
            ParseErrorKind::NonAscii => write!(f, "non-ASCII character"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnmatchedRingClosure(d) => write!(f, "unmatched ring closure {d}"),
            ParseErrorKind::UnbalancedParenthesis => write!(f, "unbalanced parenthesis"),
            ParseErrorKind::UnknownElement(s) => write!(f, "unknown element '{s}'"),
            ParseErrorKind::ValenceViolation { element, valence } => {
                write!(f, "valence {valence} not allowed for {element}")
            }
            ParseErrorKind::UnterminatedBracket => write!(f, "unterminated bracket atom"),
            ParseErrorKind::DuplicateBond => write!(f, "duplicate bond or self loop"),
            ParseErrorKind::ConflictingRingBond(d) => {
                write!(f, "conflicting bond symbols on ring closure {d}")
            }
            ParseErrorKind::AromaticBondMismatch => {
                write!(f, "aromatic bond between non-aromatic atoms")
            }
        }
    }
}

/// A SMILES syntax or chemistry error at a byte offset in the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

fn err<T>(kind: ParseErrorKind, offset: usize) -> Result<T, ParseError> {
    Err(ParseError { kind, offset })
}

struct PendingAtom {
    atom: Atom,
    bracket: bool,
    offset: usize,
}

struct RingOpen {
    atom: usize,
    order: Option<BondOrder>,
    offset: usize,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<PendingAtom>,
    bonds: Vec<Bond>,
    prev: Option<usize>,
    branches: Vec<(Option<usize>, usize)>,
    pending_bond: Option<BondOrder>,
    rings: BTreeMap<u32, RingOpen>,
}

/// Parse a SMILES string into a [`Molecule`].
pub fn parse_smiles(text: &str) -> Result<Molecule, ParseError> {
    if text.is_empty() {
        return err(ParseErrorKind::Empty, 0);
    }
    if let Some(i) = text.bytes().position(|b| !b.is_ascii()) {
        return err(ParseErrorKind::NonAscii, i);
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        branches: Vec::new(),
        pending_bond: None,
        rings: BTreeMap::new(),
    };
    p.run()?;
    p.finish()
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while let Some(c) = self.peek() {
            let at = self.pos;
            match c {
                b'(' => {
                    if self.prev.is_none() || self.pending_bond.is_some() {
                        return err(ParseErrorKind::UnexpectedChar('('), at);
                    }
                    self.branches.push((self.prev, at));
                    self.pos += 1;
                }
                b')' => {
                    let Some((branch_root, _)) = self.branches.pop() else {
                        return err(ParseErrorKind::UnbalancedParenthesis, at);
                    };
                    if self.pending_bond.is_some() {
                        return err(ParseErrorKind::UnexpectedChar(')'), at);
                    }
                    self.prev = branch_root;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending_bond.is_some() || self.prev.is_none() {
                        return err(ParseErrorKind::UnexpectedChar(c as char), at);
                    }
                    self.pending_bond = Some(match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    });
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending_bond.is_some() || self.prev.is_none() {
                        return err(ParseErrorKind::UnexpectedChar('.'), at);
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom)?;
                }
            }
        }
        if let Some(&(_, offset)) = self.branches.last() {
            return err(ParseErrorKind::UnbalancedParenthesis, offset);
        }
        if self.pending_bond.is_some() {
            return err(
                ParseErrorKind::UnexpectedChar(self.text[self.pos - 1] as char),
                self.pos - 1,
            );
        }
        if let Some((&digit, open)) = self.rings.iter().next() {
            return err(ParseErrorKind::UnmatchedRingClosure(digit), open.offset);
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<PendingAtom, ParseError> {
        let at = self.pos;
        let c = self.text[at];
        let next = self.text.get(at + 1).copied();
        let (symbol, len, aromatic) = match (c, next) {
            (b'C', Some(b'l')) => ("Cl", 2, false),
            (b'B', Some(b'r')) => ("Br", 2, false),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => (
                std::str::from_utf8(&self.text[at..at + 1]).unwrap(),
                1,
                false,
            ),
            (b'b', _) => ("B", 1, true),
            (b'c', _) => ("C", 1, true),
            (b'n', _) => ("N", 1, true),
            (b'o', _) => ("O", 1, true),
            (b'p', _) => ("P", 1, true),
            (b's', _) => ("S", 1, true),
            (c, _) if c.is_ascii_alphabetic() => {
                let end = self.text[at + 1..]
                    .iter()
                    .position(|b| !b.is_ascii_lowercase())
                    .map_or(self.text.len(), |i| at + 1 + i);
                let name = String::from_utf8_lossy(&self.text[at..end]).into_owned();
                return err(ParseErrorKind::UnknownElement(name), at);
            }
            (c, _) => return err(ParseErrorKind::UnexpectedChar(c as char), at),
        };
        self.pos += len;
        let mut atom = Atom::new(Element::from_symbol(symbol).unwrap());
        atom.aromatic = aromatic;
        Ok(PendingAtom {
            atom,
            bracket: false,
            offset: at,
        })
    }

    fn bracket_atom(&mut self) -> Result<PendingAtom, ParseError> {
        let start = self.pos;
        let Some(close) = self.text[start..].iter().position(|&b| b == b']') else {
            return err(ParseErrorKind::UnterminatedBracket, start);
        };
        let end = start + close;
        let body = &self.text[start + 1..end];
        let mut i = 0;
        while i < body.len() && body[i].is_ascii_digit() {
            i += 1;
        }
        let sym_start = i;
        if i >= body.len() || !body[i].is_ascii_alphabetic() {
            return err(ParseErrorKind::UnknownElement(String::new()), start + 1 + i);
        }
        let aromatic = body[i].is_ascii_lowercase();
        let (element, sym_len) = if aromatic {
            let two = body.get(i..i + 2).and_then(|s| std::str::from_utf8(s).ok());
            match two {
                Some(s @ ("se" | "as" | "te" | "si")) => (capitalize(s), 2),
                _ => (capitalize(std::str::from_utf8(&body[i..i + 1]).unwrap()), 1),
            }
        } else {
            let two_ok = body.get(i + 1).is_some_and(|b| b.is_ascii_lowercase())
                && Element::from_symbol(std::str::from_utf8(&body[i..i + 2]).unwrap()).is_some();
            let one_ok =
                Element::from_symbol(std::str::from_utf8(&body[i..i + 1]).unwrap()).is_some();
            let two_letters = body.get(i + 1).is_some_and(|b| b.is_ascii_lowercase());
            if two_ok || (!one_ok && two_letters) {
                (std::str::from_utf8(&body[i..i + 2]).unwrap().to_string(), 2)
            } else {
                (std::str::from_utf8(&body[i..i + 1]).unwrap().to_string(), 1)
            }
        };
        let Some(elem) = Element::from_symbol(&element) else {
            return err(
                ParseErrorKind::UnknownElement(element),
                start + 1 + sym_start,
            );
        };
        if aromatic && !elem.can_be_aromatic() {
            return err(
                ParseErrorKind::UnknownElement(element.to_lowercase()),
                start + 1 + sym_start,
            );
        }
        i += sym_len;
        // chirality marks, including classes such as @TH1 or @SP2
        if body.get(i) == Some(&b'@') {
            i += 1;
            if body.get(i) == Some(&b'@') {
                i += 1;
            } else if body
                .get(i..i + 2)
                .is_some_and(|c| matches!(c, b"TH" | b"AL" | b"SP" | b"TB" | b"OH"))
            {
                i += 2;
                take_digits(body, &mut i);
            }
        }
        let mut hydrogens = 0u8;
        if i < body.len() && body[i] == b'H' {
            i += 1;
            let digits = take_digits(body, &mut i);
            hydrogens = if digits.is_empty() {
                1
            } else {
                parse_num(digits) as u8
            };
        }
        let mut charge: i32 = 0;
        if i < body.len() && (body[i] == b'+' || body[i] == b'-') {
            let sign = if body[i] == b'+' { 1 } else { -1 };
            let sym = body[i];
            i += 1;
            let digits = take_digits(body, &mut i);
            if !digits.is_empty() {
                charge = sign * parse_num(digits) as i32;
            } else {
                charge = sign;
                while i < body.len() && body[i] == sym {
                    charge += sign;
                    i += 1;
                }
            }
        }
        if i < body.len() && body[i] == b':' {
            i += 1;
            take_digits(body, &mut i);
        }
        if i != body.len() {
            return err(
                ParseErrorKind::UnexpectedChar(body[i] as char),
                start + 1 + i,
            );
        }
        self.pos = end + 1;
        let atom = Atom {
            element: elem,
            charge: charge.clamp(-8, 8) as i8,
            aromatic,
            hydrogens,
        };
        Ok(PendingAtom {
            atom,
            bracket: true,
            offset: start,
        })
    }

    fn add_atom(&mut self, atom: PendingAtom) -> Result<(), ParseError> {
        let idx = self.atoms.len();
        let offset = atom.offset;
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let order = self.pending_bond.take();
            self.add_bond(prev, idx, order, offset)?;
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn add_bond(
        &mut self,
        a: usize,
        b: usize,
        order: Option<BondOrder>,
        offset: usize,
    ) -> Result<(), ParseError> {
        if a == b
            || self
                .bonds
                .iter()
                .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
        {
            return err(ParseErrorKind::DuplicateBond, offset);
        }
        let both_aromatic = self.atoms[a].atom.aromatic && self.atoms[b].atom.aromatic;
        let order = match order {
            Some(BondOrder::Aromatic) if !both_aromatic => {
                return err(ParseErrorKind::AromaticBondMismatch, offset)
            }
            Some(o) => o,
            None if both_aromatic => BondOrder::Aromatic,
            None => BondOrder::Single,
        };
        self.bonds.push(Bond { a, b, order });
        Ok(())
    }

    fn ring_closure(&mut self) -> Result<(), ParseError> {
        let at = self.pos;
        let digit = if self.text[at] == b'%' {
            let d = self.text.get(at + 1..at + 3);
            match d {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    parse_num(d)
                }
                _ => return err(ParseErrorKind::UnexpectedChar('%'), at),
            }
        } else {
            self.pos += 1;
            u32::from(self.text[at] - b'0')
        };
        let Some(current) = self.prev else {
            return err(ParseErrorKind::UnexpectedChar(self.text[at] as char), at);
        };
        let order = self.pending_bond.take();
        match self.rings.remove(&digit) {
            None => {
                self.rings.insert(
                    digit,
                    RingOpen {
                        atom: current,
                        order,
                        offset: at,
                    },
                );
            }
            Some(open) => {
                let order = match (open.order, order) {
                    (Some(x), Some(y)) if x != y => {
                        return err(ParseErrorKind::ConflictingRingBond(digit), at)
                    }
                    (x, y) => x.or(y),
                };
                self.add_bond(open.atom, current, order, at)?;
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Molecule, ParseError> {
        let offsets: Vec<usize> = self.atoms.iter().map(|a| a.offset).collect();
        let brackets: Vec<bool> = self.atoms.iter().map(|a| a.bracket).collect();
        let atoms: Vec<Atom> = self.atoms.into_iter().map(|a| a.atom).collect();
        let mol = Molecule::new(atoms.clone(), self.bonds.clone()).map_err(|_| ParseError {
            kind: ParseErrorKind::DuplicateBond,
            offset: 0,
        })?;
        // Aromatic bonds outside rings are single bonds (e.g. biphenyl written
        // without an explicit '-').
        let mut bonds = self.bonds;
        for (i, bond) in bonds.iter_mut().enumerate() {
            if bond.order == BondOrder::Aromatic && !mol.is_ring_bond(i) {
                bond.order = BondOrder::Single;
            }
        }
        let mut atoms = atoms;
        let mut valence = vec![0u8; atoms.len()];
        for bond in &bonds {
            valence[bond.a] += bond.order.valence();
            valence[bond.b] += bond.order.valence();
        }
        for (i, atom) in atoms.iter_mut().enumerate() {
            let violation = || ParseError {
                kind: ParseErrorKind::ValenceViolation {
                    element: atom.element.symbol().to_string(),
                    valence: valence[i],
                },
                offset: offsets[i],
            };
            if brackets[i] {
                if let Some(vals) = atom.element.default_valences() {
                    let max = i32::from(*vals.last().unwrap()) + i32::from(atom.charge).abs();
                    let used = i32::from(valence[i]) + i32::from(atom.hydrogens);
                    if used > max {
                        return Err(violation());
                    }
                }
            } else {
                atom.hydrogens = implicit_hydrogens(atom.element, atom.aromatic, valence[i])
                    .ok_or_else(violation)?;
            }
        }
        Ok(Molecule::new(atoms, bonds).expect("validated during parsing"))
    }
}

fn take_digits<'b>(body: &'b [u8], i: &mut usize) -> &'b [u8] {
    let start = *i;
    while *i < body.len() && body[*i].is_ascii_digit() {
        *i += 1;
    }
    &body[start..*i]
}

fn parse_num(digits: &[u8]) -> u32 {
    digits.iter().fold(0u32, |acc, d| {
        acc.saturating_mul(10).saturating_add(u32::from(d - b'0'))
    })
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}
