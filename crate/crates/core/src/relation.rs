//! Boolean relations stored as flat membership tables.
//!
//! A relation of arity `r` owns a bit block of `2^r` entries. Tuple
//! `a_1 ... a_r` lives at index `sum a_i * 2^(r - i)`, so column 0 is the
//! most significant bit and ascending indices list tuples in ascending
//! numeric order of their bitstrings.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_ARITY: usize = 16;

/// A fixed-arity tuple of bits packed into an integer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitTuple {
    arity: u8,
    bits: u32,
}

impl BitTuple {
    /// Tuple with the given table index. Bits above the arity are discarded.
    pub fn new(arity: usize, index: usize) -> Self {
        debug_assert!(arity <= MAX_ARITY);
        let mask = if arity == 0 { 0 } else { (1u32 << arity) - 1 };
        BitTuple {
            arity: arity as u8,
            bits: index as u32 & mask,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() > MAX_ARITY {
            return Err(Error::ArityTooLarge(bits.len()));
        }
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        Ok(BitTuple::new(bits.len(), index))
    }

    /// `c^r`: the constant tuple.
    pub fn constant(arity: usize, value: bool) -> Self {
        BitTuple::new(arity, if value { usize::MAX } else { 0 })
    }

    pub fn arity(self) -> usize {
        self.arity as usize
    }

    pub fn index(self) -> usize {
        self.bits as usize
    }

    pub fn get(self, column: usize) -> bool {
        debug_assert!(column < self.arity());
        (self.bits >> (self.arity() - 1 - column)) & 1 == 1
    }

    pub fn with(self, column: usize, value: bool) -> Self {
        debug_assert!(column < self.arity());
        let bit = 1u32 << (self.arity() - 1 - column);
        let bits = if value {
            self.bits | bit
        } else {
            self.bits & !bit
        };
        BitTuple { bits, ..self }
    }

    pub fn complement(self) -> Self {
        BitTuple::new(self.arity(), !self.bits as usize)
    }

    pub fn bits(self) -> impl Iterator<Item = bool> {
        (0..self.arity()).map(move |i| self.get(i))
    }

    /// Concatenation `ab`.
    pub fn concat(self, other: BitTuple) -> Result<Self> {
        let arity = self.arity() + other.arity();
        if arity > MAX_ARITY {
            return Err(Error::ArityTooLarge(arity));
        }
        Ok(BitTuple::new(
            arity,
            ((self.bits as usize) << other.arity()) | other.bits as usize,
        ))
    }

    /// Coordinate-wise `a <= b`.
    pub fn le(self, other: BitTuple) -> bool {
        self.bits & !other.bits == 0
    }
}

impl fmt::Display for BitTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arity == 0 {
            return f.write_str("-");
        }
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `0`/`1` strings; `-` denotes the empty tuple.
impl FromStr for BitTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(BitTuple::new(0, 0));
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidTuple(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        BitTuple::from_bits(&bits)
    }
}

/// A Boolean relation of arity at most [`MAX_ARITY`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanRelation {
    arity: u8,
    table: Vec<u64>,
}

fn words_for(arity: usize) -> usize {
    (1usize << arity).div_ceil(64)
}

impl BooleanRelation {
    pub fn empty(arity: usize) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::ArityTooLarge(arity));
        }
        Ok(BooleanRelation {
            arity: arity as u8,
            table: vec![0; words_for(arity)],
        })
    }

    pub fn complete(arity: usize) -> Result<Self> {
        let mut rel = BooleanRelation::empty(arity)?;
        for i in 0..rel.table_len() {
            rel.insert_index(i);
        }
        Ok(rel)
    }

    /// Builds a relation from its member tuples; duplicates collapse.
    pub fn from_tuples<I>(arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = BitTuple>,
    {
        let mut rel = BooleanRelation::empty(arity)?;
        for t in tuples {
            if t.arity() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: t.arity(),
                });
            }
            rel.insert_index(t.index());
        }
        Ok(rel)
    }

    /// Convenience for literals: `from_strs(2, &["00", "11"])`.
    pub fn from_strs(arity: usize, tuples: &[&str]) -> Result<Self> {
        let parsed = tuples
            .iter()
            .map(|s| s.parse::<BitTuple>())
            .collect::<Result<Vec<_>>>()?;
        BooleanRelation::from_tuples(arity, parsed)
    }

    pub fn from_predicate(arity: usize, mut pred: impl FnMut(BitTuple) -> bool) -> Result<Self> {
        let mut rel = BooleanRelation::empty(arity)?;
        for i in 0..rel.table_len() {
            if pred(BitTuple::new(arity, i)) {
                rel.insert_index(i);
            }
        }
        Ok(rel)
    }

    /// Relation whose table is the low `2^arity` bits of `mask`. Used by the
    /// exhaustive sweeps over all relations of arity at most 5.
    pub fn from_mask(arity: usize, mask: u64) -> Self {
        assert!(arity <= 6, "from_mask supports arity <= 6");
        let len = 1u64 << arity;
        let mask = if len == 64 {
            mask
        } else {
            mask & ((1u64 << len) - 1)
        };
        BooleanRelation {
            arity: arity as u8,
            table: vec![mask],
        }
    }

    fn insert_index(&mut self, index: usize) {
        self.table[index / 64] |= 1 << (index % 64);
    }

    fn table_len(&self) -> usize {
        1 << self.arity
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn contains(&self, t: BitTuple) -> bool {
        debug_assert_eq!(t.arity(), self.arity());
        self.contains_index(t.index())
    }

    pub fn contains_index(&self, index: usize) -> bool {
        (self.table[index / 64] >> (index % 64)) & 1 == 1
    }

    /// Members in ascending numeric order.
    pub fn members(&self) -> impl Iterator<Item = BitTuple> + '_ {
        let arity = self.arity();
        self.table.iter().enumerate().flat_map(move |(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(BitTuple::new(arity, w * 64 + bit))
            })
        })
    }

    pub fn len(&self) -> usize {
        self.table.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.table.iter().all(|&w| w == 0)
    }

    pub fn is_complete(&self) -> bool {
        self.len() == self.table_len()
    }

    /// Low 64 bits of the table; the whole table for arity <= 6.
    pub fn mask(&self) -> u64 {
        self.table[0]
    }

    pub fn is_subset(&self, other: &BooleanRelation) -> bool {
        self.arity == other.arity
            && self
                .table
                .iter()
                .zip(&other.table)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &BooleanRelation) -> Result<BooleanRelation> {
        self.same_arity(other)?;
        Ok(BooleanRelation {
            arity: self.arity,
            table: self
                .table
                .iter()
                .zip(&other.table)
                .map(|(a, b)| a | b)
                .collect(),
        })
    }

    pub fn intersection(&self, other: &BooleanRelation) -> Result<BooleanRelation> {
        self.same_arity(other)?;
        Ok(BooleanRelation {
            arity: self.arity,
            table: self
                .table
                .iter()
                .zip(&other.table)
                .map(|(a, b)| a & b)
                .collect(),
        })
    }

    fn same_arity(&self, other: &BooleanRelation) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: other.arity(),
            });
        }
        Ok(())
    }

    fn check_column(&self, column: usize) -> Result<()> {
        if column >= self.arity() {
            return Err(Error::ColumnOutOfRange {
                column,
                arity: self.arity(),
            });
        }
        Ok(())
    }

    /// Flips every coordinate of every member.
    pub fn complement(&self) -> BooleanRelation {
        let arity = self.arity();
        BooleanRelation::from_tuples(arity, self.members().map(BitTuple::complement))
            .expect("arity is preserved")
    }

    /// Rearranges columns: column `j` of the result is column `perm[j]` of
    /// `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<BooleanRelation> {
        let arity = self.arity();
        let mut seen = vec![false; arity];
        if perm.len() != arity
            || perm
                .iter()
                .any(|&p| p >= arity || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::NotAPermutation(perm.to_vec()));
        }
        BooleanRelation::from_tuples(
            arity,
            self.members().map(|a| {
                perm.iter()
                    .enumerate()
                    .fold(BitTuple::new(arity, 0), |b, (j, &p)| b.with(j, a.get(p)))
            }),
        )
    }

    /// `{a in R | a_column = value}`; the column stays in place.
    pub fn pin(&self, column: usize, value: bool) -> Result<BooleanRelation> {
        self.check_column(column)?;
        BooleanRelation::from_tuples(
            self.arity(),
            self.members().filter(|a| a.get(column) == value),
        )
    }

    /// Existentially deletes `column`.
    pub fn project_out(&self, column: usize) -> Result<BooleanRelation> {
        self.check_column(column)?;
        let arity = self.arity() - 1;
        BooleanRelation::from_tuples(arity, self.members().map(|a| drop_column(a, column)))
    }

    /// Pins `column` and then deletes it.
    pub fn pin_and_project(&self, column: usize, value: bool) -> Result<BooleanRelation> {
        self.pin(column, value)?.project_out(column)
    }

    /// Restriction to the listed columns, in the listed order.
    pub fn project_onto(&self, columns: &[usize]) -> Result<BooleanRelation> {
        for &c in columns {
            self.check_column(c)?;
        }
        BooleanRelation::from_tuples(
            columns.len(),
            self.members().map(|a| {
                columns
                    .iter()
                    .enumerate()
                    .fold(BitTuple::new(columns.len(), 0), |b, (j, &c)| {
                        b.with(j, a.get(c))
                    })
            }),
        )
    }

    /// Splits on the first column: `R = R_0 + R_1`.
    pub fn prefix_split(&self) -> Result<(BooleanRelation, BooleanRelation)> {
        if self.arity == 0 {
            return Err(Error::NullaryRelation);
        }
        Ok((
            self.pin_and_project(0, false)?,
            self.pin_and_project(0, true)?,
        ))
    }

    /// `{0a | a in R_0} ∪ {1a | a in R_1}`.
    pub fn prefix_join(r0: &BooleanRelation, r1: &BooleanRelation) -> Result<BooleanRelation> {
        r0.same_arity(r1)?;
        let arity = r0.arity() + 1;
        if arity > MAX_ARITY {
            return Err(Error::ArityTooLarge(arity));
        }
        let lead = |v: bool| BitTuple::new(1, v as usize);
        let tuples = r0
            .members()
            .map(|a| lead(false).concat(a))
            .chain(r1.members().map(|a| lead(true).concat(a)))
            .collect::<Result<Vec<_>>>()?;
        BooleanRelation::from_tuples(arity, tuples)
    }

    /// Columns on which every member agrees, with the shared value. The
    /// empty relation reports none.
    pub fn constant_columns(&self) -> Vec<(usize, bool)> {
        let mut members = self.members();
        let Some(first) = members.next() else {
            return Vec::new();
        };
        let mut varying = 0u32;
        for a in members {
            varying |= a.index() as u32 ^ first.index() as u32;
        }
        (0..self.arity())
            .filter(|&i| varying >> (self.arity() - 1 - i) & 1 == 0)
            .map(|i| (i, first.get(i)))
            .collect()
    }

    /// Drops the constant columns; returns the reduced relation and the
    /// original indices of the columns it keeps.
    pub fn without_constant_columns(&self) -> (BooleanRelation, Vec<usize>) {
        let constant = self.constant_columns();
        let kept: Vec<usize> = (0..self.arity())
            .filter(|i| !constant.iter().any(|(c, _)| c == i))
            .collect();
        let rel = self.project_onto(&kept).expect("kept columns are in range");
        (rel, kept)
    }

    pub fn is_valid_for(&self, value: bool) -> bool {
        self.contains(BitTuple::constant(self.arity(), value))
    }

    /// Upward closed under the coordinate-wise order.
    pub fn is_monotone(&self) -> bool {
        let arity = self.arity();
        self.members().all(|a| {
            (0..arity)
                .filter(|&i| !a.get(i))
                .all(|i| self.contains(a.with(i, true)))
        })
    }

    /// Downward closed under the coordinate-wise order.
    pub fn is_antitone(&self) -> bool {
        let arity = self.arity();
        self.members().all(|a| {
            (0..arity)
                .filter(|&i| a.get(i))
                .all(|i| self.contains(a.with(i, false)))
        })
    }

    pub fn is_pseudo_monotone(&self) -> bool {
        self.without_constant_columns().0.is_monotone()
    }

    pub fn is_pseudo_antitone(&self) -> bool {
        self.without_constant_columns().0.is_antitone()
    }

    pub fn structural_tests(&self) -> StructuralFlags {
        let (core, _) = self.without_constant_columns();
        StructuralFlags {
            is_empty: self.is_empty(),
            is_complete: self.is_complete(),
            is_0_valid: self.is_valid_for(false),
            is_1_valid: self.is_valid_for(true),
            constant_columns: self.constant_columns(),
            is_monotone: self.is_monotone(),
            is_antitone: self.is_antitone(),
            is_pseudo_monotone: core.is_monotone(),
            is_pseudo_antitone: core.is_antitone(),
        }
    }

    /// Bitstrings of the members, ascending.
    pub fn tuple_strings(&self) -> Vec<String> {
        self.members().map(|t| t.to_string()).collect()
    }
}

/// Removes one coordinate from a tuple.
pub(crate) fn drop_column(a: BitTuple, column: usize) -> BitTuple {
    let arity = a.arity();
    let low_width = arity - 1 - column;
    let low = a.index() & ((1 << low_width) - 1);
    let high = a.index() >> (low_width + 1);
    BitTuple::new(arity - 1, (high << low_width) | low)
}

impl fmt::Display for BooleanRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.members().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for BooleanRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanRelation/{}{}", self.arity, self)
    }
}

impl Serialize for BooleanRelation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("BooleanRelation", 2)?;
        s.serialize_field("arity", &self.arity)?;
        s.serialize_field("tuples", &self.tuple_strings())?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralFlags {
    pub is_empty: bool,
    pub is_complete: bool,
    pub is_0_valid: bool,
    pub is_1_valid: bool,
    pub constant_columns: Vec<(usize, bool)>,
    pub is_monotone: bool,
    pub is_antitone: bool,
    pub is_pseudo_monotone: bool,
    pub is_pseudo_antitone: bool,
}

/// The named relations used throughout the toolkit.
pub mod standard {
    use super::*;

    pub fn r_zero() -> BooleanRelation {
        BooleanRelation::from_strs(1, &["0"]).unwrap()
    }

    pub fn r_one() -> BooleanRelation {
        BooleanRelation::from_strs(1, &["1"]).unwrap()
    }

    pub fn r_eq() -> BooleanRelation {
        BooleanRelation::from_strs(2, &["00", "11"]).unwrap()
    }

    pub fn r_neq() -> BooleanRelation {
        BooleanRelation::from_strs(2, &["01", "10"]).unwrap()
    }

    pub fn r_or() -> BooleanRelation {
        BooleanRelation::from_strs(2, &["01", "10", "11"]).unwrap()
    }

    pub fn r_nand() -> BooleanRelation {
        BooleanRelation::from_strs(2, &["00", "01", "10"]).unwrap()
    }

    /// `x -> y`.
    pub fn r_imp() -> BooleanRelation {
        BooleanRelation::from_strs(2, &["00", "01", "11"]).unwrap()
    }

    /// `x <- y`.
    pub fn r_imp_rev() -> BooleanRelation {
        BooleanRelation::from_strs(2, &["00", "10", "11"]).unwrap()
    }

    fn check_k(k: usize) -> Result<()> {
        if !(2..=MAX_ARITY).contains(&k) {
            return Err(Error::InvalidK(k));
        }
        Ok(())
    }

    pub fn eq_k(k: usize) -> Result<BooleanRelation> {
        check_k(k)?;
        BooleanRelation::from_tuples(
            k,
            [BitTuple::constant(k, false), BitTuple::constant(k, true)],
        )
    }

    pub fn or_k(k: usize) -> Result<BooleanRelation> {
        check_k(k)?;
        BooleanRelation::from_predicate(k, |t| t.index() != 0)
    }

    pub fn nand_k(k: usize) -> Result<BooleanRelation> {
        check_k(k)?;
        BooleanRelation::from_predicate(k, |t| t != BitTuple::constant(k, true))
    }

    /// `NAND_1 = {0}` and `NAND_k` above; used where hyperedges of size one
    /// are realized as pins.
    pub fn nand_any(k: usize) -> Result<BooleanRelation> {
        if k == 1 {
            Ok(r_zero())
        } else {
            nand_k(k)
        }
    }

    pub fn or_any(k: usize) -> Result<BooleanRelation> {
        if k == 1 {
            Ok(r_one())
        } else {
            or_k(k)
        }
    }

    /// Every fixed relation plus `Eq_k`, `OR_k`, `NAND_k` for `3 <= k <= max_k`.
    pub fn catalog(max_k: usize) -> Result<Vec<(String, BooleanRelation)>> {
        let mut out = vec![
            ("R_zero".to_string(), r_zero()),
            ("R_one".to_string(), r_one()),
            ("R_eq".to_string(), r_eq()),
            ("R_neq".to_string(), r_neq()),
            ("R_or".to_string(), r_or()),
            ("R_nand".to_string(), r_nand()),
            ("R_imp".to_string(), r_imp()),
            ("R_imp_rev".to_string(), r_imp_rev()),
        ];
        for k in 3..=max_k {
            out.push((format!("Eq_{k}"), eq_k(k)?));
            out.push((format!("OR_{k}"), or_k(k)?));
            out.push((format!("NAND_{k}"), nand_k(k)?));
        }
        Ok(out)
    }

    /// Looks up a standard relation by name (`R_eq`, `OR_5`, ...).
    pub fn by_name(name: &str) -> Option<BooleanRelation> {
        let fixed = match name {
            "R_zero" => Some(r_zero()),
            "R_one" => Some(r_one()),
            "R_eq" => Some(r_eq()),
            "R_neq" => Some(r_neq()),
            "R_or" => Some(r_or()),
            "R_nand" => Some(r_nand()),
            "R_imp" => Some(r_imp()),
            "R_imp_rev" => Some(r_imp_rev()),
            _ => None,
        };
        if fixed.is_some() {
            return fixed;
        }
        let (family, k) = name.split_once('_')?;
        let k: usize = k.parse().ok()?;
        match family {
            "Eq" => eq_k(k).ok(),
            "OR" => or_k(k).ok(),
            "NAND" => nand_k(k).ok(),
            _ => None,
        }
    }
}
