//! Structural classes of Boolean relations: affine, IM-conj, OR-conj and
//! NAND-conj, normalized formulae, and the three-way classification of a
//! single relation.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::gadgets::{self, GadgetCertificate};
use crate::language::ConstraintLanguage;
use crate::ppp::PppDerivation;
use crate::relation::{BitTuple, BooleanRelation};

pub use crate::ppp::find_ppp;

/// Closure under `a ⊕ b ⊕ c`. With a fixed base member `a` this is the same
/// as `R ⊕ a` being closed under `⊕`, which is what is checked.
pub fn is_affine(rel: &BooleanRelation) -> bool {
    let members: Vec<usize> = rel.members().map(BitTuple::index).collect();
    let Some(&base) = members.first() else {
        return true;
    };
    if !members.len().is_power_of_two() {
        return false;
    }
    members.iter().enumerate().all(|(i, &b)| {
        members[i..]
            .iter()
            .all(|&c| rel.contains_index(base ^ b ^ c))
    })
}

/// Smallest coset of a GF(2) subspace containing `rel`.
pub fn affine_hull(rel: &BooleanRelation) -> Result<BooleanRelation> {
    let mut members = rel.members().map(BitTuple::index);
    let base = members.next().ok_or(crate::error::Error::EmptyRelation)?;
    // reduced basis keyed by leading bit
    let mut basis: Vec<usize> = Vec::new();
    for m in members {
        let mut v = m ^ base;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    let arity = rel.arity();
    let mut span = vec![0usize];
    for &b in &basis {
        let extra: Vec<usize> = span.iter().map(|&s| s ^ b).collect();
        span.extend(extra);
    }
    BooleanRelation::from_tuples(
        arity,
        span.into_iter().map(|s| BitTuple::new(arity, s ^ base)),
    )
}

/// The pins and implications a relation entails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImConjWitness {
    pub pins: Vec<(usize, bool)>,
    /// `(i, j)` stands for `x_i -> x_j`.
    pub implications: Vec<(usize, usize)>,
}

impl ImConjWitness {
    pub fn to_relation(&self, arity: usize) -> Result<BooleanRelation> {
        BooleanRelation::from_predicate(arity, |t| {
            self.pins.iter().all(|&(c, v)| t.get(c) == v)
                && self
                    .implications
                    .iter()
                    .all(|&(i, j)| !t.get(i) || t.get(j))
        })
    }
}

/// Whether `rel` is a conjunction of pins and binary implications. The
/// conjunction of everything `rel` entails is the least such relation
/// containing it, so `rel` is in the class exactly when the two coincide.
pub fn is_im_conj(rel: &BooleanRelation) -> Option<ImConjWitness> {
    let r = rel.arity();
    let members: Vec<BitTuple> = rel.members().collect();
    let mut pins = Vec::new();
    for c in 0..r {
        for v in [false, true] {
            if members.iter().all(|a| a.get(c) == v) {
                pins.push((c, v));
            }
        }
    }
    let mut implications = Vec::new();
    for i in 0..r {
        for j in 0..r {
            if i != j && !members.iter().any(|a| a.get(i) && !a.get(j)) {
                implications.push((i, j));
            }
        }
    }
    let witness = ImConjWitness { pins, implications };
    (witness.to_relation(r).ok()? == *rel).then_some(witness)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Flavor {
    OrConj,
    NandConj,
}

impl Flavor {
    pub fn dual(self) -> Flavor {
        match self {
            Flavor::OrConj => Flavor::NandConj,
            Flavor::NandConj => Flavor::OrConj,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::OrConj => "OR-conj",
            Flavor::NandConj => "NAND-conj",
        })
    }
}

/// Pins plus an antichain of OR (or NAND) clauses, all on distinct columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct NormalizedFormula {
    pub flavor: Flavor,
    pub arity: usize,
    pub pins: BTreeMap<usize, bool>,
    /// Sorted column lists, each of size at least two, sorted.
    pub clauses: Vec<Vec<usize>>,
    /// Set for the empty relation, whose defining conjunction contains
    /// contradictory pins.
    pub unsatisfiable: bool,
}

impl NormalizedFormula {
    pub fn width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Greatest number of times a column appears across pins and clauses.
    pub fn max_occurrences(&self) -> usize {
        (0..self.arity)
            .map(|c| {
                self.pins.contains_key(&c) as usize
                    + self.clauses.iter().filter(|cl| cl.contains(&c)).count()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn satisfied_by(&self, t: BitTuple) -> bool {
        if self.unsatisfiable {
            return false;
        }
        // an OR clause needs a 1 somewhere, a NAND clause a 0
        let witness = self.flavor == Flavor::OrConj;
        self.pins.iter().all(|(&c, &v)| t.get(c) == v)
            && self
                .clauses
                .iter()
                .all(|cl| cl.iter().any(|&c| t.get(c) == witness))
    }

    pub fn to_relation(&self) -> Result<BooleanRelation> {
        BooleanRelation::from_predicate(self.arity, |t| self.satisfied_by(t))
    }

    /// Structural conditions of a normalized formula.
    pub fn is_normalized(&self) -> bool {
        let pins_disjoint = self
            .clauses
            .iter()
            .all(|cl| cl.iter().all(|c| !self.pins.contains_key(c)));
        let proper = self.clauses.iter().all(|cl| {
            cl.len() >= 2
                && cl.windows(2).all(|w| w[0] < w[1])
                && cl.iter().all(|&c| c < self.arity)
        });
        let antichain = self.clauses.iter().enumerate().all(|(i, a)| {
            self.clauses
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !a.iter().all(|c| b.contains(c)))
        });
        let trivial_when_false =
            !self.unsatisfiable || (self.pins.is_empty() && self.clauses.is_empty());
        pins_disjoint && proper && antichain && trivial_when_false
    }

    /// Pin-only derivation of `OR_j` (or `NAND_j`) for `2 <= j <= width`:
    /// keep `j` columns of a widest clause, pin the rest of that clause so it
    /// shrinks, and pin every other free column so that all other clauses
    /// hold.
    pub fn derive_clause_relation(&self, j: usize) -> Option<PppDerivation> {
        if j < 2 || self.unsatisfiable {
            return None;
        }
        let clause = self.clauses.iter().find(|cl| cl.len() >= j)?;
        let or = self.flavor == Flavor::OrConj;
        let mut d = PppDerivation {
            source_arity: self.arity,
            kept_columns: clause[..j].to_vec(),
            pins_to_zero: Vec::new(),
            pins_to_one: Vec::new(),
            projected: Vec::new(),
        };
        for c in 0..self.arity {
            if d.kept_columns.contains(&c) {
                continue;
            }
            // shrink the chosen clause: falsify its extra literals;
            // satisfy the rest: make every other column a witness
            let value = match self.pins.get(&c) {
                Some(&v) => v,
                None if clause.contains(&c) => !or,
                None => or,
            };
            if value {
                d.pins_to_one.push(c);
            } else {
                d.pins_to_zero.push(c);
            }
        }
        Some(d)
    }
}

impl fmt::Display for NormalizedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unsatisfiable {
            return f.write_str("false");
        }
        let op = match self.flavor {
            Flavor::OrConj => "OR",
            Flavor::NandConj => "NAND",
        };
        let mut parts: Vec<String> = self
            .pins
            .iter()
            .map(|(c, v)| format!("x{}={}", c + 1, *v as u8))
            .collect();
        for cl in &self.clauses {
            let args: Vec<String> = cl.iter().map(|c| format!("x{}", c + 1)).collect();
            parts.push(format!("{op}({})", args.join(",")));
        }
        if parts.is_empty() {
            return f.write_str("true");
        }
        f.write_str(&parts.join(" & "))
    }
}

fn or_formula(rel: &BooleanRelation) -> Option<NormalizedFormula> {
    let arity = rel.arity();
    if rel.is_empty() {
        return Some(NormalizedFormula {
            flavor: Flavor::OrConj,
            arity,
            pins: BTreeMap::new(),
            clauses: Vec::new(),
            unsatisfiable: true,
        });
    }
    let pins: BTreeMap<usize, bool> = rel.constant_columns().into_iter().collect();
    let (core, kept) = rel.without_constant_columns();
    if !core.is_monotone() {
        return None;
    }
    let n = core.arity();
    let mut clauses: Vec<Vec<usize>> = (0..1usize << n)
        .map(|i| BitTuple::new(n, i))
        .filter(|&a| !core.contains(a))
        .filter(|&a| {
            (0..n)
                .filter(|&i| !a.get(i))
                .all(|i| core.contains(a.with(i, true)))
        })
        .map(|a| (0..n).filter(|&i| !a.get(i)).map(|i| kept[i]).collect())
        .collect();
    let snapshot = clauses.clone();
    clauses.retain(|a| {
        !snapshot
            .iter()
            .any(|b| b != a && b.iter().all(|c| a.contains(c)))
    });
    clauses.sort();
    Some(NormalizedFormula {
        flavor: Flavor::OrConj,
        arity,
        pins,
        clauses,
        unsatisfiable: false,
    })
}

/// The unique normalized formula of the given flavor, or `None` when the
/// relation is not in that class.
pub fn normalized_formula(rel: &BooleanRelation, flavor: Flavor) -> Option<NormalizedFormula> {
    match flavor {
        Flavor::OrConj => or_formula(rel),
        Flavor::NandConj => {
            let mut f = or_formula(&rel.complement())?;
            f.flavor = Flavor::NandConj;
            for v in f.pins.values_mut() {
                *v = !*v;
            }
            Some(f)
        }
    }
}

/// Width of whichever normalized formula exists.
pub fn width(rel: &BooleanRelation) -> Option<usize> {
    normalized_formula(rel, Flavor::OrConj)
        .or_else(|| normalized_formula(rel, Flavor::NandConj))
        .map(|f| f.width())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TrichotomyTag {
    OrConj(NormalizedFormula),
    NandConj(NormalizedFormula),
    SimulatesEquality(Box<GadgetCertificate>),
}

impl TrichotomyTag {
    pub fn name(&self) -> &'static str {
        match self {
            TrichotomyTag::OrConj(_) => "OR-conj",
            TrichotomyTag::NandConj(_) => "NAND-conj",
            TrichotomyTag::SimulatesEquality(_) => "simulates-equality",
        }
    }

    pub fn formula(&self) -> Option<&NormalizedFormula> {
        match self {
            TrichotomyTag::OrConj(f) | TrichotomyTag::NandConj(f) => Some(f),
            TrichotomyTag::SimulatesEquality(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrichotomyOutcome {
    pub tag: TrichotomyTag,
    pub is_affine: bool,
    pub is_im_conj: bool,
}

/// Equality arity used for the certificate attached to a
/// simulates-equality outcome.
pub const TRICHOTOMY_K: usize = 2;

/// Places a relation in OR-conj, NAND-conj (OR-conj preferred when both
/// hold), or proves it 3-simulates equality with a verified gadget.
pub fn trichotomy(rel: &BooleanRelation) -> Result<TrichotomyOutcome> {
    let tag = if let Some(f) = normalized_formula(rel, Flavor::OrConj) {
        TrichotomyTag::OrConj(f)
    } else if let Some(f) = normalized_formula(rel, Flavor::NandConj) {
        TrichotomyTag::NandConj(f)
    } else {
        let lang = ConstraintLanguage::from_relations([("R", rel.clone())])?;
        let cert = gadgets::synthesize_equality(&lang, TRICHOTOMY_K, 3)?;
        TrichotomyTag::SimulatesEquality(Box::new(cert))
    };
    Ok(TrichotomyOutcome {
        tag,
        is_affine: is_affine(rel),
        is_im_conj: is_im_conj(rel).is_some(),
    })
}

/// One-line summary of the class memberships of a relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassFlags {
    pub affine: bool,
    pub im_conj: bool,
    pub pseudo_monotone: bool,
    pub pseudo_antitone: bool,
}

pub fn class_flags(rel: &BooleanRelation) -> ClassFlags {
    let f = rel.structural_tests();
    ClassFlags {
        affine: is_affine(rel),
        im_conj: is_im_conj(rel).is_some(),
        pseudo_monotone: f.is_pseudo_monotone,
        pseudo_antitone: f.is_pseudo_antitone,
    }
}
