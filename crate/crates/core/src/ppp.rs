//! Definitions by permutation, pinning and projection.
//!
//! Any chain of these three operations can be normalized to: choose the
//! columns to keep and their order, pin some of the rest, and project the
//! remainder away. [`PppDerivation`] records exactly that normal form.

use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Constraint, Term};
use crate::relation::{BitTuple, BooleanRelation};

/// Largest number of non-kept columns the search will assign roles to.
pub const PPP_BUDGET: usize = 12;

/// Largest target arity for which non-symmetric targets are matched under
/// every column order.
const PERMUTATION_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    /// Source column feeding target column `j`.
    Kept(usize),
    Pinned(bool),
    Projected,
}

/// Normal-form ppp definition of a target relation from a source relation.
/// Column indices refer to the source and are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PppDerivation {
    pub source_arity: usize,
    /// `kept_columns[j]` is the source column that becomes target column `j`.
    pub kept_columns: Vec<usize>,
    pub pins_to_zero: Vec<usize>,
    pub pins_to_one: Vec<usize>,
    pub projected: Vec<usize>,
}

impl PppDerivation {
    pub fn identity(arity: usize) -> Self {
        PppDerivation {
            source_arity: arity,
            kept_columns: (0..arity).collect(),
            pins_to_zero: Vec::new(),
            pins_to_one: Vec::new(),
            projected: Vec::new(),
        }
    }

    pub fn target_arity(&self) -> usize {
        self.kept_columns.len()
    }

    /// Checks that the four column groups partition the source columns.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.source_arity];
        let all = self
            .kept_columns
            .iter()
            .chain(&self.pins_to_zero)
            .chain(&self.pins_to_one)
            .chain(&self.projected);
        for &c in all {
            if c >= self.source_arity {
                return Err(Error::ColumnOutOfRange {
                    column: c,
                    arity: self.source_arity,
                });
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::UnusableDerivation(format!(
                    "column {c} is assigned two roles"
                )));
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::UnusableDerivation(format!(
                "column {c} is assigned no role"
            )));
        }
        Ok(())
    }

    pub fn role(&self, column: usize) -> ColumnRole {
        if let Some(j) = self.kept_columns.iter().position(|&c| c == column) {
            ColumnRole::Kept(j)
        } else if self.pins_to_zero.contains(&column) {
            ColumnRole::Pinned(false)
        } else if self.pins_to_one.contains(&column) {
            ColumnRole::Pinned(true)
        } else {
            ColumnRole::Projected
        }
    }

    pub fn is_pin_only(&self) -> bool {
        self.projected.is_empty()
    }

    fn pins_hold(&self, a: BitTuple) -> bool {
        self.pins_to_zero.iter().all(|&c| !a.get(c)) && self.pins_to_one.iter().all(|&c| a.get(c))
    }

    fn target_tuple(&self, a: BitTuple) -> BitTuple {
        let t = self.kept_columns.len();
        self.kept_columns
            .iter()
            .enumerate()
            .fold(BitTuple::new(t, 0), |b, (j, &c)| b.with(j, a.get(c)))
    }

    pub fn apply(&self, source: &BooleanRelation) -> Result<BooleanRelation> {
        self.check_source(source)?;
        BooleanRelation::from_tuples(
            self.target_arity(),
            source
                .members()
                .filter(|&a| self.pins_hold(a))
                .map(|a| self.target_tuple(a)),
        )
    }

    fn check_source(&self, source: &BooleanRelation) -> Result<()> {
        if source.arity() != self.source_arity {
            return Err(Error::ArityMismatch {
                expected: self.source_arity,
                found: source.arity(),
            });
        }
        self.validate()
    }

    /// For each target tuple index, the number of source members that agree
    /// with the pins and restrict to it.
    pub fn extension_counts(&self, source: &BooleanRelation) -> Result<Vec<u64>> {
        self.check_source(source)?;
        let mut counts = vec![0u64; 1 << self.target_arity()];
        for a in source.members().filter(|&a| self.pins_hold(a)) {
            counts[self.target_tuple(a).index()] += 1;
        }
        Ok(counts)
    }

    /// `Some(c)` when every tuple of the derived relation has exactly `c`
    /// extensions.
    pub fn uniform_multiplicity(&self, source: &BooleanRelation) -> Result<Option<u64>> {
        let counts = self.extension_counts(source)?;
        let mut nonzero = counts.into_iter().filter(|&c| c > 0);
        let Some(first) = nonzero.next() else {
            return Ok(None);
        };
        Ok(nonzero.all(|c| c == first).then_some(first))
    }

    /// Moves a projected column to the pinned group.
    pub fn with_pin(&self, column: usize, value: bool) -> Result<PppDerivation> {
        if self.role(column) != ColumnRole::Projected {
            return Err(Error::UnusableDerivation(format!(
                "column {column} is not projected"
            )));
        }
        let mut d = self.clone();
        d.projected.retain(|&c| c != column);
        let pins = if value {
            &mut d.pins_to_one
        } else {
            &mut d.pins_to_zero
        };
        pins.push(column);
        pins.sort_unstable();
        Ok(d)
    }

    /// Rewrites a derivation from `pin_and_project(R, column, value)` into a
    /// derivation from `R`.
    pub fn lift(&self, column: usize, value: bool) -> PppDerivation {
        let up = |c: &usize| if *c >= column { c + 1 } else { *c };
        let remap = |v: &[usize]| v.iter().map(up).collect::<Vec<_>>();
        let mut d = PppDerivation {
            source_arity: self.source_arity + 1,
            kept_columns: remap(&self.kept_columns),
            pins_to_zero: remap(&self.pins_to_zero),
            pins_to_one: remap(&self.pins_to_one),
            projected: remap(&self.projected),
        };
        let pins = if value {
            &mut d.pins_to_one
        } else {
            &mut d.pins_to_zero
        };
        pins.push(column);
        pins.sort_unstable();
        d
    }

    /// A constraint on the source relation realizing the target on `args`:
    /// pinned columns become literal constants and each projected column a
    /// fresh variable from `fresh`.
    pub fn instantiate(
        &self,
        relation: &str,
        args: &[Term],
        mut fresh: impl FnMut() -> usize,
    ) -> Constraint {
        assert_eq!(args.len(), self.target_arity());
        let scope = (0..self.source_arity)
            .map(|c| match self.role(c) {
                ColumnRole::Kept(j) => args[j],
                ColumnRole::Pinned(v) => Term::Const(v),
                ColumnRole::Projected => Term::Var(fresh()),
            })
            .collect();
        Constraint::new(relation, scope)
    }

    /// Human-readable summary using 1-based column numbers.
    pub fn describe(&self) -> String {
        let list = |v: &[usize]| {
            v.iter()
                .map(|c| (c + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut parts = vec![format!("keep [{}]", list(&self.kept_columns))];
        if !self.pins_to_zero.is_empty() {
            parts.push(format!("pin0 {{{}}}", list(&self.pins_to_zero)));
        }
        if !self.pins_to_one.is_empty() {
            parts.push(format!("pin1 {{{}}}", list(&self.pins_to_one)));
        }
        if !self.projected.is_empty() {
            parts.push(format!("project {{{}}}", list(&self.projected)));
        }
        parts.join(", ")
    }
}

/// Invariant under every transposition of adjacent columns.
fn is_symmetric(rel: &BooleanRelation) -> bool {
    let t = rel.arity();
    (0..t.saturating_sub(1)).all(|i| {
        let mut perm: Vec<usize> = (0..t).collect();
        perm.swap(i, i + 1);
        rel.permute_columns(&perm).as_ref() == Ok(rel)
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Column orders worth trying, as `(perm, target')` where matching the
/// sorted-kept restriction against `target'` means the derivation keeps
/// `sorted[perm[j]]` for target column `j`. Duplicate `target'` are skipped.
fn orderings(target: &BooleanRelation) -> Result<Vec<(Vec<usize>, BooleanRelation)>> {
    let t = target.arity();
    let identity: Vec<usize> = (0..t).collect();
    if is_symmetric(target) {
        return Ok(vec![(identity, target.clone())]);
    }
    if t > PERMUTATION_LIMIT {
        return Err(Error::SearchBudget {
            free: t,
            budget: PERMUTATION_LIMIT,
        });
    }
    let mut out: Vec<(Vec<usize>, BooleanRelation)> = Vec::new();
    let mut perm = identity;
    loop {
        // restriction R' matches when R'.permute(perm) == target, i.e.
        // R' == target.permute(perm^-1)
        let mut inverse = vec![0; t];
        for (j, &p) in perm.iter().enumerate() {
            inverse[p] = j;
        }
        let expected = target.permute_columns(&inverse)?;
        if !out.iter().any(|(_, r)| *r == expected) {
            out.push((perm.clone(), expected));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

/// Visits every derivation of `target` from `source` in search order: fewest
/// projected columns first; then kept column sets in lexicographic order;
/// then projected sets in lexicographic order; then pin values counting up
/// in binary (lowest free column most significant); then column orders in
/// lexicographic order of permutations.
pub fn for_each_derivation<B>(
    target: &BooleanRelation,
    source: &BooleanRelation,
    mut visit: impl FnMut(PppDerivation) -> ControlFlow<B>,
) -> Result<Option<B>> {
    let (t, r) = (target.arity(), source.arity());
    if t > r {
        return Ok(None);
    }
    let free = r - t;
    if free > PPP_BUDGET {
        return Err(Error::SearchBudget {
            free,
            budget: PPP_BUDGET,
        });
    }
    let orders = orderings(target)?;
    let members: Vec<BitTuple> = source.members().collect();

    for proj_count in 0..=free {
        let mut kept: Vec<usize> = (0..t).collect();
        loop {
            let rest: Vec<usize> = (0..r).filter(|c| !kept.contains(c)).collect();
            let mut proj_idx: Vec<usize> = (0..proj_count).collect();
            loop {
                let projected: Vec<usize> = proj_idx.iter().map(|&i| rest[i]).collect();
                let pinned: Vec<usize> = rest
                    .iter()
                    .copied()
                    .filter(|c| !projected.contains(c))
                    .collect();
                let pin_count = pinned.len();
                for pin_bits in 0..(1usize << pin_count) {
                    let pins = BitTuple::new(pin_count, pin_bits);
                    let restricted = BooleanRelation::from_tuples(
                        t,
                        members
                            .iter()
                            .filter(|a| {
                                pinned
                                    .iter()
                                    .enumerate()
                                    .all(|(i, &c)| a.get(c) == pins.get(i))
                            })
                            .map(|a| {
                                kept.iter()
                                    .enumerate()
                                    .fold(BitTuple::new(t, 0), |b, (j, &c)| b.with(j, a.get(c)))
                            }),
                    )?;
                    for (perm, expected) in &orders {
                        if restricted != *expected {
                            continue;
                        }
                        let d = PppDerivation {
                            source_arity: r,
                            kept_columns: perm.iter().map(|&p| kept[p]).collect(),
                            pins_to_zero: (0..pin_count)
                                .filter(|&i| !pins.get(i))
                                .map(|i| pinned[i])
                                .collect(),
                            pins_to_one: (0..pin_count)
                                .filter(|&i| pins.get(i))
                                .map(|i| pinned[i])
                                .collect(),
                            projected: projected.clone(),
                        };
                        if let ControlFlow::Break(b) = visit(d) {
                            return Ok(Some(b));
                        }
                    }
                }
                if proj_count == 0 || !next_combination(&mut proj_idx, rest.len()) {
                    break;
                }
            }
            if t == 0 || !next_combination(&mut kept, r) {
                break;
            }
        }
    }
    Ok(None)
}

/// First derivation of `target` from `source` in search order.
pub fn find_ppp(
    target: &BooleanRelation,
    source: &BooleanRelation,
) -> Result<Option<PppDerivation>> {
    for_each_derivation(target, source, ControlFlow::Break)
}

/// Every derivation of `target` from `source`, in search order.
pub fn all_derivations(
    target: &BooleanRelation,
    source: &BooleanRelation,
) -> Result<Vec<PppDerivation>> {
    let mut out = Vec::new();
    for_each_derivation::<()>(target, source, |d| {
        out.push(d);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}
