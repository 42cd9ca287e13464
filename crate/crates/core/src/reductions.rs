//! Count-preserving instance transformations.
//!
//! * [`expand_degree`] splits high-degree variables into copies tied
//!   together by an equality gadget, so `Z(out) = M · Z(in)`.
//! * [`csp_to_his`] rewrites an instance over OR-conj or NAND-conj relations
//!   as a hypergraph whose independent sets are in bijection with its
//!   solutions.
//! * [`his_to_csp`] goes the other way through a single OR-conj or
//!   NAND-conj relation, so `Z(out) = M · #IS(H)`.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::classify::{normalized_formula, Flavor, NormalizedFormula};
use crate::error::{Error, Result};
use crate::gadgets::{synthesize_equality, GadgetCertificate};
use crate::instance::{Constraint, CspInstance, Hypergraph, Term};
use crate::language::{ConstraintLanguage, PIN_ONE, PIN_ZERO};
use crate::ppp::{for_each_derivation, PppDerivation};
use crate::relation::{standard, BooleanRelation};

/// Above this arity [`his_to_csp`] reads its derivations off the normalized
/// formula instead of searching.
const SEARCH_ARITY: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ReductionOutput {
    Csp {
        instance: CspInstance,
        language: ConstraintLanguage,
    },
    Hypergraph(Hypergraph),
}

/// Which side carries the multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `count(output) = M · count(input)`
    OutputIsMultiple,
    /// `count(input) = M · count(output)`
    InputIsMultiple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: usize,
    pub limit: usize,
}

impl BoundCheck {
    fn new(name: &str, value: usize, limit: usize) -> Result<Self> {
        if value > limit {
            return Err(Error::BoundViolated(format!(
                "{name} {value} exceeds {limit}"
            )));
        }
        Ok(BoundCheck {
            name: name.to_string(),
            value,
            limit,
        })
    }
}

impl fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} <= {}", self.name, self.value, self.limit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReceipt {
    pub output: ReductionOutput,
    pub multiplier: BigUint,
    /// The input has no solutions; the output is a placeholder and the
    /// count relation does not apply.
    pub annihilated: bool,
    /// Input variable behind each output variable or vertex; `None` for
    /// auxiliary variables.
    pub provenance: Vec<Option<usize>>,
    pub direction: Direction,
    pub bounds: Vec<BoundCheck>,
}

impl ReductionReceipt {
    pub fn csp(&self) -> Option<(&CspInstance, &ConstraintLanguage)> {
        match &self.output {
            ReductionOutput::Csp { instance, language } => Some((instance, language)),
            ReductionOutput::Hypergraph(_) => None,
        }
    }

    pub fn hypergraph(&self) -> Option<&Hypergraph> {
        match &self.output {
            ReductionOutput::Hypergraph(h) => Some(h),
            ReductionOutput::Csp { .. } => None,
        }
    }
}

/// Replaces every variable of degree above `d` by copies joined with an
/// equality gadget over `language`. Occurrences are dealt to the copies
/// round-robin; each copy keeps room for its gadget terminal uses.
pub fn expand_degree(
    instance: &CspInstance,
    language: &ConstraintLanguage,
    d: usize,
) -> Result<ReductionReceipt> {
    if d < 3 {
        return Err(Error::DegreeTooSmall(d));
    }
    instance.validate(language)?;
    let degrees = instance.degrees();
    let mut gadgets: HashMap<usize, GadgetCertificate> = HashMap::new();
    let mut gadget = |c: usize| -> Result<GadgetCertificate> {
        if let Some(g) = gadgets.get(&c) {
            return Ok(g.clone());
        }
        let g = synthesize_equality(language, c, d)?;
        gadgets.insert(c, g.clone());
        Ok(g)
    };

    // copies[v] = output variables standing for input variable v
    let mut copies: Vec<Vec<usize>> = Vec::with_capacity(degrees.len());
    let mut plans: Vec<(usize, GadgetCertificate)> = Vec::new();
    let mut provenance = Vec::new();
    for (v, &deg) in degrees.iter().enumerate() {
        let count = if deg <= d {
            1
        } else {
            let mut c = 2;
            loop {
                let g = gadget(c)?;
                let room = d - g.terminal_degree();
                if room == 0 {
                    return Err(Error::SynthesisFailed(format!(
                        "Eq_{c} gadget leaves no room for outside occurrences at degree {d}"
                    )));
                }
                let needed = deg.div_ceil(room).max(2);
                if needed == c {
                    plans.push((v, g));
                    break c;
                }
                c = needed;
            }
        };
        let first = provenance.len();
        provenance.extend(std::iter::repeat_n(Some(v), count));
        copies.push((first..first + count).collect());
    }

    let mut used = vec![0usize; degrees.len()];
    let mut constraints = Vec::with_capacity(instance.constraints().len());
    for c in instance.constraints() {
        let scope = c
            .scope
            .iter()
            .map(|&t| match t {
                Term::Var(v) => {
                    let copy = copies[v][used[v] % copies[v].len()];
                    used[v] += 1;
                    Term::Var(copy)
                }
                k => k,
            })
            .collect();
        constraints.push(Constraint::new(c.relation.clone(), scope));
    }

    let mut multiplier = BigUint::one();
    let mut gadget_language = language.clone();
    for (v, g) in &plans {
        multiplier *= &g.m;
        for (name, rel) in g.language.iter() {
            match gadget_language.get(name) {
                Some(existing) if existing == rel => {}
                Some(_) => return Err(Error::DuplicateName(name.to_string())),
                None => gadget_language.push(name, rel.clone())?,
            }
        }
        // terminals go to the copies, everything else is fresh
        let mut map = vec![usize::MAX; g.instance.variable_count()];
        for (i, &t) in g.terminals.iter().enumerate() {
            map[t] = copies[*v][i];
        }
        for slot in map.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = provenance.len();
            provenance.push(None);
        }
        for c in g.instance.constraints() {
            let scope = c
                .scope
                .iter()
                .map(|&t| match t {
                    Term::Var(u) => Term::Var(map[u]),
                    k => k,
                })
                .collect();
            constraints.push(Constraint::new(c.relation.clone(), scope));
        }
    }

    let output = CspInstance::with_constraints(provenance.len(), constraints)?;
    let bounds = vec![BoundCheck::new("degree", output.degree(), d)?];
    Ok(ReductionReceipt {
        output: ReductionOutput::Csp {
            instance: output,
            language: gadget_language,
        },
        multiplier,
        annihilated: false,
        provenance,
        direction: Direction::OutputIsMultiple,
        bounds,
    })
}

/// The flavor every relation of `language` shares (NAND preferred) and the
/// corresponding formulas by name.
fn common_flavor(
    language: &ConstraintLanguage,
) -> Result<(Flavor, BTreeMap<String, NormalizedFormula>)> {
    let mut formulas: [BTreeMap<String, NormalizedFormula>; 2] = Default::default();
    let lang = language.with_pins();
    for (name, rel) in lang.iter() {
        let or = normalized_formula(rel, Flavor::OrConj);
        let nand = normalized_formula(rel, Flavor::NandConj);
        if or.is_none() && nand.is_none() {
            return Err(Error::NoNormalizedFormula(name.to_string()));
        }
        if let Some(f) = nand {
            formulas[0].insert(name.to_string(), f);
        }
        if let Some(f) = or {
            formulas[1].insert(name.to_string(), f);
        }
    }
    let [nand, or] = formulas;
    if nand.len() == lang.len() {
        Ok((Flavor::NandConj, nand))
    } else if or.len() == lang.len() {
        Ok((Flavor::OrConj, or))
    } else {
        Err(Error::MixedFlavors)
    }
}

/// Rewrites an instance over OR-conj (or NAND-conj) relations as a
/// hypergraph with `Z(I) = #IS(H)`. OR-conj instances are read through the
/// complement of every variable, which turns OR clauses into NAND clauses.
/// Pins are propagated to a fixpoint before pinned variables are dropped.
pub fn csp_to_his(
    instance: &CspInstance,
    language: &ConstraintLanguage,
) -> Result<ReductionReceipt> {
    instance.validate(language)?;
    let (flavor, formulas) = common_flavor(language)?;
    let flip = flavor == Flavor::OrConj;
    let used: Vec<&NormalizedFormula> = instance
        .constraints()
        .iter()
        .map(|c| &formulas[&c.relation])
        .collect();
    let k = used.iter().map(|f| f.max_occurrences()).max().unwrap_or(0);
    let w = used.iter().map(|f| f.width()).max().unwrap_or(0);

    let n = instance.variable_count();
    let mut pins: Vec<Option<bool>> = vec![None; n];
    let mut clauses: Vec<Vec<usize>> = Vec::new();
    let mut annihilated = false;
    fn pin(pins: &mut [Option<bool>], v: usize, value: bool, dead: &mut bool) {
        match pins[v] {
            Some(old) if old != value => *dead = true,
            _ => pins[v] = Some(value),
        }
    }

    // everything below is in NAND space: a variable's value is flipped for
    // OR-conj inputs
    for (c, f) in instance.constraints().iter().zip(&used) {
        if f.unsatisfiable {
            annihilated = true;
            continue;
        }
        let term = |col: usize| match c.scope[col] {
            Term::Var(v) => Term::Var(v),
            Term::Const(b) => Term::Const(b ^ flip),
        };
        for (&col, &value) in &f.pins {
            match term(col) {
                Term::Var(v) => pin(&mut pins, v, value ^ flip, &mut annihilated),
                Term::Const(b) => annihilated |= b != value ^ flip,
            }
        }
        'clause: for cl in &f.clauses {
            let mut vars = Vec::with_capacity(cl.len());
            for &col in cl {
                match term(col) {
                    Term::Const(false) => continue 'clause,
                    Term::Const(true) => {}
                    Term::Var(v) => vars.push(v),
                }
            }
            vars.sort_unstable();
            vars.dedup();
            clauses.push(vars);
        }
    }

    loop {
        let mut changed = false;
        let mut kept = Vec::with_capacity(clauses.len());
        for mut cl in clauses {
            if cl.iter().any(|&v| pins[v] == Some(false)) {
                changed = true;
                continue;
            }
            let before = cl.len();
            cl.retain(|&v| pins[v] != Some(true));
            changed |= cl.len() != before;
            match cl.len() {
                0 => annihilated = true,
                1 => {
                    pin(&mut pins, cl[0], false, &mut annihilated);
                    changed = true;
                }
                _ => kept.push(cl),
            }
        }
        clauses = kept;
        if !changed || annihilated {
            break;
        }
    }

    if annihilated {
        return Ok(ReductionReceipt {
            output: ReductionOutput::Hypergraph(Hypergraph::default()),
            multiplier: BigUint::one(),
            annihilated: true,
            provenance: Vec::new(),
            direction: Direction::InputIsMultiple,
            bounds: Vec::new(),
        });
    }

    let mut index = vec![usize::MAX; n];
    let mut provenance = Vec::new();
    for v in (0..n).filter(|&v| pins[v].is_none()) {
        index[v] = provenance.len();
        provenance.push(Some(v));
    }
    let mut edges: Vec<Vec<usize>> = clauses
        .into_iter()
        .map(|cl| cl.into_iter().map(|v| index[v]).collect())
        .collect();
    for e in &mut edges {
        e.sort_unstable();
    }
    edges.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    edges.dedup();
    let mut minimal: Vec<Vec<usize>> = Vec::with_capacity(edges.len());
    for e in edges {
        if !minimal
            .iter()
            .any(|m| m.iter().all(|v| e.binary_search(v).is_ok()))
        {
            minimal.push(e);
        }
    }
    let h = Hypergraph::new(provenance.len(), minimal)?;
    let bounds = vec![
        BoundCheck::new("degree", h.degree(), k * instance.degree())?,
        BoundCheck::new("width", h.width(), w)?,
    ];
    Ok(ReductionReceipt {
        output: ReductionOutput::Hypergraph(h),
        multiplier: BigUint::one(),
        annihilated: false,
        provenance,
        direction: Direction::InputIsMultiple,
        bounds,
    })
}

/// First count-uniform derivation of `target` from `rel` in search order,
/// with its multiplicity.
fn uniform_derivation(
    target: &BooleanRelation,
    rel: &BooleanRelation,
    formula: &NormalizedFormula,
) -> Result<(PppDerivation, u64)> {
    let s = target.arity();
    if rel.arity() > SEARCH_ARITY {
        let d = formula
            .derive_clause_relation(s)
            .ok_or(Error::NoUniformDerivation(s))?;
        return Ok((d, 1));
    }
    let mut found = None;
    let mut failure = None;
    for_each_derivation(target, rel, |d| match d.uniform_multiplicity(rel) {
        Ok(Some(m)) => {
            found = Some((d.clone(), m));
            ControlFlow::Break(())
        }
        Ok(None) => ControlFlow::Continue(()),
        Err(e) => {
            failure = Some(e);
            ControlFlow::Break(())
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    match found {
        Some(hit) => Ok(hit),
        None => formula
            .derive_clause_relation(s)
            .map(|d| (d, 1))
            .ok_or(Error::NoUniformDerivation(s)),
    }
}

/// Encodes independent sets of `h` as solutions of an instance built from
/// the single relation `name`. A hyperedge of size `s ≥ 2` becomes one
/// constraint realizing `NAND_s` (or `OR_s` on complemented variables for an
/// OR-conj relation); a hyperedge of size one becomes a pin.
pub fn his_to_csp(h: &Hypergraph, name: &str, rel: &BooleanRelation) -> Result<ReductionReceipt> {
    let (flavor, formula) = match normalized_formula(rel, Flavor::NandConj) {
        Some(f) if f.width() >= 2 || h.width() < 2 => (Flavor::NandConj, f),
        nand => match normalized_formula(rel, Flavor::OrConj) {
            Some(f) => (Flavor::OrConj, f),
            None => {
                return Err(nand.map_or_else(
                    || Error::NoNormalizedFormula(name.to_string()),
                    |f| Error::WidthMismatch {
                        width: h.width(),
                        limit: f.width(),
                    },
                ))
            }
        },
    };
    let w = formula.width();
    if h.width() > w.max(1) {
        return Err(Error::WidthMismatch {
            width: h.width(),
            limit: w,
        });
    }
    let or = flavor == Flavor::OrConj;

    let mut derivations: HashMap<usize, (PppDerivation, u64)> = HashMap::new();
    let mut instance = CspInstance::new(h.vertex_count());
    let mut provenance: Vec<Option<usize>> = (0..h.vertex_count()).map(Some).collect();
    let mut multiplier = BigUint::one();
    for e in h.edges() {
        let s = e.len();
        if s == 1 {
            let pin = if or { PIN_ONE } else { PIN_ZERO };
            instance.add(pin, e)?;
            continue;
        }
        if let Entry::Vacant(slot) = derivations.entry(s) {
            let target = if or {
                standard::or_k(s)?
            } else {
                standard::nand_k(s)?
            };
            slot.insert(uniform_derivation(&target, rel, &formula)?);
        }
        let (d, m) = &derivations[&s];
        multiplier *= *m;
        let args: Vec<Term> = e.iter().map(|&v| Term::Var(v)).collect();
        let mut next = instance.variable_count();
        let c = d.instantiate(name, &args, || {
            next += 1;
            next - 1
        });
        while instance.variable_count() < next {
            instance.fresh_variable();
            provenance.push(None);
        }
        instance.push(c)?;
    }

    let degrees = instance.degrees();
    let aux_degree = degrees[h.vertex_count()..]
        .iter()
        .copied()
        .max()
        .unwrap_or(0);
    let vertex_degree = degrees[..h.vertex_count()]
        .iter()
        .copied()
        .max()
        .unwrap_or(0);
    let bounds = vec![
        BoundCheck::new("degree", vertex_degree, h.degree())?,
        BoundCheck::new("auxiliary degree", aux_degree, 1)?,
    ];
    let language = ConstraintLanguage::from_relations([(name, rel.clone())])?;
    Ok(ReductionReceipt {
        output: ReductionOutput::Csp { instance, language },
        multiplier,
        annihilated: false,
        provenance,
        direction: Direction::OutputIsMultiple,
        bounds,
    })
}
